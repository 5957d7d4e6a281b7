#pragma once

// Small text helpers shared by the file readers and writers.

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace seongdo::text {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Strips a trailing CR (CRLF input) and a leading UTF-8 byte order mark.
inline std::string_view strip_line(std::string_view line, bool first_line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (first_line && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
  return line;
}

// Plain comma split; the catalog contracts do not use quoting.
inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

template <typename UInt>
std::optional<UInt> parse_unsigned(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  UInt value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Fixed-point formatting that does not depend on the C locale.
inline void append_fixed(std::string& out, double value, int precision) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, precision);
  if (ec != std::errc{}) {
    out += "0";
    return;
  }
  std::string_view s(buf, static_cast<std::size_t>(ptr - buf));
  if (s == "-0" || (s.starts_with("-0.") && s.find_first_not_of("0.", 1) == std::string_view::npos)) {
    s.remove_prefix(1);
  }
  out += s;
}

inline std::string fixed(double value, int precision) {
  std::string s;
  append_fixed(s, value, precision);
  return s;
}

// ASCII-only case folding; Hangul and Hanja have no case.
inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace seongdo::text
