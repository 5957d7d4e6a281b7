#pragma once

// Catalog and cross-reference readers.
//
// File contracts (comma separated, mandatory header, LF or CRLF):
//   GaiaLike       source_id,ra,dec,parallax,phot_g_mean_mag[,hip]
//   HipparcosLike  hip,ra,dec,plx,vmag
//   CrossRef       hr,hip
// Angles in degrees, parallax in milliarcseconds. The optional trailing
// `hip` column of the Gaia-like file links a row to its Hipparcos identity.
//
// Malformed data rows are rejected and counted per reason; a wrong header is
// fatal because it almost always means the wrong format flag was passed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "seongdo/error.hpp"
#include "seongdo/text.hpp"

namespace seongdo {

enum class CatalogFormat : std::uint8_t { kGaiaLike = 0, kHipparcosLike = 1 };

inline const char* to_string(CatalogFormat f) {
  return f == CatalogFormat::kGaiaLike ? "gaia" : "hipparcos";
}

// Photometric band of the magnitudes a catalog flavor carries.
inline const char* band_of(CatalogFormat f) {
  return f == CatalogFormat::kGaiaLike ? "G" : "V";
}

struct RawCatalogRow {
  CatalogFormat source_catalog = CatalogFormat::kHipparcosLike;
  std::uint64_t source_id = 0;
  double ra_deg = 0.0;
  double dec_deg = 0.0;
  std::optional<double> parallax_mas;
  double apparent_mag = 0.0;
  // Hipparcos identity of the row: the id itself for Hipparcos-like rows,
  // the optional link column for Gaia-like rows.
  std::optional<std::uint32_t> hip_id;
  std::size_t line = 0;

  friend bool operator==(const RawCatalogRow&, const RawCatalogRow&) = default;
};

namespace reject {
inline constexpr const char* kFieldCount = "field_count";
inline constexpr const char* kMissingField = "missing_field";
inline constexpr const char* kUnparseable = "unparseable_field";
inline constexpr const char* kRaOutOfRange = "ra_out_of_range";
inline constexpr const char* kDecOutOfRange = "dec_out_of_range";
inline constexpr const char* kNonFiniteMagnitude = "non_finite_magnitude";
inline constexpr const char* kNonFiniteParallax = "non_finite_parallax";
inline constexpr const char* kDuplicateId = "duplicate_source_id";
inline constexpr const char* kConflict = "conflicting_duplicate";
}  // namespace reject

namespace warn {
inline constexpr const char* kRaWrapped = "ra_wrapped";
inline constexpr const char* kDuplicatePair = "duplicate_pair";
}  // namespace warn

struct RowDiagnostic {
  std::size_t line = 0;
  std::string reason;
};

struct IngestReport {
  std::string source;
  std::string format;
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;
  std::map<std::string, std::size_t> reject_reasons;
  std::map<std::string, std::size_t> warnings;
  // First few rejects with line numbers, for humans.
  std::vector<RowDiagnostic> samples;

  static constexpr std::size_t kMaxSamples = 20;

  void reject(std::size_t line, const std::string& reason) {
    ++rows_rejected;
    ++reject_reasons[reason];
    if (samples.size() < kMaxSamples) samples.push_back({line, reason});
  }
  void warn(const std::string& what) { ++warnings[what]; }
};

inline nlohmann::ordered_json to_json(const IngestReport& r) {
  nlohmann::ordered_json j;
  j["source"] = r.source;
  j["format"] = r.format;
  j["rows_read"] = r.rows_read;
  j["rows_accepted"] = r.rows_accepted;
  j["rows_rejected"] = r.rows_rejected;
  j["reject_reasons"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.reject_reasons) j["reject_reasons"][k] = v;
  j["warnings"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.warnings) j["warnings"][k] = v;
  auto samples = nlohmann::ordered_json::array();
  for (const auto& s : r.samples) samples.push_back({{"line", s.line}, {"reason", s.reason}});
  j["reject_samples"] = samples;
  return j;
}

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

struct HeaderContract {
  std::vector<std::string> base;
  std::optional<std::string> optional_tail;
};

inline HeaderContract header_contract(CatalogFormat f) {
  if (f == CatalogFormat::kGaiaLike) {
    return {{"source_id", "ra", "dec", "parallax", "phot_g_mean_mag"}, "hip"};
  }
  return {{"hip", "ra", "dec", "plx", "vmag"}, std::nullopt};
}

// Returns the number of columns the data rows must have.
inline std::size_t check_header(std::string_view header, const HeaderContract& contract,
                                const std::string& source) {
  const auto cols = text::split_csv(header);
  auto matches = [&](std::size_t n) {
    if (cols.size() != n) return false;
    for (std::size_t i = 0; i < contract.base.size(); ++i) {
      if (cols[i] != contract.base[i]) return false;
    }
    return n == contract.base.size() || cols.back() == *contract.optional_tail;
  };
  if (matches(contract.base.size())) return contract.base.size();
  if (contract.optional_tail && matches(contract.base.size() + 1)) return contract.base.size() + 1;
  std::string expected;
  for (const auto& c : contract.base) expected += (expected.empty() ? "" : ",") + c;
  throw DataError(source + ": header mismatch, expected '" + expected + "' got '" +
                  std::string(header) + "'");
}

}  // namespace detail

// Streams accepted rows of a catalog into `sink`, one at a time, in file order.
inline IngestReport for_each_catalog_row(std::istream& in, CatalogFormat format,
                                         const std::string& source,
                                         const std::function<void(RawCatalogRow&&)>& sink) {
  IngestReport report;
  report.source = source;
  report.format = to_string(format);

  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file, header row required");
  const std::size_t ncols =
      detail::check_header(text::strip_line(line, true), detail::header_contract(format), source);

  std::unordered_set<std::uint64_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = text::strip_line(line, false);
    if (text::trim(stripped).empty()) continue;
    ++report.rows_read;

    const auto f = text::split_csv(stripped);
    if (f.size() != ncols) {
      report.reject(line_no, reject::kFieldCount);
      continue;
    }
    if (f[0].empty() || f[1].empty() || f[2].empty() || f[4].empty()) {
      report.reject(line_no, reject::kMissingField);
      continue;
    }
    const auto id = text::parse_unsigned<std::uint64_t>(f[0]);
    const auto ra = text::parse_double(f[1]);
    const auto dec = text::parse_double(f[2]);
    const auto mag = text::parse_double(f[4]);
    std::optional<double> plx;
    bool plx_ok = true;
    if (!f[3].empty()) {
      plx = text::parse_double(f[3]);
      plx_ok = plx.has_value();
    }
    std::optional<std::uint32_t> hip;
    bool hip_ok = true;
    if (format == CatalogFormat::kHipparcosLike) {
      if (id && *id <= UINT32_MAX) hip = static_cast<std::uint32_t>(*id);
      hip_ok = hip.has_value();
    } else if (ncols == 6 && !f[5].empty()) {
      hip = text::parse_unsigned<std::uint32_t>(f[5]);
      hip_ok = hip.has_value();
    }
    if (!id || !ra || !dec || !mag || !plx_ok || !hip_ok || !std::isfinite(*ra) ||
        !std::isfinite(*dec)) {
      report.reject(line_no, reject::kUnparseable);
      continue;
    }
    double ra_deg = *ra;
    if (ra_deg < -360.0 || ra_deg >= 720.0) {
      report.reject(line_no, reject::kRaOutOfRange);
      continue;
    }
    if (*dec < -90.0 || *dec > 90.0) {
      report.reject(line_no, reject::kDecOutOfRange);
      continue;
    }
    if (!std::isfinite(*mag)) {
      report.reject(line_no, reject::kNonFiniteMagnitude);
      continue;
    }
    if (plx && !std::isfinite(*plx)) {
      report.reject(line_no, reject::kNonFiniteParallax);
      continue;
    }
    if (!seen.insert(*id).second) {
      report.reject(line_no, reject::kDuplicateId);
      continue;
    }
    if (ra_deg < 0.0 || ra_deg >= 360.0) {
      ra_deg += ra_deg < 0.0 ? 360.0 : -360.0;
      if (ra_deg >= 360.0) ra_deg = 0.0;  // -1e-17 + 360 rounds up
      report.warn(warn::kRaWrapped);
    }
    ++report.rows_accepted;
    sink(RawCatalogRow{format, *id, ra_deg, *dec, plx, *mag, hip, line_no});
  }
  return report;
}

struct CatalogParse {
  std::vector<RawCatalogRow> rows;
  IngestReport report;
};

inline CatalogParse parse_catalog(std::istream& in, CatalogFormat format, const std::string& source) {
  CatalogParse out;
  out.report = for_each_catalog_row(in, format, source,
                                    [&](RawCatalogRow&& r) { out.rows.push_back(std::move(r)); });
  return out;
}

inline CatalogParse parse_catalog(const std::filesystem::path& path, CatalogFormat format) {
  auto in = detail::open_input(path);
  return parse_catalog(in, format, path.string());
}

struct FilterResult {
  std::vector<RawCatalogRow> rows;
  std::size_t removed_non_positive = 0;
  std::size_t removed_missing = 0;
  // Hipparcos identities that existed before filtering but were removed.
  std::vector<std::uint32_t> removed_hip_ids;

  std::size_t count_removed() const { return removed_non_positive + removed_missing; }
};

// Keeps exactly the rows with a parallax strictly greater than zero.
inline FilterResult filter_positive_parallax(std::vector<RawCatalogRow> rows) {
  FilterResult out;
  out.rows.reserve(rows.size());
  for (auto& r : rows) {
    if (r.parallax_mas && *r.parallax_mas > 0.0) {
      out.rows.push_back(std::move(r));
      continue;
    }
    if (r.parallax_mas) {
      ++out.removed_non_positive;
    } else {
      ++out.removed_missing;
    }
    if (r.hip_id) out.removed_hip_ids.push_back(*r.hip_id);
  }
  return out;
}

struct CrossRef {
  std::uint32_t yale_hr_id = 0;
  std::uint32_t hip_id = 0;

  friend bool operator==(const CrossRef&, const CrossRef&) = default;
};

// HR -> HIP map built from a crossref file. HR is a function key.
class CrossRefTable {
 public:
  CrossRefTable() = default;

  // Throws DataError on a conflicting duplicate HR.
  void add(const CrossRef& ref, std::size_t line = 0) {
    const auto [it, inserted] = by_hr_.emplace(ref.yale_hr_id, ref.hip_id);
    if (!inserted) {
      if (it->second != ref.hip_id) {
        throw DataError("crossref conflict: HR " + std::to_string(ref.yale_hr_id) + " maps to HIP " +
                        std::to_string(it->second) + " and HIP " + std::to_string(ref.hip_id) +
                        (line ? " (line " + std::to_string(line) + ")" : std::string{}));
      }
      ++duplicates_;
      return;
    }
    entries_.push_back(ref);
    auto [hit, hinserted] = hr_by_hip_.emplace(ref.hip_id, ref.yale_hr_id);
    if (!hinserted && ref.yale_hr_id < hit->second) hit->second = ref.yale_hr_id;
  }

  std::optional<std::uint32_t> hip_for(std::uint32_t hr) const {
    const auto it = by_hr_.find(hr);
    if (it == by_hr_.end()) return std::nullopt;
    return it->second;
  }

  // Smallest HR number that maps to this HIP.
  std::optional<std::uint32_t> hr_for(std::uint32_t hip) const {
    const auto it = hr_by_hip_.find(hip);
    if (it == hr_by_hip_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<CrossRef>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t duplicates() const { return duplicates_; }

 private:
  std::vector<CrossRef> entries_;
  std::unordered_map<std::uint32_t, std::uint32_t> by_hr_;
  std::unordered_map<std::uint32_t, std::uint32_t> hr_by_hip_;
  std::size_t duplicates_ = 0;
};

struct CrossRefParse {
  CrossRefTable table;
  IngestReport report;
};

inline CrossRefParse parse_crossref(std::istream& in, const std::string& source) {
  CrossRefParse out;
  out.report.source = source;
  out.report.format = "crossref";
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file, header row required");
  detail::check_header(text::strip_line(line, true), {{"hr", "hip"}, std::nullopt}, source);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = text::strip_line(line, false);
    if (text::trim(stripped).empty()) continue;
    ++out.report.rows_read;
    const auto f = text::split_csv(stripped);
    if (f.size() != 2) {
      out.report.reject(line_no, reject::kFieldCount);
      continue;
    }
    const auto hr = text::parse_unsigned<std::uint32_t>(f[0]);
    const auto hip = text::parse_unsigned<std::uint32_t>(f[1]);
    if (!hr || !hip) {
      out.report.reject(line_no, f[0].empty() || f[1].empty() ? reject::kMissingField
                                                              : reject::kUnparseable);
      continue;
    }
    const std::size_t before = out.table.duplicates();
    out.table.add({*hr, *hip}, line_no);
    ++out.report.rows_accepted;
    if (out.table.duplicates() != before) out.report.warn(warn::kDuplicatePair);
  }
  return out;
}

inline CrossRefParse parse_crossref(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_crossref(in, path.string());
}

}  // namespace seongdo
