#pragma once

// Snapshot container, format version 1.
//
//   "SGDO"            4 bytes magic
//   version           u16
//   section_count     u16
//   section*          tag (4 ASCII bytes), byte length u64, payload
//
// Sections: STAR, CONS, META, always written in that order. Readers skip
// unknown tags. All integers little-endian, floats IEEE-754 binary64,
// strings u32 byte length + UTF-8 bytes.
//
// STAR: u32 count, then per star
//   u32 uid, u8 presence (bit0 hip, bit1 hr, bit2 korean, bit3 romanized,
//   bit4 western), u8 source_catalog, u64 source_id, u32 hip, u32 hr,
//   f64 ra, dec, parallax, x, y, z, apparent, absolute, present names.
// CONS: u32 count, then per constellation
//   id, korean, romanized, meaning, u8 class kind, u8 lodge index,
//   u32 n + n*u32 members, u32 m + m*(u32,u32) edges, lore,
//   u8 has_note [, note].
// META: u32 count, then (key, value) string pairs in key order.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>
#include <vector>

#include "seongdo/atlas.hpp"
#include "seongdo/binary_io.hpp"
#include "seongdo/error.hpp"

namespace seongdo {

inline constexpr std::array<char, 4> kSnapshotMagic{'S', 'G', 'D', 'O'};
inline constexpr std::uint16_t kSnapshotVersion = 1;

namespace detail {

enum StarPresence : std::uint8_t {
  kHasHip = 1 << 0,
  kHasHr = 1 << 1,
  kHasKorean = 1 << 2,
  kHasRomanized = 1 << 3,
  kHasWestern = 1 << 4,
};

inline void write_stars(ByteWriter& w, const std::vector<StarRecord>& stars) {
  w.put(static_cast<std::uint32_t>(stars.size()));
  for (const auto& s : stars) {
    std::uint8_t presence = 0;
    if (s.hip_id) presence |= kHasHip;
    if (s.yale_hr_id) presence |= kHasHr;
    if (s.korean_name) presence |= kHasKorean;
    if (s.romanized_name) presence |= kHasRomanized;
    if (s.western_name) presence |= kHasWestern;
    w.put(s.star_uid);
    w.put(presence);
    w.put(static_cast<std::uint8_t>(s.source_catalog));
    w.put(s.source_id);
    w.put(s.hip_id.value_or(0));
    w.put(s.yale_hr_id.value_or(0));
    for (double v : {s.spherical.ra_deg, s.spherical.dec_deg, s.spherical.parallax_mas, s.cartesian.x,
                     s.cartesian.y, s.cartesian.z, s.magnitudes.apparent, s.magnitudes.absolute}) {
      w.put_f64(v);
    }
    if (s.korean_name) w.put_string(*s.korean_name);
    if (s.romanized_name) w.put_string(*s.romanized_name);
    if (s.western_name) w.put_string(*s.western_name);
  }
}

inline std::vector<StarRecord> read_stars(ByteReader& r) {
  const auto n = r.get<std::uint32_t>();
  std::vector<StarRecord> stars;
  stars.reserve(std::min<std::size_t>(n, r.remaining() / 90 + 1));
  for (std::uint32_t i = 0; i < n; ++i) {
    StarRecord s;
    s.star_uid = r.get<std::uint32_t>();
    const auto presence = r.get<std::uint8_t>();
    const auto cat = r.get<std::uint8_t>();
    if (cat > 1) throw DataError("snapshot: bad source catalog code");
    s.source_catalog = static_cast<CatalogFormat>(cat);
    s.source_id = r.get<std::uint64_t>();
    const auto hip = r.get<std::uint32_t>();
    const auto hr = r.get<std::uint32_t>();
    if (presence & kHasHip) s.hip_id = hip;
    if (presence & kHasHr) s.yale_hr_id = hr;
    s.spherical.ra_deg = r.get_f64();
    s.spherical.dec_deg = r.get_f64();
    s.spherical.parallax_mas = r.get_f64();
    s.cartesian.x = r.get_f64();
    s.cartesian.y = r.get_f64();
    s.cartesian.z = r.get_f64();
    s.magnitudes.apparent = r.get_f64();
    s.magnitudes.absolute = r.get_f64();
    if (presence & kHasKorean) s.korean_name = r.get_string();
    if (presence & kHasRomanized) s.romanized_name = r.get_string();
    if (presence & kHasWestern) s.western_name = r.get_string();
    stars.push_back(std::move(s));
  }
  return stars;
}

inline void write_constellations(ByteWriter& w, const std::vector<Constellation>& cons) {
  w.put(static_cast<std::uint32_t>(cons.size()));
  for (const auto& c : cons) {
    w.put_string(c.const_id);
    w.put_string(c.korean_name);
    w.put_string(c.romanized_name);
    w.put_string(c.meaning);
    w.put(static_cast<std::uint8_t>(c.classification.kind));
    w.put(c.classification.lodge_index);
    w.put(static_cast<std::uint32_t>(c.member_uids.size()));
    for (auto uid : c.member_uids) w.put(uid);
    w.put(static_cast<std::uint32_t>(c.edges.size()));
    for (const auto& [a, b] : c.edges) {
      w.put(a);
      w.put(b);
    }
    w.put_string(c.lore);
    w.put(static_cast<std::uint8_t>(c.western_note ? 1 : 0));
    if (c.western_note) w.put_string(*c.western_note);
  }
}

inline std::vector<Constellation> read_constellations(ByteReader& r) {
  const auto n = r.get<std::uint32_t>();
  std::vector<Constellation> out;
  for (std::uint32_t i = 0; i < n; ++i) {
    Constellation c;
    c.const_id = r.get_string();
    c.korean_name = r.get_string();
    c.romanized_name = r.get_string();
    c.meaning = r.get_string();
    const auto kind = r.get<std::uint8_t>();
    if (kind > 2) throw DataError("snapshot: bad classification code");
    c.classification.kind = static_cast<ClassKind>(kind);
    c.classification.lodge_index = r.get<std::uint8_t>();
    const auto nm = r.get<std::uint32_t>();
    if (nm > r.remaining() / 4) throw DataError("snapshot: member count exceeds section");
    for (std::uint32_t k = 0; k < nm; ++k) c.member_uids.push_back(r.get<std::uint32_t>());
    const auto ne = r.get<std::uint32_t>();
    if (ne > r.remaining() / 8) throw DataError("snapshot: edge count exceeds section");
    for (std::uint32_t k = 0; k < ne; ++k) {
      const auto a = r.get<std::uint32_t>();
      const auto b = r.get<std::uint32_t>();
      c.edges.emplace_back(a, b);
    }
    c.lore = r.get_string();
    if (r.get<std::uint8_t>()) c.western_note = r.get_string();
    out.push_back(std::move(c));
  }
  return out;
}

inline void put_section(ByteWriter& out, const char (&tag)[5], const ByteWriter& payload) {
  out.put_raw(std::string_view(tag, 4));
  out.put(static_cast<std::uint64_t>(payload.size()));
  out.put_bytes(payload.bytes());
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_snapshot(const AtlasSnapshot& snap) {
  ByteWriter stars, cons, meta;
  detail::write_stars(stars, snap.stars);
  detail::write_constellations(cons, snap.constellations);
  meta.put(static_cast<std::uint32_t>(snap.build_meta.size()));
  for (const auto& [k, v] : snap.build_meta) {
    meta.put_string(k);
    meta.put_string(v);
  }
  ByteWriter out;
  out.put_raw(std::string_view(kSnapshotMagic.data(), kSnapshotMagic.size()));
  out.put(kSnapshotVersion);
  out.put(static_cast<std::uint16_t>(3));
  detail::put_section(out, "STAR", stars);
  detail::put_section(out, "CONS", cons);
  detail::put_section(out, "META", meta);
  return out.take();
}

inline AtlasSnapshot deserialize_snapshot(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.remaining() < 8 || r.get_raw(4) != std::string_view(kSnapshotMagic.data(), 4)) {
    throw DataError("snapshot: bad magic, not a snapshot file");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kSnapshotVersion) {
    throw DataError("snapshot: unsupported format version " + std::to_string(version));
  }
  const auto sections = r.get<std::uint16_t>();
  AtlasSnapshot snap;
  bool have_stars = false, have_cons = false, have_meta = false;
  for (std::uint16_t i = 0; i < sections; ++i) {
    const auto tag = r.get_raw(4);
    const auto len = r.get<std::uint64_t>();
    if (len > r.remaining()) throw DataError("snapshot: section '" + tag + "' is truncated");
    ByteReader body(r.get_span(static_cast<std::size_t>(len)));
    if (tag == "STAR") {
      snap.stars = detail::read_stars(body);
      have_stars = true;
    } else if (tag == "CONS") {
      snap.constellations = detail::read_constellations(body);
      have_cons = true;
    } else if (tag == "META") {
      const auto n = body.get<std::uint32_t>();
      for (std::uint32_t k = 0; k < n; ++k) {
        auto key = body.get_string();
        snap.build_meta[std::move(key)] = body.get_string();
      }
      have_meta = true;
    } else {
      continue;
    }
    if (!body.done()) throw DataError("snapshot: trailing bytes in section '" + tag + "'");
  }
  if (!have_stars || !have_cons || !have_meta) throw DataError("snapshot: missing required section");
  if (!r.done()) throw DataError("snapshot: trailing bytes after last section");
  const auto problems = check_integrity(snap);
  if (!problems.empty()) throw DataError("snapshot: " + problems.front());
  return snap;
}

inline void write_file_atomically(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void save_snapshot(const AtlasSnapshot& snap, const std::filesystem::path& path) {
  write_file_atomically(path, serialize_snapshot(snap));
}

inline AtlasSnapshot load_snapshot(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return deserialize_snapshot(bytes);
}

}  // namespace seongdo
