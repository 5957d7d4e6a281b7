#pragma once

// Star packet stream: u32 record count, then `count` fixed 21-byte records
//   u32 star_uid | f32 x | f32 y | f32 z | f32 abs_mag | u8 flags
// little-endian, positions in parsecs. Flag bit0: star has a Korean name;
// bit1: star is a constellation member.

#include <cstdint>
#include <span>
#include <vector>

#include "seongdo/atlas.hpp"
#include "seongdo/binary_io.hpp"

namespace seongdo {

inline constexpr std::size_t kStarPacketSize = 21;
inline constexpr std::uint8_t kFlagKoreanName = 1 << 0;
inline constexpr std::uint8_t kFlagMember = 1 << 1;

struct StarPacket {
  std::uint32_t star_uid = 0;
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float abs_mag = 0.0f;
  std::uint8_t flags = 0;

  friend bool operator==(const StarPacket&, const StarPacket&) = default;
};

inline StarPacket make_packet(const Atlas& atlas, std::uint32_t uid) {
  const StarRecord& s = atlas.stars().at(uid);
  StarPacket p;
  p.star_uid = uid;
  p.x = static_cast<float>(s.cartesian.x);
  p.y = static_cast<float>(s.cartesian.y);
  p.z = static_cast<float>(s.cartesian.z);
  p.abs_mag = static_cast<float>(s.magnitudes.absolute);
  if (s.korean_name) p.flags |= kFlagKoreanName;
  if (atlas.is_member(uid)) p.flags |= kFlagMember;
  return p;
}

inline std::vector<std::uint8_t> encode_packets(std::span<const StarPacket> packets) {
  ByteWriter w;
  w.put(static_cast<std::uint32_t>(packets.size()));
  for (const auto& p : packets) {
    w.put(p.star_uid);
    w.put_f32(p.x);
    w.put_f32(p.y);
    w.put_f32(p.z);
    w.put_f32(p.abs_mag);
    w.put(p.flags);
  }
  return w.take();
}

inline std::vector<std::uint8_t> encode_stream(const Atlas& atlas, std::span<const std::uint32_t> uids) {
  std::vector<StarPacket> packets;
  packets.reserve(uids.size());
  for (auto uid : uids) packets.push_back(make_packet(atlas, uid));
  return encode_packets(packets);
}

// Throws DataError when the byte length disagrees with the header count.
inline std::vector<StarPacket> decode_packets(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto count = r.get<std::uint32_t>();
  if (r.remaining() != static_cast<std::size_t>(count) * kStarPacketSize) {
    throw DataError("star stream: length does not match record count");
  }
  std::vector<StarPacket> out(count);
  for (auto& p : out) {
    p.star_uid = r.get<std::uint32_t>();
    p.x = r.get_f32();
    p.y = r.get_f32();
    p.z = r.get_f32();
    p.abs_mag = r.get_f32();
    p.flags = r.get<std::uint8_t>();
  }
  return out;
}

}  // namespace seongdo
