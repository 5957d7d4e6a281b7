#pragma once

// Synthetic, seed-deterministic input set: both catalog flavors, a crossref,
// a toy constellation file and a self-consistent residual reference.
//
// Generator contract:
//   - rows are numbered 0..N-1 across the Hipparcos block then the Gaia block;
//     every row with index % 20 == 0 has a non-positive parallax (zero for
//     even multiples of 20, negative otherwise), i.e. ceil(N/20) rows;
//   - every third positive-parallax Hipparcos row gets an HR number, and
//     constellation members are drawn only from those, so every member
//     resolves;
//   - reference.csv repeats each member's catalog coordinates verbatim.
//
// Only std::mt19937_64 raw output is used; its sequence is fixed by the
// standard, unlike the <random> distributions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seongdo/error.hpp"
#include "seongdo/snapshot_io.hpp"
#include "seongdo/text.hpp"

namespace seongdo {

struct FixtureFiles {
  std::string hipparcos;
  std::string gaia;
  std::string crossref;
  std::string constellations;
  std::string reference;
  std::size_t non_positive_parallax = 0;
  std::size_t constellation_count = 0;
  std::size_t member_count = 0;
};

inline constexpr std::size_t kFixtureMaxStars = 10'000'000;

namespace detail {

class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : gen_(seed) {}
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

 private:
  std::mt19937_64 gen_;
};

struct FixtureStar {
  std::string ra, dec, plx, mag;
};

inline FixtureStar fixture_star(FixtureRng& rng, std::size_t row, double mag_lo, double mag_hi) {
  constexpr double kRadToDeg = 57.295779513082320876;
  FixtureStar s;
  s.ra = text::fixed(rng.uniform(0.0, 360.0), 6);
  s.dec = text::fixed(std::asin(rng.uniform(-1.0, 1.0)) * kRadToDeg, 6);
  if (row % 20 == 0) {
    s.plx = (row % 40 == 0) ? "0.0000" : text::fixed(-rng.uniform(0.01, 2.0), 4);
  } else {
    s.plx = text::fixed(std::exp(rng.uniform(0.0, std::log(200.0))), 4);
  }
  s.mag = text::fixed(rng.uniform(mag_lo, mag_hi), 3);
  return s;
}

}  // namespace detail

inline FixtureFiles generate_fixture(std::size_t stars, std::uint64_t seed) {
  if (stars == 0 || stars > kFixtureMaxStars) {
    throw UsageError("--stars must be in 1.." + std::to_string(kFixtureMaxStars));
  }
  detail::FixtureRng rng(seed);
  FixtureFiles out;
  const std::size_t n_hip = (stars + 1) / 2;

  struct Member {
    std::uint32_t hr, hip;
    std::string ra, dec;
  };
  std::vector<Member> pool;

  out.hipparcos = "hip,ra,dec,plx,vmag\n";
  out.crossref = "hr,hip\n";
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n_hip; ++i) {
    const auto s = detail::fixture_star(rng, i, 1.0, 9.0);
    const auto hip = static_cast<std::uint32_t>(i + 1);
    out.hipparcos += std::to_string(hip) + "," + s.ra + "," + s.dec + "," + s.plx + "," + s.mag + "\n";
    if (i % 20 == 0) {
      ++out.non_positive_parallax;
      continue;
    }
    if (positives++ % 3 == 0) {
      const auto hr = static_cast<std::uint32_t>(pool.size() + 1);
      out.crossref += std::to_string(hr) + "," + std::to_string(hip) + "\n";
      pool.push_back({hr, hip, s.ra, s.dec});
    }
  }

  out.gaia = "source_id,ra,dec,parallax,phot_g_mean_mag\n";
  for (std::size_t i = n_hip; i < stars; ++i) {
    const auto s = detail::fixture_star(rng, i, 6.0, 16.0);
    if (i % 20 == 0) ++out.non_positive_parallax;
    out.gaia += std::to_string(6'000'000'000'000'000'000ULL + i) + "," + s.ra + "," + s.dec + "," + s.plx +
                "," + s.mag + "\n";
  }

  const std::size_t per = std::min<std::size_t>(5, pool.size());
  const std::size_t n_const = pool.empty() ? 0 : std::clamp<std::size_t>(pool.size() / 5, 1, 12);
  std::size_t lodges = 0, perpetual = 0, other = 0;
  std::string docs;
  out.reference = "id,ra,dec\n";
  std::vector<bool> referenced(pool.size(), false);
  for (std::size_t c = 0; c < n_const; ++c) {
    // Partial Fisher-Yates over a fresh index list: distinct members.
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    for (std::size_t k = 0; k < per; ++k) std::swap(idx[k], idx[k + rng.below(idx.size() - k)]);

    const auto num = std::to_string(c + 1);
    docs += "---\nkind: constellation\nid: toy-" + num + "\nkorean_name: 시험 " + num +
            "\nromanized_name: Siheom " + num + "\nmeaning: Test figure " + num + "\nclassification: ";
    switch (c % 3) {
      case 0: docs += "{lodge: " + std::to_string(++lodges) + "}\n"; break;
      case 1: ++perpetual; docs += "perpetual_visibility\n"; break;
      default: ++other; docs += "other\n"; break;
    }
    docs += "members:\n";
    for (std::size_t k = 0; k < per; ++k) {
      const Member& m = pool[idx[k]];
      docs += "  - {hr: " + std::to_string(m.hr);
      if (k == 0) docs += ", korean_name: 별 " + num + "-1";
      docs += "}\n";
      if (!referenced[idx[k]]) {
        referenced[idx[k]] = true;
        out.reference += "hip:" + std::to_string(m.hip) + "," + m.ra + "," + m.dec + "\n";
      }
    }
    docs += "edges: [";
    for (std::size_t k = 1; k < per; ++k) {
      docs += (k > 1 ? ", [" : "[") + std::to_string(k - 1) + ", " + std::to_string(k) + "]";
    }
    docs += "]\nlore: Generated figure.\n";
    out.member_count += per;
  }
  out.constellation_count = n_const;
  out.constellations = "kind: manifest\nschema: 1\ntitle: Generated fixture\ndeclared:\n  lunar_lodge: " +
                       std::to_string(lodges) + "\n  perpetual_visibility: " + std::to_string(perpetual) +
                       "\n  other: " + std::to_string(other) + "\n  total: " + std::to_string(n_const) +
                       "\n" + docs;
  return out;
}

inline void write_fixture(const FixtureFiles& f, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto put = [&](const char* name, const std::string& body) {
    write_file_atomically(dir / name, std::vector<std::uint8_t>(body.begin(), body.end()));
  };
  put("hipparcos.csv", f.hipparcos);
  put("gaia.csv", f.gaia);
  put("crossref.csv", f.crossref);
  put("constellations.yaml", f.constellations);
  put("reference.csv", f.reference);
}

}  // namespace seongdo
