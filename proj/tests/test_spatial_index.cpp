#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <map>
#include <random>
#include <set>

#include "support.hpp"

namespace seongdo {
namespace {

std::vector<IndexedStar> random_stars(std::size_t n, std::uint64_t seed, double extent = 500.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> mag(-5.0, 15.0);
  std::vector<IndexedStar> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    IndexedStar s{i * 3 + 7, {pos(rng), pos(rng), pos(rng)}, mag(rng)};
    // Coarse magnitudes force bucket ties; a few coincident positions force distance ties.
    if (i % 4 == 0) s.abs_mag = std::round(s.abs_mag);
    if (i % 97 == 0 && i > 0) s.position = out[i / 2].position;
    out.push_back(s);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

bool inside(const Aabb& b, Vec3 p) {
  return p.x >= b.min.x && p.x <= b.max.x && p.y >= b.min.y && p.y <= b.max.y && p.z >= b.min.z &&
         p.z <= b.max.z;
}

TEST(Octree, EmptyInputRejected) {
  EXPECT_THROW(Octree::build(std::span<const IndexedStar>{}), DataError);
  const IndexedStar bad{0, {std::nan(""), 0, 0}, 1.0};
  EXPECT_THROW(Octree::build(std::span(&bad, 1)), DataError);
  const IndexedStar dup[2] = {{4, {0, 0, 0}, 1}, {4, {1, 1, 1}, 2}};
  EXPECT_THROW(Octree::build(dup), DataError);
}

TEST(Octree, SingleStarIsOneLeaf) {
  const IndexedStar s{42, {1.5, -2.25, 3.0}, 4.0};
  const auto t = Octree::build(std::span(&s, 1));
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_TRUE(t.nodes()[0].is_leaf());
  std::vector<std::vector<std::uint32_t>> leaves;
  t.for_each_leaf([&](auto uids) { leaves.emplace_back(uids.begin(), uids.end()); });
  EXPECT_EQ(leaves, (std::vector<std::vector<std::uint32_t>>{{42}}));
  EXPECT_EQ(t.nearest({100, 100, 100}), 42u);
  EXPECT_EQ(t.lod_select({0, 0, 0}, 5), std::vector<std::uint32_t>{42});
}

TEST(Octree, EightCornersWithCapacityOneGiveDepthOne) {
  std::vector<IndexedStar> stars;
  for (std::uint32_t c = 0; c < 8; ++c) {
    stars.push_back({c, {double(c & 1) * 2, double((c >> 1) & 1) * 2, double((c >> 2) & 1) * 2}, 1.0});
  }
  const auto t = Octree::build(stars, 1);
  EXPECT_EQ(t.depth(), 1);
  EXPECT_EQ(t.nodes()[0].child_mask, 0xFF);
  EXPECT_EQ(t.nodes().size(), 9u);
  // Child index = (x > mid) | (y > mid) << 1 | (z > mid) << 2.
  for (int c = 0; c < 8; ++c) {
    const auto& child = t.nodes()[static_cast<std::size_t>(t.nodes()[0].children[c])];
    ASSERT_EQ(child.count, 1u);
    EXPECT_EQ(t.stars()[t.order()[child.first]].uid, static_cast<std::uint32_t>(c));
  }
}

TEST(Octree, RootIsParsecAlignedCube) {
  const auto stars = random_stars(1000, 1, 37.3);
  const auto t = Octree::build(stars);
  const auto& b = t.root_box();
  const auto e = b.max - b.min;
  EXPECT_EQ(e.x, e.y);
  EXPECT_EQ(e.y, e.z);
  for (double v : {b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z}) EXPECT_EQ(v, std::floor(v));
  for (const auto& s : stars) EXPECT_TRUE(inside(b, s.position));
}

TEST(Octree, BoundaryStarGoesToLowerChild) {
  // Root [0, 2]^3, midpoint 1: a star exactly at the midpoint belongs to child 0.
  const std::vector<IndexedStar> stars{{0, {0, 0, 0}, 1}, {1, {2, 2, 2}, 1}, {2, {1, 1, 1}, 0}};
  const auto t = Octree::build(stars, 1);
  const auto& root = t.nodes()[0];
  const auto& low = t.nodes()[static_cast<std::size_t>(root.children[0])];
  EXPECT_EQ(low.count, 2u);
  EXPECT_EQ(root.children[7] != Octree::kNoChild, true);
  EXPECT_EQ(t.nodes()[static_cast<std::size_t>(root.children[7])].count, 1u);
}

class RandomTree : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    stars_ = new std::vector<IndexedStar>(random_stars(10000, 20240611));
    tree_ = new Octree(Octree::build(*stars_, 16));
  }
  static void TearDownTestSuite() {
    delete tree_;
    delete stars_;
  }
  static const std::vector<IndexedStar>& stars() { return *stars_; }
  static const Octree& tree() { return *tree_; }

 private:
  static inline std::vector<IndexedStar>* stars_ = nullptr;
  static inline Octree* tree_ = nullptr;
};

TEST_F(RandomTree, LeafBucketsPartitionInput) {
  std::multiset<std::uint32_t> seen;
  tree().for_each_leaf([&](auto uids) { seen.insert(uids.begin(), uids.end()); });
  std::multiset<std::uint32_t> want;
  for (const auto& s : stars()) want.insert(s.uid);
  EXPECT_EQ(seen, want);
  std::set<std::uint32_t> unique(seen.begin(), seen.end());
  EXPECT_EQ(unique.size(), seen.size());
}

TEST_F(RandomTree, NodeBoxesContainDescendantsAndBucketsAreRanked) {
  const auto& t = tree();
  for (const auto& n : t.nodes()) {
    for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
      ASSERT_TRUE(inside(n.box, t.stars()[t.order()[i]].position));
    }
    if (n.is_leaf()) {
      ASSERT_TRUE(n.count <= t.leaf_capacity() || n.depth == Octree::kMaxDepth);
      for (std::uint32_t i = n.first + 1; i < n.first + n.count; ++i) {
        const auto& a = t.stars()[t.order()[i - 1]];
        const auto& b = t.stars()[t.order()[i]];
        ASSERT_TRUE(a.abs_mag < b.abs_mag || (a.abs_mag == b.abs_mag && a.uid < b.uid));
      }
    } else {
      std::uint32_t sum = 0;
      for (auto c : n.children) {
        if (c == Octree::kNoChild) continue;
        const auto& cn = t.nodes()[static_cast<std::size_t>(c)];
        ASSERT_TRUE(n.box.contains(cn.box));
        sum += cn.count;
      }
      ASSERT_EQ(sum, n.count);
    }
  }
}

TEST_F(RandomTree, BuildIndependentOfInputOrder) {
  auto shuffled = stars();
  std::reverse(shuffled.begin(), shuffled.end());
  const auto other = Octree::build(shuffled, 16);
  std::vector<std::vector<std::uint32_t>> a, b;
  tree().for_each_leaf([&](auto u) { a.emplace_back(u.begin(), u.end()); });
  other.for_each_leaf([&](auto u) { b.emplace_back(u.begin(), u.end()); });
  EXPECT_EQ(a, b);
  EXPECT_EQ(tree().lod_select({10, 20, 30}, 777), other.lod_select({10, 20, 30}, 777));
}

TEST_F(RandomTree, AabbMatchesLinearScan) {
  const auto& t = tree();
  EXPECT_EQ(t.query_aabb(t.root_box()).size(), stars().size());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-520.0, 520.0);
  std::uniform_int_distribution<std::size_t> pick(0, stars().size() - 1);
  for (int q = 0; q < 1000; ++q) {
    Aabb box;
    if (q % 10 == 0) {
      // Faces through existing stars exercise the closed boundary.
      const auto a = stars()[pick(rng)].position, b = stars()[pick(rng)].position;
      box = {{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)},
             {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}};
    } else {
      const Vec3 a{pos(rng), pos(rng), pos(rng)}, b{pos(rng), pos(rng), pos(rng)};
      box = {{std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)},
             {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)}};
    }
    std::vector<std::uint32_t> want;
    for (const auto& s : stars()) {
      if (inside(box, s.position)) want.push_back(s.uid);
    }
    std::sort(want.begin(), want.end());
    ASSERT_EQ(t.query_aabb(box), want) << q;
  }
}

TEST_F(RandomTree, ZeroVolumeBoxAtStar) {
  const auto& s = stars()[123];
  const auto got = tree().query_aabb({s.position, s.position});
  EXPECT_NE(std::find(got.begin(), got.end(), s.uid), got.end());
}

std::uint32_t scan_nearest(const std::vector<IndexedStar>& stars, Vec3 p) {
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t uid = 0;
  for (const auto& s : stars) {
    const Vec3 d = s.position - p;
    const double d2 = d.x * d.x + d.y * d.y + d.z * d.z;
    if (d2 < best || (d2 == best && s.uid < uid)) {
      best = d2;
      uid = s.uid;
    }
  }
  return uid;
}

TEST_F(RandomTree, NearestMatchesLinearScan) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(-700.0, 700.0);
  for (int q = 0; q < 1000; ++q) {
    const Vec3 p = q % 5 == 0 ? stars()[static_cast<std::size_t>(q) * 7].position : Vec3{pos(rng), pos(rng), pos(rng)};
    ASSERT_EQ(tree().nearest(p), scan_nearest(stars(), p)) << q;
  }
}

TEST(Nearest, ExactPositionAndTieRule) {
  const std::vector<IndexedStar> stars{{9, {1, 0, 0}, 1}, {3, {-1, 0, 0}, 1}, {5, {4, 4, 4}, 1}};
  const auto t = Octree::build(stars, 1);
  EXPECT_EQ(t.nearest({4, 4, 4}), 5u);
  EXPECT_EQ(t.nearest({0, 0, 0}), 3u);  // equidistant from 9 and 3
}

std::optional<PickHit> scan_pick(const std::vector<IndexedStar>& stars, Vec3 eye, Vec3 dir, double max_deg) {
  std::optional<PickHit> best;
  for (const auto& s : stars) {
    const Vec3 v = s.position - eye;
    if (v.x == 0 && v.y == 0 && v.z == 0) continue;
    const double a = angle_between(v, dir) * kRadToDeg;
    if (a > max_deg) continue;
    if (!best || a < best->angle_deg || (a == best->angle_deg && s.uid < best->uid)) best = PickHit{s.uid, a};
  }
  return best;
}

Vec3 unit(Vec3 v) { return (1.0 / norm(v)) * v; }

TEST_F(RandomTree, PickMatchesAngularScan) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-600.0, 600.0);
  std::uniform_real_distribution<double> jitter(-0.03, 0.03);
  std::uniform_real_distribution<double> cone(0.05, 4.0);
  std::uniform_int_distribution<std::size_t> pick(0, stars().size() - 1);
  int hits = 0;
  for (int q = 0; q < 1000; ++q) {
    const Vec3 eye = q % 3 == 0 ? Vec3{0, 0, 0} : Vec3{pos(rng), pos(rng), pos(rng)};
    Vec3 dir = q % 4 == 0 ? Vec3{pos(rng), pos(rng), pos(rng)} : stars()[pick(rng)].position - eye;
    dir = unit(unit(dir) + Vec3{jitter(rng), jitter(rng), jitter(rng)});
    const double max_deg = cone(rng);
    const auto got = tree().pick_by_direction(eye, dir, max_deg);
    const auto want = scan_pick(stars(), eye, dir, max_deg);
    ASSERT_EQ(got.has_value(), want.has_value()) << q;
    if (got) {
      ++hits;
      ASSERT_EQ(got->uid, want->uid) << q;
      ASSERT_EQ(got->angle_deg, want->angle_deg) << q;
    }
  }
  EXPECT_GT(hits, 300);
  EXPECT_LT(hits, 1000);
}

TEST_F(RandomTree, PickSubsetRestrictsCandidates) {
  std::vector<std::uint32_t> subset;
  std::vector<IndexedStar> sub_stars;
  for (std::size_t i = 0; i < stars().size(); i += 50) {
    subset.push_back(stars()[i].uid);
    sub_stars.push_back(stars()[i]);
  }
  subset.push_back(999999999);  // unknown uids are ignored
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(-600.0, 600.0);
  for (int q = 0; q < 200; ++q) {
    const Vec3 eye{pos(rng), pos(rng), pos(rng)};
    const Vec3 dir = unit(sub_stars[static_cast<std::size_t>(q) % sub_stars.size()].position - eye);
    const auto got = tree().pick_by_direction(eye, dir, 2.0, std::span<const std::uint32_t>(subset));
    const auto want = scan_pick(sub_stars, eye, dir, 2.0);
    ASSERT_TRUE(got && want);
    ASSERT_EQ(got->uid, want->uid);
  }
}

TEST(Pick, DirectHitMissAndDomain) {
  const std::vector<IndexedStar> stars{{1, {10, 0, 0}, 1}, {2, {0, 10, 0}, 1}, {3, {0, 0, 0}, 1}};
  const auto t = Octree::build(stars);
  const auto hit = t.pick_by_direction({0, 0, 0}, {1, 0, 0}, 1.0);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->uid, 1u);
  EXPECT_EQ(hit->angle_deg, 0.0);
  EXPECT_FALSE(t.pick_by_direction({0, 0, 0}, {0, 0, 1}, 1.0));
  EXPECT_FALSE(t.pick_by_direction({0, 0, 0}, unit({1, 1, 0}), 44.0));
  // Both at 45 degrees: the smaller uid wins.
  EXPECT_EQ(t.pick_by_direction({0, 0, 0}, unit({1, 1, 0}), 45.0 + 1e-9)->uid, 1u);
  EXPECT_THROW(t.pick_by_direction({0, 0, 0}, {1.0 + 1e-6, 0, 0}, 1.0), DomainError);
  EXPECT_NO_THROW(t.pick_by_direction({0, 0, 0}, {1.0 + 5e-10, 0, 0}, 1.0));
  EXPECT_THROW(t.pick_by_direction({0, 0, 0}, {1, 0, 0}, -1.0), DomainError);
}

// Leaf membership recomputed by descending the child formula from the root.
std::map<std::int32_t, std::vector<IndexedStar>> leaf_oracle(const Octree& t, const std::vector<IndexedStar>& stars) {
  std::map<std::int32_t, std::vector<IndexedStar>> out;
  for (const auto& s : stars) {
    std::int32_t idx = 0;
    while (!t.nodes()[static_cast<std::size_t>(idx)].is_leaf()) {
      const auto& n = t.nodes()[static_cast<std::size_t>(idx)];
      const Vec3 m = n.box.center();
      const int c = (s.position.x > m.x) | (s.position.y > m.y) << 1 | (s.position.z > m.z) << 2;
      idx = n.children[static_cast<std::size_t>(c)];
      EXPECT_NE(idx, Octree::kNoChild);
    }
    out[idx].push_back(s);
  }
  for (auto& [idx, v] : out) {
    std::sort(v.begin(), v.end(), [](const IndexedStar& a, const IndexedStar& b) {
      return a.abs_mag < b.abs_mag || (a.abs_mag == b.abs_mag && a.uid < b.uid);
    });
  }
  return out;
}

TEST_F(RandomTree, LodPerLeafPrefix) {
  const auto leaves = leaf_oracle(tree(), stars());
  std::uint32_t brightest = 0;
  double bmag = std::numeric_limits<double>::infinity();
  for (const auto& s : stars()) {
    if (s.abs_mag < bmag || (s.abs_mag == bmag && s.uid < brightest)) {
      bmag = s.abs_mag;
      brightest = s.uid;
    }
  }
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pos(-800.0, 800.0);
  std::uniform_int_distribution<std::size_t> budget(1, stars().size());
  for (int q = 0; q < 1000; ++q) {
    const Vec3 eye{pos(rng), pos(rng), pos(rng)};
    const std::size_t b = q == 0 ? stars().size() / 10 : budget(rng);
    const auto got = tree().lod_select(eye, b);
    ASSERT_EQ(got.size(), std::min(b, stars().size()));
    const std::set<std::uint32_t> chosen(got.begin(), got.end());
    ASSERT_EQ(chosen.size(), got.size());
    ASSERT_TRUE(chosen.contains(brightest));
    for (const auto& [idx, bucket] : leaves) {
      std::size_t k = 0;
      while (k < bucket.size() && chosen.contains(bucket[k].uid)) ++k;
      for (std::size_t i = k; i < bucket.size(); ++i) ASSERT_FALSE(chosen.contains(bucket[i].uid)) << q;
    }
  }
}

TEST_F(RandomTree, LodSaturationEmptyAndDeterminism) {
  EXPECT_TRUE(tree().lod_select({0, 0, 0}, 0).empty());
  const auto all = tree().lod_select({0, 0, 0}, stars().size() + 5);
  std::set<std::uint32_t> s(all.begin(), all.end());
  EXPECT_EQ(s.size(), stars().size());
  EXPECT_EQ(tree().lod_select({3, 4, 5}, 1234), tree().lod_select({3, 4, 5}, 1234));
}

// Two equal clusters; the one near the eye must get the larger share.
TEST(Lod, NearerClusterGetsLargerShare) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_real_distribution<double> mag(0.0, 10.0);
  std::vector<IndexedStar> stars;
  for (std::uint32_t i = 0; i < 2000; ++i) {
    const double off = i < 1000 ? 0.0 : 1000.0;
    stars.push_back({i, {off + u(rng), u(rng), u(rng)}, mag(rng)});
  }
  const auto t = Octree::build(stars, 8);
  std::size_t prev = 0;
  for (double ex : {5.0, 200.0, 400.0}) {
    const auto got = t.lod_select({ex, 5, 5}, 200);
    const auto near = static_cast<std::size_t>(std::count_if(got.begin(), got.end(), [](auto v) { return v < 1000; }));
    EXPECT_GT(near, 200 - near) << ex;
    // Share shrinks as the eye moves away.
    if (prev) {
      EXPECT_LE(near, prev) << ex;
    }
    prev = near;
  }
  const auto mid = t.lod_select({505, 5, 5}, 200);
  const auto near_mid = std::count_if(mid.begin(), mid.end(), [](auto v) { return v < 1000; });
  EXPECT_NEAR(static_cast<double>(near_mid), 100.0, 2.0);
}

TEST(Lod, SolidAngleShrinksWithDistance) {
  const Aabb box{{-1, -1, -1}, {1, 1, 1}};
  EXPECT_EQ(Octree::solid_angle(box, {0, 0, 0}), 4.0 * std::numbers::pi);
  double prev = 4.0 * std::numbers::pi;
  for (double d = 2.0; d < 1e6; d *= 1.7) {
    const double w = Octree::solid_angle(box, {d, 0, 0});
    EXPECT_LT(w, prev);
    EXPECT_GT(w, 0.0);
    prev = w;
  }
  // Cap of half-angle a: 2 pi (1 - cos a), sin a = sqrt(3)/10.
  const double s = std::sqrt(3.0) / 10.0;
  EXPECT_NEAR(Octree::solid_angle(box, {10, 0, 0}), 2 * std::numbers::pi * (1 - std::sqrt(1 - s * s)), 1e-15);
}

TEST(Octree, StarsAtOnePointStopAtMaxDepth) {
  std::vector<IndexedStar> stars;
  for (std::uint32_t i = 0; i < 10; ++i) stars.push_back({i, {0.25, 0.25, 0.25}, double(10 - i)});
  const auto t = Octree::build(stars, 2);
  EXPECT_LE(t.depth(), Octree::kMaxDepth);
  EXPECT_EQ(t.nearest({0.25, 0.25, 0.25}), 0u);
  EXPECT_EQ(t.lod_select({0, 0, 0}, 3), (std::vector<std::uint32_t>{9, 8, 7}));
}

TEST(Benchmark, NearestIndexBeatsScanOnTwoMillion) {
  const auto stars = random_stars(2'000'000, 11, 5000.0);
  const auto t = Octree::build(stars);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> pos(-5000.0, 5000.0);
  std::vector<Vec3> queries;
  for (int i = 0; i < 20; ++i) queries.push_back({pos(rng), pos(rng), pos(rng)});

  using Clock = std::chrono::steady_clock;
  std::vector<std::uint32_t> a, b;
  const auto t0 = Clock::now();
  for (const auto& q : queries) a.push_back(t.nearest(q));
  const auto t1 = Clock::now();
  for (const auto& q : queries) b.push_back(scan_nearest(stars, q));
  const auto t2 = Clock::now();
  EXPECT_EQ(a, b);
  const auto index_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  const auto scan_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count();
  RecordProperty("index_ns", std::to_string(index_ns));
  RecordProperty("scan_ns", std::to_string(scan_ns));
  std::printf("nearest x20 on 2M stars: index %.3f ms, scan %.3f ms\n", index_ns / 1e6, scan_ns / 1e6);
  EXPECT_LT(index_ns, scan_ns);
}

}  // namespace
}  // namespace seongdo
