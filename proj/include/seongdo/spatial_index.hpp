#pragma once

// Immutable octree over star positions.
//
// Every node owns a contiguous range of `order()`; a node's range is the
// concatenation of its children's ranges in child-index order, so subtree
// membership is a slice. Leaf ranges are the magnitude buckets, sorted
// brightest first (ascending absolute magnitude, ties by smaller uid).
//
// Child index of a point p in a node with centre m:
//     (p.x > m.x) | (p.y > m.y) << 1 | (p.z > m.z) << 2
// so a point exactly on a split plane goes to the lower-index child. Boxes
// are closed on both ends.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "seongdo/astrometry.hpp"
#include "seongdo/error.hpp"

namespace seongdo {

struct Aabb {
  Vec3 min;
  Vec3 max;

  bool contains(Vec3 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z &&
           p.z <= max.z;
  }
  bool contains(const Aabb& o) const { return contains(o.min) && contains(o.max); }
  bool intersects(const Aabb& o) const {
    return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y &&
           min.z <= o.max.z && o.min.z <= max.z;
  }
  Vec3 center() const { return 0.5 * (min + max); }
  double half_diagonal() const { return 0.5 * norm(max - min); }

  // Squared distance from p to the closest point of the box (0 inside).
  double squared_distance_to(Vec3 p) const {
    auto axis = [](double v, double lo, double hi) {
      if (v < lo) return lo - v;
      if (v > hi) return v - hi;
      return 0.0;
    };
    const double dx = axis(p.x, min.x, max.x);
    const double dy = axis(p.y, min.y, max.y);
    const double dz = axis(p.z, min.z, max.z);
    return dx * dx + dy * dy + dz * dz;
  }

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

struct IndexedStar {
  std::uint32_t uid = 0;
  Vec3 position;
  double abs_mag = 0.0;
};

struct PickHit {
  std::uint32_t uid = 0;
  double angle_deg = 0.0;
};

inline constexpr std::size_t kDefaultLeafCapacity = 64;
inline constexpr double kDefaultPickAngleDeg = 1.5;

class Octree {
 public:
  static constexpr int kMaxDepth = 24;
  static constexpr std::int32_t kNoChild = -1;

  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // slice of order()
    std::uint32_t count = 0;
    std::array<std::int32_t, 8> children{kNoChild, kNoChild, kNoChild, kNoChild,
                                         kNoChild, kNoChild, kNoChild, kNoChild};
    std::uint8_t child_mask = 0;
    std::uint8_t depth = 0;
    std::uint32_t brightest = 0;  // index into stars() of the subtree's brightest star

    bool is_leaf() const { return child_mask == 0; }
  };

  // Throws DataError on empty input or non-finite coordinates.
  static Octree build(std::span<const IndexedStar> stars,
                      std::size_t leaf_capacity = kDefaultLeafCapacity) {
    if (stars.empty()) throw DataError("octree: cannot index an empty star set");
    if (leaf_capacity == 0) throw DataError("octree: leaf capacity must be at least 1");
    Octree t;
    t.leaf_capacity_ = leaf_capacity;
    t.stars_.assign(stars.begin(), stars.end());
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi = -1.0 * lo;
    for (const auto& s : t.stars_) {
      const auto& p = s.position;
      if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
          !std::isfinite(s.abs_mag)) {
        throw DataError("octree: star " + std::to_string(s.uid) + " has non-finite data");
      }
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
      t.slot_of_uid_.emplace(s.uid, static_cast<std::uint32_t>(&s - t.stars_.data()));
    }
    if (t.slot_of_uid_.size() != t.stars_.size()) throw DataError("octree: duplicate star uid");

    // Parsec-aligned cube.
    const Vec3 base{std::floor(lo.x), std::floor(lo.y), std::floor(lo.z)};
    double edge = std::max({std::ceil(hi.x) - base.x, std::ceil(hi.y) - base.y,
                            std::ceil(hi.z) - base.z, 1.0});
    const Aabb root{base, base + Vec3{edge, edge, edge}};

    t.order_.resize(t.stars_.size());
    for (std::uint32_t i = 0; i < t.order_.size(); ++i) t.order_[i] = i;
    std::vector<std::uint32_t> scratch(t.order_.size());
    t.build_node(root, 0, static_cast<std::uint32_t>(t.order_.size()), 0, scratch);
    return t;
  }

  std::size_t size() const { return stars_.size(); }
  std::size_t leaf_capacity() const { return leaf_capacity_; }
  const Aabb& root_box() const { return nodes_.front().box; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<IndexedStar>& stars() const { return stars_; }
  const std::vector<std::uint32_t>& order() const { return order_; }

  int depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max<int>(d, n.depth);
    return d;
  }

  const IndexedStar* find(std::uint32_t uid) const {
    const auto it = slot_of_uid_.find(uid);
    return it == slot_of_uid_.end() ? nullptr : &stars_[it->second];
  }

  // Calls fn(span of uids) for every leaf bucket, brightest first.
  template <typename Fn>
  void for_each_leaf(Fn&& fn) const {
    std::vector<std::uint32_t> uids;
    for (const auto& n : nodes_) {
      if (!n.is_leaf()) continue;
      uids.clear();
      for (std::uint32_t i = n.first; i < n.first + n.count; ++i) uids.push_back(stars_[order_[i]].uid);
      fn(std::span<const std::uint32_t>(uids));
    }
  }

  // Stars inside the closed box, ascending uid.
  std::vector<std::uint32_t> query_aabb(const Aabb& box) const {
    std::vector<std::uint32_t> out;
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
      const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (!n.box.intersects(box)) continue;
      if (box.contains(n.box)) {
        append_range(n, out);
        continue;
      }
      if (n.is_leaf()) {
        for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
          const auto& s = stars_[order_[i]];
          if (box.contains(s.position)) out.push_back(s.uid);
        }
        continue;
      }
      for (auto c : n.children) {
        if (c != kNoChild) stack.push_back(c);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Star closest to `point` (Euclidean); ties go to the smaller uid.
  std::uint32_t nearest(Vec3 point) const {
    using Entry = std::pair<double, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    open.emplace(nodes_.front().box.squared_distance_to(point), 0);
    double best_d2 = std::numeric_limits<double>::infinity();
    std::uint32_t best_uid = 0;
    while (!open.empty()) {
      const auto [bound, idx] = open.top();
      open.pop();
      // Equal bound may still hide a tie with a smaller uid.
      if (bound > best_d2) break;
      const Node& n = nodes_[static_cast<std::size_t>(idx)];
      if (n.is_leaf()) {
        for (std::uint32_t i = n.first; i < n.first + n.count; ++i) {
          const auto& s = stars_[order_[i]];
          const double d2 = squared_distance(s.position, point);
          if (d2 < best_d2 || (d2 == best_d2 && s.uid < best_uid)) {
            best_d2 = d2;
            best_uid = s.uid;
          }
        }
        continue;
      }
      for (auto c : n.children) {
        if (c == kNoChild) continue;
        const double b = nodes_[static_cast<std::size_t>(c)].box.squared_distance_to(point);
        if (b <= best_d2) open.emplace(b, c);
      }
    }
    return best_uid;
  }

  // Star with the smallest angular offset from `dir` as seen from `eye`,
  // among those within `max_angle_deg`; ties go to the smaller uid. Stars at
  // the eye position have no direction and are never picked. When `subset`
  // is given only those uids are candidates (unknown uids are ignored).
  std::optional<PickHit> pick_by_direction(
      Vec3 eye, Vec3 dir, double max_angle_deg,
      std::optional<std::span<const std::uint32_t>> subset = std::nullopt) const {
    if (!(std::abs(norm(dir) - 1.0) <= 1e-9)) {
      throw DomainError("pick_by_direction: direction must be a unit vector");
    }
    if (!(max_angle_deg >= 0.0)) throw DomainError("pick_by_direction: max_angle must be >= 0");
    const double limit = max_angle_deg * kDegToRad;
    double best = std::numeric_limits<double>::infinity();
    std::optional<std::uint32_t> best_uid;
    auto consider = [&](const IndexedStar& s) {
      const Vec3 v = s.position - eye;
      if (v.x == 0.0 && v.y == 0.0 && v.z == 0.0) return;
      const double a = angle_between(v, dir);
      if (a > limit) return;
      if (a < best || (a == best && s.uid < *best_uid)) {
        best = a;
        best_uid = s.uid;
      }
    };
    if (subset) {
      for (auto uid : *subset) {
        if (const auto* s = find(uid)) consider(*s);
      }
    } else {
      constexpr double kSlack = 1e-9;  // keeps the cone test conservative under rounding
      std::vector<std::int32_t> stack{0};
      while (!stack.empty()) {
        const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        const Vec3 c = n.box.center();
        const double r = n.box.half_diagonal();
        const Vec3 w = c - eye;
        const double dw = norm(w);
        if (dw > r) {
          const double lower = angle_between(w, dir) - std::asin(std::min(1.0, r / dw));
          if (lower > std::min(limit, best) + kSlack) continue;
        }
        if (n.is_leaf()) {
          for (std::uint32_t i = n.first; i < n.first + n.count; ++i) consider(stars_[order_[i]]);
          continue;
        }
        for (auto ci : n.children) {
          if (ci != kNoChild) stack.push_back(ci);
        }
      }
    }
    if (!best_uid) return std::nullopt;
    return PickHit{*best_uid, best * kRadToDeg};
  }

  // Brightness-ranked subset of at most `budget` stars for a viewer at `eye`.
  //
  // The budget is split top-down. A node that can afford its whole subtree
  // takes it; otherwise one slot goes to the child holding the node's
  // brightest star and the rest is shared among children in proportion to
  // the solid angle of their bounding spheres seen from `eye`, capped at each
  // child's size, leftovers going to the widest children (ties: lower child
  // index). A leaf with budget b returns the first b entries of its bucket.
  // The result is always exactly min(budget, size()) stars, in traversal
  // order, and always contains the brightest star when budget >= 1.
  std::vector<std::uint32_t> lod_select(Vec3 eye, std::size_t budget) const {
    std::vector<std::uint32_t> out;
    out.reserve(std::min(budget, stars_.size()));
    lod_node(0, eye, budget, out);
    return out;
  }

  static double solid_angle(const Aabb& box, Vec3 eye) {
    constexpr double kFourPi = 4.0 * std::numbers::pi;
    const double r = box.half_diagonal();
    const double d = norm(box.center() - eye);
    if (d <= r) return kFourPi;
    const double s = r / d;
    // 2 pi (1 - cos a) with sin a = s, written to avoid cancellation.
    return 2.0 * std::numbers::pi * (s * s) / (1.0 + std::sqrt(1.0 - s * s));
  }

 private:
  Octree() = default;

  bool brighter(std::uint32_t a, std::uint32_t b) const {
    const auto& sa = stars_[a];
    const auto& sb = stars_[b];
    if (sa.abs_mag != sb.abs_mag) return sa.abs_mag < sb.abs_mag;
    return sa.uid < sb.uid;
  }

  void append_range(const Node& n, std::vector<std::uint32_t>& out) const {
    for (std::uint32_t i = n.first; i < n.first + n.count; ++i) out.push_back(stars_[order_[i]].uid);
  }

  std::int32_t build_node(const Aabb& box, std::uint32_t first, std::uint32_t count, int depth,
                          std::vector<std::uint32_t>& scratch) {
    const auto idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{});
    nodes_.back().box = box;
    nodes_.back().first = first;
    nodes_.back().count = count;
    nodes_.back().depth = static_cast<std::uint8_t>(depth);

    const auto begin = order_.begin() + first;
    const auto end = begin + count;
    const bool coincident = std::all_of(begin, end, [&](std::uint32_t i) {
      return stars_[i].position == stars_[*begin].position;
    });
    if (count <= leaf_capacity_ || depth >= kMaxDepth || coincident) {
      std::sort(begin, end, [&](std::uint32_t a, std::uint32_t b) { return brighter(a, b); });
      nodes_[static_cast<std::size_t>(idx)].brightest = *begin;
      return idx;
    }

    // Stable counting sort of the slice by child index.
    const Vec3 mid = box.center();
    auto child_of = [&](std::uint32_t i) {
      const Vec3& p = stars_[i].position;
      return (p.x > mid.x ? 1 : 0) | (p.y > mid.y ? 2 : 0) | (p.z > mid.z ? 4 : 0);
    };
    std::array<std::uint32_t, 9> offsets{};
    for (auto it = begin; it != end; ++it) ++offsets[static_cast<std::size_t>(child_of(*it)) + 1];
    for (std::size_t c = 1; c < offsets.size(); ++c) offsets[c] += offsets[c - 1];
    const std::array<std::uint32_t, 9> starts = offsets;
    for (auto it = begin; it != end; ++it) scratch[offsets[static_cast<std::size_t>(child_of(*it))]++] = *it;
    std::copy(scratch.begin(), scratch.begin() + count, begin);

    std::uint32_t brightest = order_[first];
    for (int c = 0; c < 8; ++c) {
      const std::uint32_t n = starts[static_cast<std::size_t>(c) + 1] - starts[static_cast<std::size_t>(c)];
      if (n == 0) continue;
      Aabb cb;
      cb.min = {(c & 1) ? mid.x : box.min.x, (c & 2) ? mid.y : box.min.y, (c & 4) ? mid.z : box.min.z};
      cb.max = {(c & 1) ? box.max.x : mid.x, (c & 2) ? box.max.y : mid.y, (c & 4) ? box.max.z : mid.z};
      const auto child = build_node(cb, first + starts[static_cast<std::size_t>(c)], n, depth + 1, scratch);
      const std::uint32_t cb_brightest = nodes_[static_cast<std::size_t>(child)].brightest;
      if (brighter(cb_brightest, brightest)) brightest = cb_brightest;
      Node& self = nodes_[static_cast<std::size_t>(idx)];
      self.children[static_cast<std::size_t>(c)] = child;
      self.child_mask = static_cast<std::uint8_t>(self.child_mask | (1u << c));
    }
    nodes_[static_cast<std::size_t>(idx)].brightest = brightest;
    return idx;
  }

  void lod_node(std::int32_t idx, Vec3 eye, std::size_t budget, std::vector<std::uint32_t>& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    if (budget == 0) return;
    if (budget >= n.count) {
      append_range(n, out);
      return;
    }
    if (n.is_leaf()) {
      for (std::uint32_t i = n.first; i < n.first + budget; ++i) out.push_back(stars_[order_[i]].uid);
      return;
    }

    struct Share {
      std::int32_t node;
      std::size_t capacity;
      double weight;
      std::size_t alloc;
      int child;
    };
    std::vector<Share> shares;
    for (int c = 0; c < 8; ++c) {
      const auto ci = n.children[static_cast<std::size_t>(c)];
      if (ci == kNoChild) continue;
      const Node& cn = nodes_[static_cast<std::size_t>(ci)];
      shares.push_back({ci, cn.count, solid_angle(cn.box, eye), 0, c});
      if (cn.brightest == n.brightest) shares.back().alloc = 1;
    }
    std::size_t remaining = budget - 1;
    while (remaining > 0) {
      double total_weight = 0.0;
      for (const auto& s : shares) {
        if (s.alloc < s.capacity) total_weight += s.weight;
      }
      const bool uniform = !(total_weight > 0.0);
      std::size_t active = 0;
      for (const auto& s : shares) active += s.alloc < s.capacity ? 1 : 0;
      std::size_t given = 0;
      for (auto& s : shares) {
        if (s.alloc >= s.capacity) continue;
        const double frac = uniform ? 1.0 / static_cast<double>(active) : s.weight / total_weight;
        auto q = static_cast<std::size_t>(std::floor(static_cast<double>(remaining) * frac));
        q = std::min({q, s.capacity - s.alloc, remaining - given});
        s.alloc += q;
        given += q;
      }
      remaining -= given;
      if (given > 0) continue;
      std::vector<Share*> open;
      for (auto& s : shares) {
        if (s.alloc < s.capacity) open.push_back(&s);
      }
      std::stable_sort(open.begin(), open.end(),
                       [](const Share* a, const Share* b) { return a->weight > b->weight; });
      for (Share* s : open) {
        if (remaining == 0) break;
        ++s->alloc;
        --remaining;
      }
    }
    for (const auto& s : shares) lod_node(s.node, eye, s.alloc, out);
  }

  std::size_t leaf_capacity_ = kDefaultLeafCapacity;
  std::vector<IndexedStar> stars_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::unordered_map<std::uint32_t, std::uint32_t> slot_of_uid_;
};

}  // namespace seongdo
