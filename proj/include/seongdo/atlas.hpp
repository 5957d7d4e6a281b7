#pragma once

// Fused star records, identity resolution and the atlas snapshot.
//
// Fusion order defines star_uid: accepted Gaia-like rows in file order, then
// Hipparcos-like rows whose HIP id no Gaia-like row carries, in file order.
// Resolution of a curated member follows HR -> HIP (crossref) -> fused star,
// which is the Gaia-like row when one carries that HIP and the
// Hipparcos-like row otherwise.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "seongdo/astrometry.hpp"
#include "seongdo/constellation.hpp"
#include "seongdo/ingest.hpp"
#include "seongdo/spatial_index.hpp"
#include "seongdo/text.hpp"

namespace seongdo {

struct StarRecord {
  std::uint32_t star_uid = 0;
  std::optional<std::uint32_t> hip_id;
  std::optional<std::uint32_t> yale_hr_id;
  CatalogFormat source_catalog = CatalogFormat::kHipparcosLike;
  std::uint64_t source_id = 0;
  SphericalPos spherical;
  CartesianPos cartesian;
  Magnitudes magnitudes;
  std::optional<std::string> korean_name;
  std::optional<std::string> romanized_name;
  std::optional<std::string> western_name;

  friend bool operator==(const StarRecord&, const StarRecord&) = default;
};

// Korean name first, then the Western name, then the catalog id.
inline std::string display_name(const StarRecord& s) {
  if (s.korean_name && !s.korean_name->empty()) return *s.korean_name;
  if (s.western_name && !s.western_name->empty()) return *s.western_name;
  if (s.hip_id) return "HIP " + std::to_string(*s.hip_id);
  return "Gaia " + std::to_string(s.source_id);
}

inline StarRecord make_star(std::uint32_t uid, const RawCatalogRow& row) {
  StarRecord s;
  s.star_uid = uid;
  s.hip_id = row.hip_id;
  s.source_catalog = row.source_catalog;
  s.source_id = row.source_id;
  s.spherical = {row.ra_deg, row.dec_deg, row.parallax_mas.value()};
  s.cartesian = spherical_to_cartesian(s.spherical);
  s.magnitudes = magnitudes_at(row.apparent_mag, parallax_to_distance(*row.parallax_mas));
  return s;
}

using StarEdge = std::pair<std::uint32_t, std::uint32_t>;

struct Constellation {
  std::string const_id;
  std::string korean_name;
  std::string romanized_name;
  std::string meaning;
  Classification classification;
  std::vector<std::uint32_t> member_uids;
  std::vector<StarEdge> edges;
  std::string lore;
  std::optional<std::string> western_note;

  friend bool operator==(const Constellation&, const Constellation&) = default;
};

// Sorted key/value metadata: source digests, counts, timestamp.
using BuildMeta = std::map<std::string, std::string>;

struct AtlasSnapshot {
  std::vector<StarRecord> stars;
  std::vector<Constellation> constellations;
  BuildMeta build_meta;

  friend bool operator==(const AtlasSnapshot&, const AtlasSnapshot&) = default;
};

// Output of catalog fusion: all stars that survive filtering, with uids.
class FusedCatalog {
 public:
  FusedCatalog() = default;

  static FusedCatalog fuse(const FilterResult& gaia, const FilterResult& hip,
                           const CrossRefTable& crossrefs) {
    FusedCatalog f;
    for (const auto& row : gaia.rows) {
      const auto uid = static_cast<std::uint32_t>(f.stars_.size());
      StarRecord s = make_star(uid, row);
      if (s.hip_id && !f.by_hip_.emplace(*s.hip_id, uid).second) {
        ++f.duplicate_hip_links_;
        s.hip_id.reset();
      }
      f.stars_.push_back(std::move(s));
    }
    f.gaia_count_ = f.stars_.size();
    for (const auto& row : hip.rows) {
      if (f.by_hip_.contains(*row.hip_id)) {
        ++f.superseded_;
        continue;
      }
      const auto uid = static_cast<std::uint32_t>(f.stars_.size());
      f.by_hip_.emplace(*row.hip_id, uid);
      f.stars_.push_back(make_star(uid, row));
    }
    for (auto& s : f.stars_) {
      if (s.hip_id) s.yale_hr_id = crossrefs.hr_for(*s.hip_id);
    }
    for (auto id : gaia.removed_hip_ids) f.filtered_hips_.insert(id);
    for (auto id : hip.removed_hip_ids) f.filtered_hips_.insert(id);
    return f;
  }

  const std::vector<StarRecord>& stars() const { return stars_; }
  std::vector<StarRecord>& stars() { return stars_; }
  const StarRecord* find_hip(std::uint32_t hip) const {
    const auto it = by_hip_.find(hip);
    return it == by_hip_.end() ? nullptr : &stars_[it->second];
  }
  bool was_filtered(std::uint32_t hip) const { return filtered_hips_.contains(hip); }

  std::size_t gaia_count() const { return gaia_count_; }
  std::size_t hipparcos_count() const { return stars_.size() - gaia_count_; }
  // Hipparcos rows dropped because a Gaia row carries the same HIP.
  std::size_t superseded() const { return superseded_; }
  std::size_t duplicate_hip_links() const { return duplicate_hip_links_; }

 private:
  std::vector<StarRecord> stars_;
  std::unordered_map<std::uint32_t, std::uint32_t> by_hip_;
  std::unordered_set<std::uint32_t> filtered_hips_;
  std::size_t gaia_count_ = 0;
  std::size_t superseded_ = 0;
  std::size_t duplicate_hip_links_ = 0;
};

enum class UnresolvedReason : std::uint8_t { kNoCrossref, kNoCatalogRow, kFilteredByParallax };

inline const char* to_string(UnresolvedReason r) {
  switch (r) {
    case UnresolvedReason::kNoCrossref: return "no_crossref";
    case UnresolvedReason::kNoCatalogRow: return "no_catalog_row";
    case UnresolvedReason::kFilteredByParallax: return "filtered_by_parallax";
  }
  return "unknown";
}

struct UnresolvedReport {
  std::uint32_t yale_hr_id = 0;
  std::optional<std::uint32_t> hip_id;
  UnresolvedReason reason = UnresolvedReason::kNoCrossref;

  friend bool operator==(const UnresolvedReport&, const UnresolvedReport&) = default;
};

using Resolution = std::variant<StarRecord, UnresolvedReport>;

inline Resolution resolve_identity(std::uint32_t yale_hr_id, const CrossRefTable& crossrefs,
                                   const FusedCatalog& catalog) {
  const auto hip = crossrefs.hip_for(yale_hr_id);
  if (!hip) return UnresolvedReport{yale_hr_id, std::nullopt, UnresolvedReason::kNoCrossref};
  if (const StarRecord* s = catalog.find_hip(*hip)) {
    StarRecord r = *s;
    r.yale_hr_id = yale_hr_id;
    return r;
  }
  const auto reason = catalog.was_filtered(*hip) ? UnresolvedReason::kFilteredByParallax
                                                 : UnresolvedReason::kNoCatalogRow;
  return UnresolvedReport{yale_hr_id, hip, reason};
}

struct MemberDrop {
  std::string const_id;
  UnresolvedReport unresolved;
};

struct BuildReport {
  std::size_t star_count = 0;
  std::size_t constellation_count = 0;
  std::vector<MemberDrop> dropped_members;
  std::map<std::string, std::size_t> dropped_edges;
  std::vector<std::string> empty_constellations;
  std::vector<std::string> name_conflicts;

  std::size_t total_dropped_edges() const {
    std::size_t n = 0;
    for (const auto& [id, k] : dropped_edges) n += k;
    return n;
  }
};

inline nlohmann::ordered_json to_json(const BuildReport& r) {
  nlohmann::ordered_json j;
  j["stars"] = r.star_count;
  j["constellations"] = r.constellation_count;
  auto drops = nlohmann::ordered_json::array();
  for (const auto& d : r.dropped_members) {
    nlohmann::ordered_json e{{"const_id", d.const_id},
                             {"hr", d.unresolved.yale_hr_id},
                             {"reason", to_string(d.unresolved.reason)}};
    if (d.unresolved.hip_id) e["hip"] = *d.unresolved.hip_id;
    drops.push_back(e);
  }
  j["dropped_members"] = drops;
  j["dropped_edges"] = nlohmann::ordered_json::object();
  for (const auto& [id, n] : r.dropped_edges) j["dropped_edges"][id] = n;
  j["empty_constellations"] = r.empty_constellations;
  j["name_conflicts"] = r.name_conflicts;
  return j;
}

struct BuildResult {
  AtlasSnapshot snapshot;
  BuildReport report;
};

// Resolves every constellation member, copies the curated names onto the
// stars, and drops unresolved members together with the edges touching
// them. Constellations that lose every member are kept (empty) and flagged.
inline BuildResult build_atlas(std::vector<StarRecord> stars, const ConstellationFile& defs,
                               const CrossRefTable& crossrefs, const FusedCatalog& catalog,
                               BuildMeta meta = {}) {
  BuildResult out;
  auto& report = out.report;
  auto& snap = out.snapshot;

  for (const auto& def : defs.constellations) {
    Constellation c;
    c.const_id = def.const_id;
    c.korean_name = def.korean_name;
    c.romanized_name = def.romanized_name;
    c.meaning = def.meaning;
    c.classification = def.classification;
    c.lore = def.lore;
    c.western_note = def.western_note;

    std::vector<std::optional<std::uint32_t>> uid_of_member;
    for (const auto& m : def.members) {
      const auto res = resolve_identity(m.hr, crossrefs, catalog);
      if (const auto* u = std::get_if<UnresolvedReport>(&res)) {
        report.dropped_members.push_back({def.const_id, *u});
        uid_of_member.emplace_back();
        continue;
      }
      const auto uid = std::get<StarRecord>(res).star_uid;
      uid_of_member.emplace_back(uid);
      if (std::find(c.member_uids.begin(), c.member_uids.end(), uid) == c.member_uids.end()) {
        c.member_uids.push_back(uid);
      }
      StarRecord& s = stars[uid];
      auto adopt = [&](std::optional<std::string>& slot, const std::optional<std::string>& name) {
        if (!name) return;
        if (slot && *slot != *name) {
          report.name_conflicts.push_back(def.const_id + ": HR " + std::to_string(m.hr) + " '" +
                                          *name + "' vs '" + *slot + "'");
          return;
        }
        slot = name;
      };
      adopt(s.korean_name, m.korean_name);
      adopt(s.romanized_name, m.romanized_name);
      adopt(s.western_name, m.western_name);
      if (!s.yale_hr_id) s.yale_hr_id = m.hr;
    }

    std::set<StarEdge> seen;
    std::size_t dropped = 0;
    for (const auto& [a, b] : def.edges) {
      const auto ua = uid_of_member[a];
      const auto ub = uid_of_member[b];
      if (!ua || !ub || *ua == *ub) {
        ++dropped;
        continue;
      }
      if (!seen.insert({std::min(*ua, *ub), std::max(*ua, *ub)}).second) {
        ++dropped;
        continue;
      }
      c.edges.emplace_back(*ua, *ub);
    }
    if (dropped) report.dropped_edges[def.const_id] = dropped;
    if (c.member_uids.empty()) report.empty_constellations.push_back(def.const_id);
    snap.constellations.push_back(std::move(c));
  }

  snap.stars = std::move(stars);
  report.star_count = snap.stars.size();
  report.constellation_count = snap.constellations.size();

  meta["count.stars"] = std::to_string(snap.stars.size());
  meta["count.constellations"] = std::to_string(snap.constellations.size());
  meta["count.stars.gaia"] = std::to_string(catalog.gaia_count());
  meta["count.stars.hipparcos"] = std::to_string(catalog.hipparcos_count());
  meta["count.dropped_members"] = std::to_string(report.dropped_members.size());
  if (!meta.contains("timestamp")) meta["timestamp"] = "0";
  snap.build_meta = std::move(meta);
  return out;
}

// Convenience overload for the common pipeline.
inline BuildResult build_atlas(const FusedCatalog& catalog, const ConstellationFile& defs,
                               const CrossRefTable& crossrefs, BuildMeta meta = {}) {
  return build_atlas(catalog.stars(), defs, crossrefs, catalog, std::move(meta));
}

// Full-scan referential integrity check. Returns a list of problems.
inline std::vector<std::string> check_integrity(const AtlasSnapshot& snap) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < snap.stars.size(); ++i) {
    if (snap.stars[i].star_uid != i) problems.push_back("star uid not dense at index " + std::to_string(i));
  }
  for (const auto& c : snap.constellations) {
    std::set<std::uint32_t> members(c.member_uids.begin(), c.member_uids.end());
    for (auto uid : c.member_uids) {
      if (uid >= snap.stars.size()) problems.push_back(c.const_id + ": member " + std::to_string(uid) + " missing");
    }
    std::set<StarEdge> undirected;
    for (const auto& [a, b] : c.edges) {
      if (!members.contains(a) || !members.contains(b)) problems.push_back(c.const_id + ": edge endpoint not a member");
      if (a == b) problems.push_back(c.const_id + ": self loop");
      if (!undirected.insert({std::min(a, b), std::max(a, b)}).second) problems.push_back(c.const_id + ": duplicate edge");
    }
  }
  std::set<unsigned> lodges;
  for (const auto& c : snap.constellations) {
    if (c.classification.kind != ClassKind::kLunarLodge) continue;
    const unsigned idx = c.classification.lodge_index;
    if (idx < 1 || idx > kLunarLodgeCount || !lodges.insert(idx).second) {
      problems.push_back(c.const_id + ": bad or duplicate lodge index");
    }
  }
  return problems;
}

struct StarUid { std::uint32_t value; };
struct HipId { std::uint32_t value; };
struct ConstId { std::string value; };
struct NameQuery { std::string value; };
using Selector = std::variant<StarUid, HipId, ConstId, NameQuery>;

struct LookupResult {
  std::vector<const StarRecord*> stars;
  std::vector<const Constellation*> constellations;

  bool empty() const { return stars.empty() && constellations.empty(); }
};

// Read-only view over a snapshot with lookup tables and the spatial index.
class Atlas {
 public:
  explicit Atlas(AtlasSnapshot snapshot, std::size_t leaf_capacity = kDefaultLeafCapacity)
      : snap_(std::move(snapshot)) {
    for (const auto& s : snap_.stars) {
      if (s.hip_id) by_hip_.emplace(*s.hip_id, s.star_uid);
    }
    owners_.resize(snap_.stars.size());
    for (std::size_t i = 0; i < snap_.constellations.size(); ++i) {
      const auto& c = snap_.constellations[i];
      by_const_id_.emplace(c.const_id, i);
      for (auto uid : c.member_uids) {
        if (uid < owners_.size()) owners_[uid].push_back(i);
      }
    }
    for (std::uint32_t uid = 0; uid < owners_.size(); ++uid) {
      if (!owners_[uid].empty()) member_uids_.push_back(uid);
    }
    if (!snap_.stars.empty()) {
      std::vector<IndexedStar> pts;
      pts.reserve(snap_.stars.size());
      for (const auto& s : snap_.stars) pts.push_back({s.star_uid, s.cartesian, s.magnitudes.absolute});
      index_.emplace(Octree::build(pts, leaf_capacity));
    }
  }

  const AtlasSnapshot& snapshot() const { return snap_; }
  const std::vector<StarRecord>& stars() const { return snap_.stars; }
  const std::vector<Constellation>& constellations() const { return snap_.constellations; }
  // Absent for an empty snapshot.
  const Octree* index() const { return index_ ? &*index_ : nullptr; }

  const StarRecord* find_star(std::uint32_t uid) const {
    return uid < snap_.stars.size() ? &snap_.stars[uid] : nullptr;
  }
  const StarRecord* find_hip(std::uint32_t hip) const {
    const auto it = by_hip_.find(hip);
    return it == by_hip_.end() ? nullptr : &snap_.stars[it->second];
  }
  const Constellation* find_constellation(const std::string& id) const {
    const auto it = by_const_id_.find(id);
    return it == by_const_id_.end() ? nullptr : &snap_.constellations[it->second];
  }
  // Constellations listing `uid` as a member, in snapshot order.
  std::vector<const Constellation*> owners(std::uint32_t uid) const {
    std::vector<const Constellation*> out;
    if (uid < owners_.size()) {
      for (auto i : owners_[uid]) out.push_back(&snap_.constellations[i]);
    }
    return out;
  }
  bool is_member(std::uint32_t uid) const { return uid < owners_.size() && !owners_[uid].empty(); }
  // Ascending uids of all constellation members.
  const std::vector<std::uint32_t>& member_uids() const { return member_uids_; }

  // Exact-id selectors give at most one record. Name queries are ASCII
  // case-insensitive substrings over Korean, romanized and Western names of
  // stars and constellations (a constellation's Western name is its
  // western_note); an empty query matches nothing.
  LookupResult lookup(const Selector& sel) const {
    LookupResult r;
    if (const auto* s = std::get_if<StarUid>(&sel)) {
      if (const auto* star = find_star(s->value)) r.stars.push_back(star);
    } else if (const auto* h = std::get_if<HipId>(&sel)) {
      if (const auto* star = find_hip(h->value)) r.stars.push_back(star);
    } else if (const auto* c = std::get_if<ConstId>(&sel)) {
      if (const auto* con = find_constellation(c->value)) r.constellations.push_back(con);
    } else {
      const auto needle = text::ascii_lower(std::get<NameQuery>(sel).value);
      if (needle.empty()) return r;
      auto hit = [&](const std::optional<std::string>& name) {
        return name && text::ascii_lower(*name).find(needle) != std::string::npos;
      };
      for (const auto& s : snap_.stars) {
        if (hit(s.korean_name) || hit(s.romanized_name) || hit(s.western_name)) r.stars.push_back(&s);
      }
      for (const auto& con : snap_.constellations) {
        if (hit(con.korean_name) || hit(con.romanized_name) || hit(con.western_note)) {
          r.constellations.push_back(&con);
        }
      }
    }
    return r;
  }

 private:
  AtlasSnapshot snap_;
  std::unordered_map<std::uint32_t, std::uint32_t> by_hip_;
  std::unordered_map<std::string, std::size_t> by_const_id_;
  std::vector<std::vector<std::size_t>> owners_;
  std::vector<std::uint32_t> member_uids_;
  std::optional<Octree> index_;
};

}  // namespace seongdo
