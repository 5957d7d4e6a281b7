#pragma once

// Curated constellation definitions.
//
// The definition file is YAML with one document per constellation, preceded
// by an optional manifest document that declares how many constellations of
// each classification the file holds:
//
//   kind: manifest
//   schema: 1
//   declared: {lunar_lodge: 25, perpetual_visibility: 2, other: 2, total: 29}
//   ---
//   kind: constellation
//   id: bukdu-chilseong            # [a-z0-9-], at most 48 chars, unique
//   korean_name: 북두칠성 (北斗七星)
//   romanized_name: Bukdu-Chilseong
//   meaning: Seven Stars of the Northern Dipper
//   classification: perpetual_visibility   # or other, or {lodge: 1..28}
//   members:                       # Yale Bright Star (HR) numbers
//     - {hr: 4301, korean_name: 천추, romanized_name: Cheonchu, western_name: Dubhe}
//   edges: [[0, 1]]                # index pairs into `members`
//   lore: ...
//   western_note: ...              # optional
//
// Names are kept verbatim (UTF-8). Any schema violation is fatal and names
// the offending line.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "seongdo/error.hpp"

namespace seongdo {

enum class ClassKind : std::uint8_t { kLunarLodge = 0, kPerpetualVisibility = 1, kOther = 2 };

struct Classification {
  ClassKind kind = ClassKind::kOther;
  std::uint8_t lodge_index = 0;  // 1..28 for lunar lodges, 0 otherwise

  static Classification lodge(std::uint8_t index) { return {ClassKind::kLunarLodge, index}; }
  static Classification perpetual_visibility() { return {ClassKind::kPerpetualVisibility, 0}; }
  static Classification other() { return {ClassKind::kOther, 0}; }

  friend bool operator==(const Classification&, const Classification&) = default;
};

inline const char* to_string(ClassKind k) {
  switch (k) {
    case ClassKind::kLunarLodge: return "lunar_lodge";
    case ClassKind::kPerpetualVisibility: return "perpetual_visibility";
    case ClassKind::kOther: return "other";
  }
  return "other";
}

inline constexpr int kLunarLodgeCount = 28;

struct MemberDef {
  std::uint32_t hr = 0;
  std::optional<std::string> korean_name;
  std::optional<std::string> romanized_name;
  std::optional<std::string> western_name;

  friend bool operator==(const MemberDef&, const MemberDef&) = default;
};

using IndexEdge = std::pair<std::size_t, std::size_t>;

struct ConstellationDef {
  std::string const_id;
  std::string korean_name;
  std::string romanized_name;
  std::string meaning;
  Classification classification;
  std::vector<MemberDef> members;
  std::vector<IndexEdge> edges;
  std::string lore;
  std::optional<std::string> western_note;
  std::size_t line = 0;
};

struct DeclaredCounts {
  std::size_t lunar_lodge = 0;
  std::size_t perpetual_visibility = 0;
  std::size_t other = 0;
  std::size_t total = 0;

  friend bool operator==(const DeclaredCounts&, const DeclaredCounts&) = default;
};

struct ConstellationFile {
  std::vector<ConstellationDef> constellations;
  std::optional<DeclaredCounts> declared;
  std::vector<unsigned> omitted_lodges;

  DeclaredCounts counts() const {
    DeclaredCounts c;
    for (const auto& d : constellations) {
      switch (d.classification.kind) {
        case ClassKind::kLunarLodge: ++c.lunar_lodge; break;
        case ClassKind::kPerpetualVisibility: ++c.perpetual_visibility; break;
        case ClassKind::kOther: ++c.other; break;
      }
    }
    c.total = constellations.size();
    return c;
  }
};

inline bool is_valid_const_id(std::string_view id) {
  if (id.empty() || id.size() > 48) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

namespace detail {

class DefParser {
 public:
  explicit DefParser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    const auto mark = at.Mark();
    std::ostringstream os;
    os << source_;
    if (mark.line >= 0) os << ":" << (mark.line + 1);
    os << ": " << what;
    throw DataError(os.str());
  }

  std::string scalar(const YAML::Node& map, const char* key, bool required = true) const {
    const YAML::Node v = map[key];
    if (!v) {
      if (required) fail(map, std::string("missing field '") + key + "'");
      return {};
    }
    if (!v.IsScalar()) fail(v, std::string("field '") + key + "' must be a scalar");
    return v.as<std::string>();
  }

  std::optional<std::string> optional_scalar(const YAML::Node& map, const char* key) const {
    if (!map[key]) return std::nullopt;
    return scalar(map, key);
  }

  template <typename T>
  T number(const YAML::Node& v, const char* what) const {
    if (!v || !v.IsScalar()) fail(v, std::string(what) + " must be an integer");
    try {
      const long long raw = v.as<long long>();
      if (raw < 0 || static_cast<unsigned long long>(raw) > std::numeric_limits<T>::max()) {
        fail(v, std::string(what) + " out of range");
      }
      return static_cast<T>(raw);
    } catch (const YAML::BadConversion&) {
      fail(v, std::string(what) + " must be an integer");
    }
  }

  void allow_keys(const YAML::Node& map, std::initializer_list<const char*> keys) const {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
        fail(kv.first, "unknown field '" + key + "'");
      }
    }
  }

  Classification classification(const YAML::Node& v) const {
    if (!v) fail(v, "missing field 'classification'");
    if (v.IsScalar()) {
      const auto s = v.as<std::string>();
      if (s == "perpetual_visibility") return Classification::perpetual_visibility();
      if (s == "other") return Classification::other();
      fail(v, "classification must be perpetual_visibility, other or {lodge: N}");
    }
    if (v.IsMap() && v["lodge"] && v.size() == 1) {
      const auto idx = number<unsigned>(v["lodge"], "lodge index");
      if (idx < 1 || idx > kLunarLodgeCount) fail(v["lodge"], "lodge index must be in 1..28");
      return Classification::lodge(static_cast<std::uint8_t>(idx));
    }
    fail(v, "classification must be perpetual_visibility, other or {lodge: N}");
  }

  MemberDef member(const YAML::Node& v) const {
    if (!v.IsMap()) fail(v, "member must be a mapping with an 'hr' field");
    allow_keys(v, {"hr", "korean_name", "romanized_name", "western_name"});
    MemberDef m;
    m.hr = number<std::uint32_t>(v["hr"], "member hr");
    m.korean_name = optional_scalar(v, "korean_name");
    m.romanized_name = optional_scalar(v, "romanized_name");
    m.western_name = optional_scalar(v, "western_name");
    return m;
  }

  ConstellationDef constellation(const YAML::Node& doc) const {
    allow_keys(doc, {"kind", "id", "korean_name", "romanized_name", "meaning", "classification",
                     "members", "edges", "lore", "western_note"});
    ConstellationDef d;
    d.line = static_cast<std::size_t>(doc.Mark().line + 1);
    d.const_id = scalar(doc, "id");
    if (!is_valid_const_id(d.const_id)) fail(doc["id"], "id '" + d.const_id + "' is not a slug");
    d.korean_name = scalar(doc, "korean_name");
    d.romanized_name = scalar(doc, "romanized_name");
    d.meaning = scalar(doc, "meaning");
    d.classification = classification(doc["classification"]);
    d.lore = scalar(doc, "lore");
    d.western_note = optional_scalar(doc, "western_note");

    const YAML::Node members = doc["members"];
    if (!members || !members.IsSequence() || members.size() == 0) {
      fail(members ? members : doc, "members must be a non-empty list");
    }
    std::set<std::uint32_t> seen;
    for (const auto& m : members) {
      d.members.push_back(member(m));
      if (!seen.insert(d.members.back().hr).second) {
        fail(m, "duplicate member HR " + std::to_string(d.members.back().hr));
      }
    }

    const YAML::Node edges = doc["edges"];
    if (!edges || !edges.IsSequence()) fail(edges ? edges : doc, "edges must be a list");
    std::set<IndexEdge> undirected;
    for (const auto& e : edges) {
      if (!e.IsSequence() || e.size() != 2) fail(e, "edge must be a pair [i, j]");
      const auto a = number<std::size_t>(e[0], "edge index");
      const auto b = number<std::size_t>(e[1], "edge index");
      if (a >= d.members.size() || b >= d.members.size()) {
        fail(e, "edge [" + std::to_string(a) + ", " + std::to_string(b) +
                    "] references a non-member (constellation has " +
                    std::to_string(d.members.size()) + " members)");
      }
      if (a == b) fail(e, "self-loop edge on member " + std::to_string(a));
      if (!undirected.insert({std::min(a, b), std::max(a, b)}).second) {
        fail(e, "duplicate edge [" + std::to_string(a) + ", " + std::to_string(b) + "]");
      }
      d.edges.emplace_back(a, b);
    }
    return d;
  }

  void manifest(const YAML::Node& doc, ConstellationFile& out) const {
    allow_keys(doc, {"kind", "schema", "title", "declared", "omitted_lodges"});
    if (doc["schema"] && number<unsigned>(doc["schema"], "schema") != 1) {
      fail(doc["schema"], "unsupported schema version");
    }
    if (const YAML::Node decl = doc["declared"]) {
      if (!decl.IsMap()) fail(decl, "declared must be a mapping");
      allow_keys(decl, {"lunar_lodge", "perpetual_visibility", "other", "total"});
      DeclaredCounts c;
      c.lunar_lodge = number<std::size_t>(decl["lunar_lodge"], "declared.lunar_lodge");
      c.perpetual_visibility =
          number<std::size_t>(decl["perpetual_visibility"], "declared.perpetual_visibility");
      c.other = number<std::size_t>(decl["other"], "declared.other");
      c.total = number<std::size_t>(decl["total"], "declared.total");
      out.declared = c;
    }
    if (const YAML::Node om = doc["omitted_lodges"]) {
      if (!om.IsSequence()) fail(om, "omitted_lodges must be a list");
      for (const auto& v : om) out.omitted_lodges.push_back(number<unsigned>(v, "omitted lodge"));
    }
  }

  ConstellationFile parse(const std::string& text) const {
    std::vector<YAML::Node> docs;
    try {
      docs = YAML::LoadAll(text);
    } catch (const YAML::ParserException& e) {
      throw DataError(source_ + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    ConstellationFile out;
    std::map<std::string, std::size_t> ids;
    std::map<unsigned, std::string> lodges;
    YAML::Node manifest_node;
    bool have_manifest = false;
    for (const auto& doc : docs) {
      if (doc.IsNull()) continue;
      if (!doc.IsMap()) fail(doc, "document must be a mapping");
      const auto kind = scalar(doc, "kind");
      if (kind == "manifest") {
        if (have_manifest) fail(doc, "more than one manifest document");
        have_manifest = true;
        manifest_node = doc;
        manifest(doc, out);
        continue;
      }
      if (kind != "constellation") fail(doc["kind"], "unknown document kind '" + kind + "'");
      auto def = constellation(doc);
      if (!ids.emplace(def.const_id, def.line).second) {
        fail(doc["id"], "duplicate id '" + def.const_id + "' (first defined on line " +
                            std::to_string(ids[def.const_id]) + ")");
      }
      if (def.classification.kind == ClassKind::kLunarLodge) {
        const auto [it, ok] = lodges.emplace(def.classification.lodge_index, def.const_id);
        if (!ok) {
          fail(doc["classification"], "lodge " + std::to_string(def.classification.lodge_index) +
                                          " already used by '" + it->second + "'");
        }
      }
      out.constellations.push_back(std::move(def));
    }
    if (out.declared && *out.declared != out.counts()) {
      const auto c = out.counts();
      fail(manifest_node["declared"],
           "declared counts do not match file contents (found " + std::to_string(c.lunar_lodge) +
               " lunar_lodge, " + std::to_string(c.perpetual_visibility) + " perpetual_visibility, " +
               std::to_string(c.other) + " other, " + std::to_string(c.total) + " total)");
    }
    return out;
  }

 private:
  std::string source_;
};

}  // namespace detail

inline ConstellationFile parse_constellation_defs(const std::string& text,
                                                  const std::string& source = "<memory>") {
  return detail::DefParser(source).parse(text);
}

inline ConstellationFile load_constellation_defs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_constellation_defs(buf.str(), path.string());
}

}  // namespace seongdo
