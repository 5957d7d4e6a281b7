#pragma once

// Read-only HTTP API over an immutable atlas.
//
//   GET /api/v1/constellations                 summaries, ordered by const_id
//   GET /api/v1/constellations/{const_id}      full document
//   GET /api/v1/stars/{uid}                    star detail
//   GET /api/v1/stars/stream?eye=x,y,z&budget=N          star packet stream
//   GET /api/v1/pick?eye=x,y,z&dir=x,y,z[&max_angle=deg][&members_only=1]
//
// Errors carry {"code", "message"}. ApiService::handle is a pure function of
// (snapshot, path, query); ApiServer binds it to cpp-httplib and serves the
// viewer bundle from a static directory under "/".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "seongdo/atlas.hpp"
#include "seongdo/star_packet.hpp"
#include "seongdo/text.hpp"

namespace seongdo {

using Json = nlohmann::ordered_json;
using QueryParams = std::multimap<std::string, std::string>;

inline constexpr const char* kJsonType = "application/json; charset=utf-8";
inline constexpr const char* kBinaryType = "application/octet-stream";

struct ApiResponse {
  int status = 200;
  std::string content_type = kJsonType;
  std::string body;
};

inline ApiResponse json_response(const Json& j, int status = 200) {
  return {status, kJsonType, j.dump()};
}

inline ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  return json_response(Json{{"code", code}, {"message", message}}, status);
}

inline Json optional_json(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }
inline Json optional_json(const std::optional<std::uint32_t>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json classification_json(const Classification& c) {
  Json j{{"kind", to_string(c.kind)}};
  if (c.kind == ClassKind::kLunarLodge) j["lodge_index"] = c.lodge_index;
  return j;
}

inline Json constellation_summary(const Constellation& c) {
  return {{"const_id", c.const_id},
          {"korean_name", c.korean_name},
          {"romanized_name", c.romanized_name},
          {"meaning", c.meaning},
          {"classification", classification_json(c.classification)},
          {"member_count", c.member_uids.size()}};
}

inline Json constellation_doc(const Atlas& atlas, const Constellation& c) {
  Json j = constellation_summary(c);
  j["member_uids"] = c.member_uids;
  auto edges = Json::array();
  for (const auto& [a, b] : c.edges) edges.push_back({a, b});
  j["edges"] = edges;
  j["lore"] = c.lore;
  j["western_note"] = optional_json(c.western_note);
  auto members = Json::array();
  for (auto uid : c.member_uids) {
    const StarRecord& s = atlas.stars().at(uid);
    members.push_back({{"uid", uid},
                       {"display_name", display_name(s)},
                       {"korean_name", optional_json(s.korean_name)},
                       {"romanized_name", optional_json(s.romanized_name)},
                       {"western_name", optional_json(s.western_name)},
                       {"hip_id", optional_json(s.hip_id)},
                       {"apparent_mag", s.magnitudes.apparent},
                       {"absolute_mag", s.magnitudes.absolute},
                       {"position_pc", {s.cartesian.x, s.cartesian.y, s.cartesian.z}}});
  }
  j["members"] = members;
  return j;
}

// Inverse of constellation_doc for the snapshot fields.
inline Constellation constellation_from_doc(const Json& j) {
  Constellation c;
  c.const_id = j.at("const_id").get<std::string>();
  c.korean_name = j.at("korean_name").get<std::string>();
  c.romanized_name = j.at("romanized_name").get<std::string>();
  c.meaning = j.at("meaning").get<std::string>();
  const auto kind = j.at("classification").at("kind").get<std::string>();
  if (kind == "lunar_lodge") {
    c.classification = Classification::lodge(j["classification"].at("lodge_index").get<std::uint8_t>());
  } else if (kind == "perpetual_visibility") {
    c.classification = Classification::perpetual_visibility();
  } else {
    c.classification = Classification::other();
  }
  c.member_uids = j.at("member_uids").get<std::vector<std::uint32_t>>();
  for (const auto& e : j.at("edges")) c.edges.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
  c.lore = j.at("lore").get<std::string>();
  if (!j.at("western_note").is_null()) c.western_note = j["western_note"].get<std::string>();
  return c;
}

inline Json star_detail(const Atlas& atlas, const StarRecord& s) {
  const double d = parallax_to_distance(s.spherical.parallax_mas);
  auto owners = Json::array();
  for (const auto* c : atlas.owners(s.star_uid)) {
    owners.push_back({{"const_id", c->const_id}, {"korean_name", c->korean_name}, {"romanized_name", c->romanized_name}});
  }
  return {{"uid", s.star_uid},
          {"display_name", display_name(s)},
          {"korean_name", optional_json(s.korean_name)},
          {"romanized_name", optional_json(s.romanized_name)},
          {"western_name", optional_json(s.western_name)},
          {"hip_id", optional_json(s.hip_id)},
          {"yale_hr_id", optional_json(s.yale_hr_id)},
          {"source_catalog", to_string(s.source_catalog)},
          {"source_id", s.source_id},
          {"band", band_of(s.source_catalog)},
          {"ra_deg", s.spherical.ra_deg},
          {"dec_deg", s.spherical.dec_deg},
          {"parallax_mas", s.spherical.parallax_mas},
          {"distance_pc", d},
          {"distance_ly", parsecs_to_light_years(d)},
          {"position_pc", {s.cartesian.x, s.cartesian.y, s.cartesian.z}},
          {"apparent_mag", s.magnitudes.apparent},
          {"absolute_mag", s.magnitudes.absolute},
          {"constellations", owners}};
}

namespace detail {

inline std::optional<Vec3> parse_vec3(std::string_view s) {
  const auto parts = text::split_csv(s);
  if (parts.size() != 3) return std::nullopt;
  const auto x = text::parse_double(parts[0]);
  const auto y = text::parse_double(parts[1]);
  const auto z = text::parse_double(parts[2]);
  if (!x || !y || !z || !std::isfinite(*x) || !std::isfinite(*y) || !std::isfinite(*z)) return std::nullopt;
  return Vec3{*x, *y, *z};
}

inline const std::string* param(const QueryParams& q, const std::string& key) {
  const auto it = q.find(key);
  return it == q.end() ? nullptr : &it->second;
}

}  // namespace detail

class ApiService {
 public:
  static constexpr std::string_view kPrefix = "/api/v1";

  explicit ApiService(std::shared_ptr<const Atlas> atlas) : atlas_(std::move(atlas)) {}

  std::shared_ptr<const Atlas> atlas() const {
    std::lock_guard lock(mu_);
    return atlas_;
  }

  // Requests already in flight keep the snapshot they started with.
  void swap(std::shared_ptr<const Atlas> next) {
    std::lock_guard lock(mu_);
    atlas_ = std::move(next);
  }

  ApiResponse handle(std::string_view path, const QueryParams& query = {}) const {
    const auto atlas = this->atlas();
    if (!path.starts_with(kPrefix)) return error_response(404, "not_found", "no such endpoint");
    std::string_view rest = path.substr(kPrefix.size());
    if (rest == "/constellations" || rest == "/constellations/") return list_constellations(*atlas);
    if (rest.starts_with("/constellations/")) {
      return get_constellation(*atlas, std::string(rest.substr(std::string_view("/constellations/").size())));
    }
    if (rest == "/stars/stream") return stream(*atlas, query);
    if (rest.starts_with("/stars/")) return get_star(*atlas, rest.substr(std::string_view("/stars/").size()));
    if (rest == "/pick") return pick(*atlas, query);
    return error_response(404, "not_found", "no such endpoint: " + std::string(path));
  }

 private:
  static ApiResponse list_constellations(const Atlas& atlas) {
    std::vector<const Constellation*> sorted;
    for (const auto& c : atlas.constellations()) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const Constellation* a, const Constellation* b) { return a->const_id < b->const_id; });
    auto arr = Json::array();
    for (const auto* c : sorted) arr.push_back(constellation_summary(*c));
    return json_response(arr);
  }

  static ApiResponse get_constellation(const Atlas& atlas, const std::string& id) {
    const auto* c = atlas.find_constellation(id);
    if (!c) return error_response(404, "not_found", "unknown constellation '" + id + "'");
    return json_response(constellation_doc(atlas, *c));
  }

  static ApiResponse get_star(const Atlas& atlas, std::string_view uid_text) {
    const auto uid = text::parse_unsigned<std::uint32_t>(uid_text);
    if (!uid) return error_response(400, "bad_request", "star uid must be an unsigned integer");
    const auto* s = atlas.find_star(*uid);
    if (!s) return error_response(404, "not_found", "unknown star uid " + std::to_string(*uid));
    return json_response(star_detail(atlas, *s));
  }

  static ApiResponse stream(const Atlas& atlas, const QueryParams& q) {
    const auto* eye_s = detail::param(q, "eye");
    const auto* budget_s = detail::param(q, "budget");
    if (!eye_s || !budget_s) return error_response(400, "bad_request", "eye and budget are required");
    const auto eye = detail::parse_vec3(*eye_s);
    if (!eye) return error_response(400, "bad_request", "eye must be three finite numbers x,y,z");
    const auto budget = text::parse_unsigned<std::uint64_t>(*budget_s);
    if (!budget) return error_response(400, "bad_request", "budget must be a non-negative integer");
    std::vector<std::uint32_t> uids;
    if (const auto* index = atlas.index()) uids = index->lod_select(*eye, static_cast<std::size_t>(*budget));
    const auto bytes = encode_stream(atlas, uids);
    return {200, kBinaryType, std::string(bytes.begin(), bytes.end())};
  }

  static ApiResponse pick(const Atlas& atlas, const QueryParams& q) {
    const auto* eye_s = detail::param(q, "eye");
    const auto* dir_s = detail::param(q, "dir");
    if (!eye_s || !dir_s) return error_response(400, "bad_request", "eye and dir are required");
    const auto eye = detail::parse_vec3(*eye_s);
    const auto dir = detail::parse_vec3(*dir_s);
    if (!eye || !dir) return error_response(400, "bad_request", "eye and dir must be three finite numbers");
    if (!(std::abs(norm(*dir) - 1.0) <= 1e-9)) {
      return error_response(400, "bad_request", "dir must be a unit vector");
    }
    double max_angle = kDefaultPickAngleDeg;
    if (const auto* a = detail::param(q, "max_angle")) {
      const auto v = text::parse_double(*a);
      if (!v || !(*v >= 0.0) || !(*v <= 180.0)) {
        return error_response(400, "bad_request", "max_angle must be a number in [0, 180]");
      }
      max_angle = *v;
    }
    bool members_only = false;
    if (const auto* m = detail::param(q, "members_only")) members_only = (*m == "1" || *m == "true");

    std::optional<PickHit> hit;
    if (const auto* index = atlas.index()) {
      std::optional<std::span<const std::uint32_t>> subset;
      if (members_only) subset = std::span<const std::uint32_t>(atlas.member_uids());
      hit = index->pick_by_direction(*eye, *dir, max_angle, subset);
    }
    if (!hit) {
      return json_response({{"hit", false}, {"star_uid", nullptr}, {"constellations", Json::array()}});
    }
    const StarRecord& s = atlas.stars().at(hit->uid);
    auto owners = Json::array();
    for (const auto* c : atlas.owners(hit->uid)) owners.push_back(c->const_id);
    return json_response({{"hit", true},
                          {"star_uid", hit->uid},
                          {"angle_deg", hit->angle_deg},
                          {"display_name", display_name(s)},
                          {"constellations", owners}});
  }

  mutable std::mutex mu_;
  std::shared_ptr<const Atlas> atlas_;
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8787;
  std::string static_dir;
};

// cpp-httplib front end. One log line per request: method, path, status,
// duration.
class ApiServer {
 public:
  using LogSink = std::function<void(const std::string&)>;

  explicit ApiServer(std::shared_ptr<ApiService> service, LogSink log = default_log())
      : service_(std::move(service)), log_(std::move(log)) {
    server_.set_pre_routing_handler([](const httplib::Request&, httplib::Response&) {
      request_start() = std::chrono::steady_clock::now();
      return httplib::Server::HandlerResponse::Unhandled;
    });
    server_.Get(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      QueryParams q(req.params.begin(), req.params.end());
      const auto r = service_->handle(req.path, q);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    });
    auto not_allowed = [](const httplib::Request&, httplib::Response& res) {
      const auto r = error_response(405, "method_not_allowed", "the API is read-only");
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server_.Post(R"(/api/.*)", not_allowed);
    server_.Put(R"(/api/.*)", not_allowed);
    server_.Delete(R"(/api/.*)", not_allowed);
    server_.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
      const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                          std::chrono::steady_clock::now() - request_start())
                          .count();
      log_(req.method + " " + req.path + " " + std::to_string(res.status) + " " +
           text::fixed(static_cast<double>(us) / 1000.0, 3) + "ms");
    });
  }

  bool mount_static(const std::string& dir) { return server_.set_mount_point("/", dir); }

  // Returns the bound port, or -1.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }
  bool run() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  bool running() const { return server_.is_running(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

  static LogSink default_log() {
    return [](const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); };
  }

 private:
  static std::chrono::steady_clock::time_point& request_start() {
    thread_local std::chrono::steady_clock::time_point t;
    return t;
  }

  std::shared_ptr<ApiService> service_;
  LogSink log_;
  httplib::Server server_;
};

}  // namespace seongdo
