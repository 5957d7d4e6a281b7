// seongdo: build, chart, verify and serve a Korean-constellation star atlas.
//
// Exit codes: 0 success, 1 verification failed, 2 usage, 3 data/schema,
// 4 I/O. Logs go to stderr.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "seongdo/seongdo.hpp"

namespace {

using namespace seongdo;

void log_line(const std::string& s) { std::fprintf(stderr, "seongdo: %s\n", s.c_str()); }

void write_text(const std::string& path, const std::string& body) {
  if (path == "-") {
    std::fwrite(body.data(), 1, body.size(), stdout);
    std::fflush(stdout);
    return;
  }
  write_file_atomically(path, std::vector<std::uint8_t>(body.begin(), body.end()));
}

// ---- build ---------------------------------------------------------------

struct BuildArgs {
  std::string gaia, hip, crossref, constellations, out, report;
  std::string timestamp;
  std::size_t leaf_capacity = kDefaultLeafCapacity;
};

int cmd_build(const BuildArgs& a) {
  const auto gaia = parse_catalog(std::filesystem::path(a.gaia), CatalogFormat::kGaiaLike);
  const auto hip = parse_catalog(std::filesystem::path(a.hip), CatalogFormat::kHipparcosLike);
  const auto xref = parse_crossref(std::filesystem::path(a.crossref));
  const auto defs = load_constellation_defs(a.constellations);
  const auto gaia_kept = filter_positive_parallax(gaia.rows);
  const auto hip_kept = filter_positive_parallax(hip.rows);
  const auto catalog = FusedCatalog::fuse(gaia_kept, hip_kept, xref.table);

  BuildMeta meta;
  meta["digest.gaia"] = sha256_file(a.gaia);
  meta["digest.hipparcos"] = sha256_file(a.hip);
  meta["digest.crossref"] = sha256_file(a.crossref);
  meta["digest.constellations"] = sha256_file(a.constellations);
  meta["count.filtered.gaia"] = std::to_string(gaia_kept.count_removed());
  meta["count.filtered.hipparcos"] = std::to_string(hip_kept.count_removed());
  meta["timestamp"] = a.timestamp;
  auto built = build_atlas(catalog, defs, xref.table, meta);
  // Constructing the index validates positions before anything is written.
  const Atlas atlas(built.snapshot, a.leaf_capacity);
  const auto bytes = serialize_snapshot(built.snapshot);
  write_file_atomically(a.out, bytes);

  Json filter{{"gaia", {{"kept", gaia_kept.rows.size()},
                        {"removed_non_positive", gaia_kept.removed_non_positive},
                        {"removed_missing", gaia_kept.removed_missing}}},
              {"hipparcos", {{"kept", hip_kept.rows.size()},
                             {"removed_non_positive", hip_kept.removed_non_positive},
                             {"removed_missing", hip_kept.removed_missing}}}};
  Json report{{"ingest", {to_json(gaia.report), to_json(hip.report), to_json(xref.report)}},
              {"filter", filter},
              {"fusion", {{"gaia", catalog.gaia_count()},
                          {"hipparcos", catalog.hipparcos_count()},
                          {"superseded_hipparcos", catalog.superseded()}}},
              {"build", to_json(built.report)},
              {"snapshot", {{"path", a.out}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}}}};
  std::cout << report.dump(2) << "\n";
  if (!a.report.empty()) write_text(a.report, report.dump(2) + "\n");
  log_line("wrote " + a.out + " (" + std::to_string(built.snapshot.stars.size()) + " stars, " +
           std::to_string(built.snapshot.constellations.size()) + " constellations, " +
           std::to_string(built.report.dropped_members.size()) + " dropped members)");
  return 0;
}

// ---- chart ---------------------------------------------------------------

struct ChartArgs {
  std::string snapshot, out, report, projection = "polar-azimuthal-equidistant", format;
  ChartSpec spec;
  bool no_labels = false, no_edges = false, no_size_scale = false;
};

int cmd_chart(ChartArgs a) {
  if (a.projection == "stereographic") {
    a.spec.projection = Projection::kStereographic;
  } else if (a.projection == "polar-azimuthal-equidistant" || a.projection == "pae") {
    a.spec.projection = Projection::kPolarAzimuthalEquidistant;
  } else {
    throw UsageError("unknown projection '" + a.projection + "'");
  }
  a.spec.draw_lodge_labels = !a.no_labels;
  a.spec.draw_edges = !a.no_edges;
  a.spec.magnitude_size_scale = !a.no_size_scale;
  validate(a.spec);
  ChartFormat format = chart_format_for(a.out);
  if (a.format == "svg") format = ChartFormat::kSvg;
  if (a.format == "pbm") format = ChartFormat::kPbm;

  const auto snap = load_snapshot(a.snapshot);
  RenderReport rep;
  write_text(a.out, render_chart_bytes(snap, a.spec, format, &rep));
  if (!a.report.empty()) write_text(a.report, to_json(rep).dump(2) + "\n");
  log_line("chart " + a.out + ": " + std::to_string(rep.stars_drawn) + " stars, " +
           std::to_string(rep.edges_drawn) + " edges, " + std::to_string(rep.labels_drawn) + " labels");
  return 0;
}

// ---- verify --------------------------------------------------------------

struct VerifyArgs {
  std::string snapshot, reference, report;
  double tolerance = 0.5;
};

int cmd_verify(const VerifyArgs& a) {
  if (!(a.tolerance > 0.0)) throw UsageError("--tolerance must be positive");
  const Atlas atlas(load_snapshot(a.snapshot));
  const auto r = residual_report(atlas, std::filesystem::path(a.reference));
  const bool ok = r.summary.count > 0 && r.summary.max < a.tolerance;
  Json j{{"matched", r.summary.count},
         {"unknown_ids", r.unknown_ids},
         {"rows_rejected", r.ingest.rows_rejected},
         {"mean_deg", r.summary.mean},
         {"median_deg", r.summary.median},
         {"max_deg", r.summary.max},
         {"tolerance_deg", a.tolerance},
         {"pass", ok}};
  std::cout << j.dump(2) << "\n";
  if (!a.report.empty()) {
    auto full = j;
    full["residuals"] = Json::array();
    for (const auto& x : r.residuals) {
      full["residuals"].push_back({{"id", x.reference_id}, {"uid", x.star_uid}, {"residual_deg", x.residual_deg}});
    }
    write_text(a.report, full.dump(2) + "\n");
  }
  if (r.summary.count == 0) log_line("verify: no reference row matched a star");
  return ok ? 0 : 1;
}

// ---- serve ---------------------------------------------------------------

std::atomic<bool> g_stop{false};
std::atomic<bool> g_reload{false};

extern "C" void on_signal(int sig) {
  if (sig == SIGHUP) {
    g_reload = true;
  } else {
    g_stop = true;
  }
}

struct ServeArgs {
  std::string snapshot, listen = "127.0.0.1:8787", static_dir, port_file;
};

int cmd_serve(const ServeArgs& a) {
  const auto colon = a.listen.rfind(':');
  const auto port = colon == std::string::npos ? std::nullopt
                                               : text::parse_unsigned<std::uint16_t>(a.listen.substr(colon + 1));
  if (!port) throw UsageError("--listen must be host:port");
  const std::string host = a.listen.substr(0, colon);

  auto service = std::make_shared<ApiService>(std::make_shared<const Atlas>(load_snapshot(a.snapshot)));
  ApiServer server(service);
  if (!a.static_dir.empty() && !server.mount_static(a.static_dir)) {
    throw IoError("static directory not found: " + a.static_dir);
  }
  const int bound = server.bind(host, *port);
  if (bound < 0) throw IoError("cannot listen on " + a.listen);
  if (!a.port_file.empty()) write_text(a.port_file, std::to_string(bound) + "\n");
  log_line("listening on http://" + host + ":" + std::to_string(bound));

  std::signal(SIGTERM, on_signal);
  std::signal(SIGINT, on_signal);
  std::signal(SIGHUP, on_signal);
  std::thread watcher([&] {
    while (!g_stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
      if (g_reload.exchange(false)) {
        try {
          service->swap(std::make_shared<const Atlas>(load_snapshot(a.snapshot)));
          log_line("reloaded " + a.snapshot);
        } catch (const std::exception& e) {
          log_line(std::string("reload failed, keeping previous snapshot: ") + e.what());
        }
      }
    }
    server.stop();
  });
  const bool clean = server.run();
  g_stop = true;
  watcher.join();
  log_line("stopped");
  return clean || g_stop ? 0 : 4;
}

// ---- gen-fixture ---------------------------------------------------------

struct FixtureArgs {
  std::size_t stars = 1000;
  std::uint64_t seed = 1;
  std::string out_dir;
};

int cmd_gen_fixture(const FixtureArgs& a) {
  const auto f = generate_fixture(a.stars, a.seed);
  write_fixture(f, a.out_dir);
  log_line("fixture in " + a.out_dir + ": " + std::to_string(a.stars) + " stars, " +
           std::to_string(f.non_positive_parallax) + " non-positive parallaxes, " +
           std::to_string(f.constellation_count) + " constellations");
  return 0;
}

// ---- fetch ---------------------------------------------------------------

struct FetchArgs {
  std::string url, out;
};

int cmd_fetch(const FetchArgs& a) {
  const auto scheme_end = a.url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("--url must be http(s)://host/path");
  const auto path_start = a.url.find('/', scheme_end + 3);
  const std::string origin = a.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : a.url.substr(path_start);
  httplib::Client client(origin);
  client.set_follow_location(true);
  auto res = client.Get(path);
  if (!res) throw IoError("fetch failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw IoError("fetch failed: HTTP " + std::to_string(res->status));
  write_text(a.out, res->body);
  log_line("fetched " + std::to_string(res->body.size()) + " bytes to " + a.out);
  return 0;
}

int resolve_timestamp_default(std::string& ts) {
  if (!ts.empty()) return 0;
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  ts = env && *env ? env : "0";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Korean traditional constellation star atlas", "seongdo"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto add = [&](const char* name, const char* desc) {
    auto* sub = app.add_subcommand(name, desc);
    sub->set_version_flag("--version", kVersion);
    return sub;
  };

  BuildArgs build;
  auto* b = add("build", "Ingest catalogs and constellation definitions, write a snapshot");
  b->add_option("--gaia", build.gaia, "Gaia-like catalog CSV")->required();
  b->add_option("--hip", build.hip, "Hipparcos-like catalog CSV")->required();
  b->add_option("--crossref", build.crossref, "HR to HIP crossref CSV")->required();
  b->add_option("--constellations", build.constellations, "Constellation YAML")->required();
  b->add_option("--out", build.out, "Snapshot output path")->required();
  b->add_option("--report", build.report, "Write the build report as JSON");
  b->add_option("--timestamp", build.timestamp, "build_meta timestamp (default $SOURCE_DATE_EPOCH or 0)");
  b->add_option("--leaf-capacity", build.leaf_capacity, "Octree leaf capacity")->check(CLI::PositiveNumber);

  ChartArgs chart;
  auto* c = add("chart", "Render a pole-centred planisphere of a snapshot");
  c->add_option("--snapshot", chart.snapshot, "Snapshot file")->required();
  c->add_option("--out", chart.out, "Output .svg or .pbm, or - for stdout")->required();
  c->add_option("--projection", chart.projection, "polar-azimuthal-equidistant | stereographic");
  c->add_option("--format", chart.format, "Override the output format")->check(CLI::IsMember({"svg", "pbm"}));
  c->add_option("--outer-dec", chart.spec.max_dec_ring, "Declination of the outer ring, degrees");
  c->add_option("--size", chart.spec.image_size, "Canvas size in pixels");
  c->add_option("--magnitude-limit", chart.spec.magnitude_limit, "Faintest non-member apparent magnitude");
  c->add_flag("--mirror", chart.spec.mirror, "Mirror east-west as seen from inside the sphere");
  c->add_flag("--no-labels", chart.no_labels, "Omit lodge labels");
  c->add_flag("--no-edges", chart.no_edges, "Omit constellation lines");
  c->add_flag("--no-size-scale", chart.no_size_scale, "Draw every star with the same dot");
  c->add_option("--report", chart.report, "Write the render report as JSON");

  VerifyArgs verify;
  auto* v = add("verify", "Compare snapshot positions against a reference list");
  v->add_option("--snapshot", verify.snapshot, "Snapshot file")->required();
  v->add_option("--reference", verify.reference, "Reference CSV: id,ra,dec")->required();
  v->add_option("--tolerance", verify.tolerance, "Maximum residual in degrees (strict)");
  v->add_option("--report", verify.report, "Write per-star residuals as JSON");

  ServeArgs serve;
  auto* s = add("serve", "Serve the read-only HTTP API");
  s->add_option("--snapshot", serve.snapshot, "Snapshot file")->required()->envname("SEONGDO_SNAPSHOT");
  s->add_option("--listen", serve.listen, "host:port (port 0 picks a free port)")->envname("SEONGDO_LISTEN");
  s->add_option("--static-dir", serve.static_dir, "Directory served under /")->envname("SEONGDO_STATIC_DIR");
  s->add_option("--port-file", serve.port_file, "Write the bound port to this file");

  FixtureArgs fixture;
  auto* g = add("gen-fixture", "Write a deterministic synthetic input set");
  g->add_option("--stars", fixture.stars, "Total catalog rows")->required();
  g->add_option("--seed", fixture.seed, "Generator seed")->required();
  g->add_option("--out-dir", fixture.out_dir, "Output directory")->required();

  FetchArgs fetch;
  auto* f = add("fetch", "Download a catalog extract from a user-supplied URL");
  f->add_option("--url", fetch.url, "Source URL")->required();
  f->add_option("--out", fetch.out, "Destination file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*b) {
      resolve_timestamp_default(build.timestamp);
      return cmd_build(build);
    }
    if (*c) return cmd_chart(chart);
    if (*v) return cmd_verify(verify);
    if (*s) return cmd_serve(serve);
    if (*g) return cmd_gen_fixture(fixture);
    if (*f) return cmd_fetch(fetch);
  } catch (const Error& e) {
    log_line(std::string("error: ") + e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    log_line(std::string("internal error: ") + e.what());
    return static_cast<int>(ExitCode::kData);
  }
  return static_cast<int>(ExitCode::kUsage);
}
