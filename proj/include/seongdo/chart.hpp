#pragma once

// Planisphere charts for checking the compiled atlas against historical
// star charts: pole-centred projections, SVG and PBM output, and numeric
// residuals against a reference position list.
//
// Chart coordinates (u, v) lie in [0, 1]^2 with v pointing down. The north
// celestial pole maps to (0.5, 0.5) and the outer ring (max_dec_ring) to
// radius 0.5. RA 0h points down and RA increases counter-clockwise, the sky
// as seen from inside the sphere; `mirror` flips the sense of rotation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "seongdo/astrometry.hpp"
#include "seongdo/atlas.hpp"
#include "seongdo/error.hpp"
#include "seongdo/text.hpp"

namespace seongdo {

enum class Projection : std::uint8_t { kPolarAzimuthalEquidistant, kStereographic };

struct ChartSpec {
  Projection projection = Projection::kPolarAzimuthalEquidistant;
  double max_dec_ring = -60.0;
  int image_size = 1024;
  bool draw_lodge_labels = true;
  bool draw_edges = true;
  bool magnitude_size_scale = true;
  bool mirror = false;
  double magnitude_limit = 6.5;  // apparent; fainter stars are skipped
};

inline void validate(const ChartSpec& spec) {
  if (!(spec.max_dec_ring < 90.0) || !(spec.max_dec_ring >= -90.0)) {
    throw UsageError("chart: outer ring declination must be in [-90, 90)");
  }
  if (spec.projection == Projection::kStereographic && !(spec.max_dec_ring > -90.0)) {
    throw UsageError("chart: stereographic outer ring must be above -90");
  }
  if (spec.image_size < 256) throw UsageError("chart: image size must be at least 256 px");
}

struct ChartPoint {
  double u = 0.0;
  double v = 0.0;
};

inline double chart_radius(double dec_deg, const ChartSpec& spec) {
  const double polar = 90.0 - dec_deg;
  const double outer = 90.0 - spec.max_dec_ring;
  if (spec.projection == Projection::kStereographic) {
    return 0.5 * std::tan(0.5 * polar * kDegToRad) / std::tan(0.5 * outer * kDegToRad);
  }
  return 0.5 * polar / outer;
}

// nullopt for stars south of the outer ring.
inline std::optional<ChartPoint> project_star(double ra_deg, double dec_deg, const ChartSpec& spec) {
  if (dec_deg < spec.max_dec_ring) return std::nullopt;
  const double r = chart_radius(dec_deg, spec);
  const double a = ra_deg * kDegToRad;
  const double sense = spec.mirror ? -1.0 : 1.0;
  return ChartPoint{0.5 + sense * r * std::sin(a), 0.5 + r * std::cos(a)};
}

inline std::optional<ChartPoint> project_star(const SphericalPos& s, const ChartSpec& spec) {
  return project_star(s.ra_deg, s.dec_deg, spec);
}

// Dot radius in chart millimetres; the chart is kChartWidthMm across.
inline double dot_radius_mm(double apparent_mag, const ChartSpec& spec) {
  if (!spec.magnitude_size_scale) return 0.6;
  return std::clamp(2.5 - 0.35 * apparent_mag, 0.2, 2.5);
}
inline constexpr double kChartWidthMm = 400.0;

struct RenderReport {
  std::size_t stars_drawn = 0;
  std::size_t stars_out_of_bounds = 0;
  std::size_t stars_too_faint = 0;
  std::size_t edges_drawn = 0;
  std::size_t edges_omitted = 0;
  std::size_t labels_drawn = 0;

  std::size_t stars_omitted() const { return stars_out_of_bounds + stars_too_faint; }
};

inline nlohmann::ordered_json to_json(const RenderReport& r) {
  return {{"stars_drawn", r.stars_drawn},       {"stars_out_of_bounds", r.stars_out_of_bounds},
          {"stars_too_faint", r.stars_too_faint}, {"edges_drawn", r.edges_drawn},
          {"edges_omitted", r.edges_omitted},   {"labels_drawn", r.labels_drawn}};
}

// Geometry shared by the vector and raster back ends.
struct ChartScene {
  struct Dot {
    double x, y, r;
    bool member;
  };
  struct Segment {
    double x1, y1, x2, y2;
  };
  struct Label {
    double x, y;
    std::string text;
  };
  std::vector<double> ring_radii_px;  // graticule, outermost last
  std::vector<Segment> spokes;
  std::vector<Segment> edges;
  std::vector<Dot> dots;
  std::vector<Label> labels;
  RenderReport report;
};

inline ChartScene compose_chart(const AtlasSnapshot& snap, const ChartSpec& spec) {
  validate(spec);
  ChartScene scene;
  const double size = spec.image_size;
  const double px_per_mm = size / kChartWidthMm;
  auto to_px = [&](ChartPoint p) { return std::pair{p.u * size, p.v * size}; };

  for (double dec = 60.0; dec > spec.max_dec_ring; dec -= 30.0) {
    scene.ring_radii_px.push_back(chart_radius(dec, spec) * size);
  }
  scene.ring_radii_px.push_back(0.5 * size);
  for (int h = 0; h < 24; h += 2) {
    const auto inner = project_star(h * 15.0, 80.0, spec);
    const auto outer = project_star(h * 15.0, spec.max_dec_ring, spec);
    const auto [x1, y1] = to_px(*inner);
    const auto [x2, y2] = to_px(*outer);
    scene.spokes.push_back({x1, y1, x2, y2});
  }

  std::vector<bool> member(snap.stars.size(), false);
  for (const auto& c : snap.constellations) {
    for (auto uid : c.member_uids) member[uid] = true;
  }

  if (spec.draw_edges) {
    for (const auto& c : snap.constellations) {
      for (const auto& [a, b] : c.edges) {
        const auto pa = project_star(snap.stars[a].spherical, spec);
        const auto pb = project_star(snap.stars[b].spherical, spec);
        if (!pa || !pb) {
          ++scene.report.edges_omitted;
          continue;
        }
        const auto [x1, y1] = to_px(*pa);
        const auto [x2, y2] = to_px(*pb);
        scene.edges.push_back({x1, y1, x2, y2});
        ++scene.report.edges_drawn;
      }
    }
  } else {
    for (const auto& c : snap.constellations) scene.report.edges_omitted += c.edges.size();
  }

  for (const auto& s : snap.stars) {
    const auto p = project_star(s.spherical, spec);
    if (!p) {
      ++scene.report.stars_out_of_bounds;
      continue;
    }
    if (s.magnitudes.apparent > spec.magnitude_limit && !member[s.star_uid]) {
      ++scene.report.stars_too_faint;
      continue;
    }
    const auto [x, y] = to_px(*p);
    scene.dots.push_back({x, y, dot_radius_mm(s.magnitudes.apparent, spec) * px_per_mm, member[s.star_uid]});
    ++scene.report.stars_drawn;
  }

  if (spec.draw_lodge_labels) {
    for (const auto& c : snap.constellations) {
      if (c.classification.kind != ClassKind::kLunarLodge) continue;
      double sx = 0.0, sy = 0.0;
      std::size_t n = 0;
      for (auto uid : c.member_uids) {
        if (const auto p = project_star(snap.stars[uid].spherical, spec)) {
          const auto [x, y] = to_px(*p);
          sx += x;
          sy += y;
          ++n;
        }
      }
      if (n == 0) continue;
      scene.labels.push_back({sx / static_cast<double>(n), sy / static_cast<double>(n) - 0.012 * size,
                              std::to_string(c.classification.lodge_index) + " " + c.korean_name});
      ++scene.report.labels_drawn;
    }
  }
  return scene;
}

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

// Byte-reproducible SVG: fixed element order, fixed-precision numbers.
inline std::string render_svg(const ChartScene& scene, const ChartSpec& spec) {
  const double size = spec.image_size;
  const double c = 0.5 * size;
  std::string out;
  auto num = [&](double v) { text::append_fixed(out, v, 2); };
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  num(size);
  out += "\" height=\"";
  num(size);
  out += "\" viewBox=\"0 0 ";
  num(size);
  out += " ";
  num(size);
  out += "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#05070f\"/>\n";
  out += "<g fill=\"none\" stroke=\"#2b3a5c\" stroke-width=\"1\">\n";
  for (double r : scene.ring_radii_px) {
    out += "<circle cx=\"";
    num(c);
    out += "\" cy=\"";
    num(c);
    out += "\" r=\"";
    num(r);
    out += "\"/>\n";
  }
  for (const auto& s : scene.spokes) {
    out += "<line x1=\"";
    num(s.x1);
    out += "\" y1=\"";
    num(s.y1);
    out += "\" x2=\"";
    num(s.x2);
    out += "\" y2=\"";
    num(s.y2);
    out += "\"/>\n";
  }
  out += "</g>\n<g stroke=\"#d04a3a\" stroke-width=\"1.5\">\n";
  for (const auto& e : scene.edges) {
    out += "<line x1=\"";
    num(e.x1);
    out += "\" y1=\"";
    num(e.y1);
    out += "\" x2=\"";
    num(e.x2);
    out += "\" y2=\"";
    num(e.y2);
    out += "\"/>\n";
  }
  out += "</g>\n<g>\n";
  for (const auto& d : scene.dots) {
    out += "<circle cx=\"";
    num(d.x);
    out += "\" cy=\"";
    num(d.y);
    out += "\" r=\"";
    num(d.r);
    out += d.member ? "\" fill=\"#ffd470\"/>\n" : "\" fill=\"#e8ecf4\"/>\n";
  }
  out += "</g>\n<g fill=\"#9fb6e0\" font-family=\"sans-serif\" font-size=\"";
  num(size / 80.0);
  out += "\" text-anchor=\"middle\">\n";
  for (const auto& l : scene.labels) {
    out += "<text x=\"";
    num(l.x);
    out += "\" y=\"";
    num(l.y);
    out += "\">";
    out += detail::xml_escape(l.text);
    out += "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

// 1-bit portable bitmap (P4): dots and edges in black on white.
inline std::string render_pbm(const ChartScene& scene, const ChartSpec& spec) {
  const int n = spec.image_size;
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
  auto set = [&](int x, int y) {
    if (x >= 0 && y >= 0 && x < n && y < n) bits[static_cast<std::size_t>(y) * n + x] = 1;
  };
  if (!scene.ring_radii_px.empty()) {
    const double c = 0.5 * n, r = scene.ring_radii_px.back() - 0.5;
    const int steps = static_cast<int>(std::ceil(2.0 * 3.14159265358979323846 * r));
    for (int i = 0; i < steps; ++i) {
      const double t = 2.0 * 3.14159265358979323846 * i / steps;
      set(static_cast<int>(std::floor(c + r * std::cos(t))), static_cast<int>(std::floor(c + r * std::sin(t))));
    }
  }
  for (const auto& e : scene.edges) {
    const double len = std::hypot(e.x2 - e.x1, e.y2 - e.y1);
    const int steps = std::max(1, static_cast<int>(std::ceil(len)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      set(static_cast<int>(std::floor(e.x1 + t * (e.x2 - e.x1))),
          static_cast<int>(std::floor(e.y1 + t * (e.y2 - e.y1))));
    }
  }
  for (const auto& d : scene.dots) {
    const double r = std::max(d.r, 0.5);
    const int x0 = static_cast<int>(std::floor(d.x - r)), x1 = static_cast<int>(std::ceil(d.x + r));
    const int y0 = static_cast<int>(std::floor(d.y - r)), y1 = static_cast<int>(std::ceil(d.y + r));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - d.x, dy = y + 0.5 - d.y;
        if (dx * dx + dy * dy <= r * r) set(x, y);
      }
    }
  }
  std::string out = "P4\n" + std::to_string(n) + " " + std::to_string(n) + "\n";
  const int row_bytes = (n + 7) / 8;
  for (int y = 0; y < n; ++y) {
    for (int b = 0; b < row_bytes; ++b) {
      std::uint8_t byte = 0;
      for (int k = 0; k < 8; ++k) {
        const int x = b * 8 + k;
        if (x < n && bits[static_cast<std::size_t>(y) * n + x]) byte = static_cast<std::uint8_t>(byte | (0x80 >> k));
      }
      out += static_cast<char>(byte);
    }
  }
  return out;
}

enum class ChartFormat : std::uint8_t { kSvg, kPbm };

inline ChartFormat chart_format_for(const std::filesystem::path& out) {
  return out.extension() == ".pbm" ? ChartFormat::kPbm : ChartFormat::kSvg;
}

inline std::string render_chart_bytes(const AtlasSnapshot& snap, const ChartSpec& spec,
                                      ChartFormat format, RenderReport* report = nullptr) {
  const auto scene = compose_chart(snap, spec);
  if (report) *report = scene.report;
  return format == ChartFormat::kPbm ? render_pbm(scene, spec) : render_svg(scene, spec);
}

inline RenderReport render_chart(const AtlasSnapshot& snap, const ChartSpec& spec,
                                 const std::filesystem::path& out) {
  RenderReport report;
  const auto bytes = render_chart_bytes(snap, spec, chart_format_for(out), &report);
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write chart " + out.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for chart " + out.string());
  return report;
}

// ---- residuals against a reference position list --------------------------

struct Residual {
  std::uint32_t star_uid = 0;
  std::string reference_id;
  double residual_deg = 0.0;
};

struct ResidualSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct ResidualReport {
  std::vector<Residual> residuals;
  std::vector<std::string> unknown_ids;
  IngestReport ingest;
  ResidualSummary summary;
};

inline ResidualSummary summarize(const std::vector<Residual>& rs) {
  ResidualSummary s;
  s.count = rs.size();
  if (rs.empty()) return s;
  std::vector<double> v;
  for (const auto& r : rs) v.push_back(r.residual_deg);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  s.max = *std::max_element(v.begin(), v.end());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

// Reference rows are `id,ra,dec`; id is `uid:<n>`, `hip:<n>` or a bare HIP
// number. Unknown ids are listed, malformed rows counted; neither is fatal.
inline ResidualReport residual_report(const Atlas& atlas, std::istream& in, const std::string& source) {
  ResidualReport rep;
  rep.ingest.source = source;
  rep.ingest.format = "reference";
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file, header row required");
  detail::check_header(text::strip_line(line, true), {{"id", "ra", "dec"}, std::nullopt}, source);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = text::strip_line(line, false);
    if (text::trim(stripped).empty()) continue;
    ++rep.ingest.rows_read;
    const auto f = text::split_csv(stripped);
    if (f.size() != 3) {
      rep.ingest.reject(line_no, reject::kFieldCount);
      continue;
    }
    const auto ra = text::parse_double(f[1]);
    const auto dec = text::parse_double(f[2]);
    std::string_view id = f[0];
    bool by_uid = false;
    if (id.starts_with("uid:")) {
      by_uid = true;
      id.remove_prefix(4);
    } else if (id.starts_with("hip:")) {
      id.remove_prefix(4);
    }
    const auto num = text::parse_unsigned<std::uint32_t>(id);
    if (!ra || !dec || !num || !std::isfinite(*ra) || !std::isfinite(*dec)) {
      rep.ingest.reject(line_no, reject::kUnparseable);
      continue;
    }
    if (*dec < -90.0 || *dec > 90.0) {
      rep.ingest.reject(line_no, reject::kDecOutOfRange);
      continue;
    }
    ++rep.ingest.rows_accepted;
    const StarRecord* s = by_uid ? atlas.find_star(*num) : atlas.find_hip(*num);
    if (!s) {
      rep.unknown_ids.emplace_back(f[0]);
      continue;
    }
    rep.residuals.push_back(
        {s->star_uid, std::string(f[0]), angular_separation(s->spherical.ra_deg, s->spherical.dec_deg, *ra, *dec)});
  }
  rep.summary = summarize(rep.residuals);
  return rep;
}

inline ResidualReport residual_report(const Atlas& atlas, const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return residual_report(atlas, in, path.string());
}

}  // namespace seongdo
