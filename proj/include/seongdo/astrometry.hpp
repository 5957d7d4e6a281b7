#pragma once

// Positional astronomy used by the atlas: parallax distances, the equatorial
// Cartesian frame, the distance modulus and great-circle separations.
//
// Frame: right-handed equatorial, x toward (RA 0, dec 0), z toward dec +90,
// all lengths in parsecs. Everything is double precision; narrowing to float
// happens only at the wire/render boundary.

#include <cmath>
#include <numbers>

#include "seongdo/error.hpp"

namespace seongdo {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;
inline constexpr double kLightYearsPerParsec = 3.26156;
inline constexpr double kAbsoluteMagnitudeDistancePc = 10.0;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }
constexpr double squared_distance(Vec3 a, Vec3 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

// Angle between two non-zero vectors in radians. atan2 of |a x b| and a.b
// stays accurate close to 0 and pi where acos loses digits.
inline double angle_between(Vec3 a, Vec3 b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

struct SphericalPos {
  double ra_deg = 0.0;
  double dec_deg = 0.0;
  double parallax_mas = 0.0;
  friend constexpr bool operator==(const SphericalPos&, const SphericalPos&) = default;
};

using CartesianPos = Vec3;

struct Magnitudes {
  double apparent = 0.0;
  double absolute = 0.0;
  friend constexpr bool operator==(const Magnitudes&, const Magnitudes&) = default;
};

inline double parallax_to_distance(double parallax_mas) {
  if (!(parallax_mas > 0.0) || !std::isfinite(parallax_mas)) {
    throw DomainError("parallax_to_distance: parallax must be positive and finite");
  }
  return 1000.0 / parallax_mas;
}

inline double distance_to_parallax(double distance_pc) {
  if (!(distance_pc > 0.0) || !std::isfinite(distance_pc)) {
    throw DomainError("distance_to_parallax: distance must be positive and finite");
  }
  return 1000.0 / distance_pc;
}

// Unit vector toward (ra, dec).
inline Vec3 direction_of(double ra_deg, double dec_deg) {
  const double ra = ra_deg * kDegToRad;
  const double dec = dec_deg * kDegToRad;
  const double c = std::cos(dec);
  return {c * std::cos(ra), c * std::sin(ra), std::sin(dec)};
}

inline CartesianPos spherical_to_cartesian(const SphericalPos& p) {
  const double d = parallax_to_distance(p.parallax_mas);
  return d * direction_of(p.ra_deg, p.dec_deg);
}

// Inverse of spherical_to_cartesian. RA is reported in [0, 360); at the
// poles (x = y = 0) RA is 0.
inline SphericalPos cartesian_to_spherical(const CartesianPos& c) {
  const double rho = std::hypot(c.x, c.y);
  const double d = std::hypot(rho, c.z);
  if (!(d > 0.0)) {
    throw DomainError("cartesian_to_spherical: origin has no direction");
  }
  double ra = 0.0;
  if (rho > 0.0) {
    ra = std::atan2(c.y, c.x) * kRadToDeg;
    if (ra < 0.0) ra += 360.0;
    if (ra >= 360.0) ra -= 360.0;
  }
  const double dec = std::atan2(c.z, rho) * kRadToDeg;
  return {ra, dec, distance_to_parallax(d)};
}

// Distance modulus: M = m + 5 - 5 log10(d / 1 pc).
inline double apparent_to_absolute(double apparent_mag, double distance_pc) {
  if (!(distance_pc > 0.0) || !std::isfinite(distance_pc)) {
    throw DomainError("apparent_to_absolute: distance must be positive and finite");
  }
  // Grouped so that d = 10 pc returns m bit-exactly.
  return apparent_mag + (5.0 - 5.0 * std::log10(distance_pc));
}

inline Magnitudes magnitudes_at(double apparent_mag, double distance_pc) {
  return {apparent_mag, apparent_to_absolute(apparent_mag, distance_pc)};
}

// Great-circle separation in degrees, Vincenty form (stable at all
// separations, including antipodes). Symmetric, result in [0, 180].
inline double angular_separation(double ra1_deg, double dec1_deg, double ra2_deg, double dec2_deg) {
  const double phi1 = dec1_deg * kDegToRad;
  const double phi2 = dec2_deg * kDegToRad;
  const double dl = (ra2_deg - ra1_deg) * kDegToRad;
  const double s1 = std::sin(phi1), c1 = std::cos(phi1);
  const double s2 = std::sin(phi2), c2 = std::cos(phi2);
  const double sdl = std::sin(dl), cdl = std::cos(dl);
  const double a = c2 * sdl;
  const double b = c1 * s2 - s1 * c2 * cdl;
  const double num = std::hypot(a, b);
  const double den = s1 * s2 + c1 * c2 * cdl;
  return std::atan2(num, den) * kRadToDeg;
}

inline double angular_separation(const SphericalPos& a, const SphericalPos& b) {
  return angular_separation(a.ra_deg, a.dec_deg, b.ra_deg, b.dec_deg);
}

inline double parsecs_to_light_years(double pc) { return pc * kLightYearsPerParsec; }

}  // namespace seongdo
