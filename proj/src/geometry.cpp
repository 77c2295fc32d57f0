#include "prismmap/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "prismmap/error.hpp"

namespace prismmap::geometry {

double normalize_longitude(double lon) {
  if (lon >= -kPi && lon < kPi) return lon;
  double wrapped = std::fmod(lon + kPi, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  wrapped -= kPi;
  // fmod can land exactly on +pi after the shift back.
  if (wrapped >= kPi) wrapped -= kTwoPi;
  return wrapped;
}

SphericalCoord::SphericalCoord(double longitude, double latitude) {
  latitude_ = std::clamp(latitude, -kPi / 2.0, kPi / 2.0);
  if (latitude_ == kPi / 2.0 || latitude_ == -kPi / 2.0) {
    longitude_ = 0.0;
  } else {
    longitude_ = normalize_longitude(longitude);
  }
}

Direction::Direction(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("direction ({}, {}, {}) cannot be normalized", x, y, z));
  }
  x_ = x / norm;
  y_ = y / norm;
  z_ = z / norm;
}

double angular_distance(const Direction& a, const Direction& b) {
  // atan2(|a x b|, a.b) stays accurate near 0 and pi, unlike acos.
  const double cx = a.y() * b.z() - a.z() * b.y();
  const double cy = a.z() * b.x() - a.x() * b.z();
  const double cz = a.x() * b.y() - a.y() * b.x();
  return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), a.dot(b));
}

double central_angle(int n) {
  if (n < 3) {
    throw Error(ErrorKind::kInvalidPolygon,
                fmt::format("a regular prism needs at least 3 sides, got n={}", n));
  }
  return 360.0 / n;
}

FaceGeometry::FaceGeometry(int n, double fov_deg, int face_index)
    : n_(n), fov_deg_(fov_deg), face_index_(face_index) {
  central_angle(n);
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw Error(ErrorKind::kInvalidFov,
                fmt::format("field of view must lie in (0, 180) degrees, got {}", fov_deg));
  }
  if (face_index < 0 || face_index >= n) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("face index {} outside [0, {})", face_index, n));
  }
  heading_ = face_index * kTwoPi / n;
  half_extent_ = std::tan(deg_to_rad(fov_deg) / 2.0);
}

SphericalCoord face_point_to_spherical(double u, double v, const FaceGeometry& geom) {
  const double t = geom.half_extent();
  const double a = (2.0 * u - 1.0) * t;
  const double b = (1.0 - 2.0 * v) * t;
  const double lon = geom.heading() + std::atan2(a, 1.0);
  const double lat = std::asin(b / std::sqrt(1.0 + a * a + b * b));
  return SphericalCoord(lon, lat);
}

SphericalCoord face_pixel_to_spherical(int i, int j, int face_size, const FaceGeometry& geom) {
  if (face_size <= 0 || i < 0 || j < 0 || i >= face_size || j >= face_size) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("pixel ({}, {}) outside a {}px face", i, j, face_size));
  }
  const double inv = 1.0 / face_size;
  return face_point_to_spherical((i + 0.5) * inv, (j + 0.5) * inv, geom);
}

PixelCoord spherical_to_equirect(const SphericalCoord& coord, int width, int height) {
  double x = (coord.longitude() / kTwoPi + 0.5) * width;
  // longitude < pi can still round up to W.
  if (x >= width) x -= width;
  const double y = (0.5 - coord.latitude() / kPi) * height;
  return {x, y};
}

Direction spherical_to_direction(const SphericalCoord& coord) {
  const double cos_lat = std::cos(coord.latitude());
  return Direction(cos_lat * std::cos(coord.longitude()), cos_lat * std::sin(coord.longitude()),
                   std::sin(coord.latitude()));
}

SphericalCoord direction_to_spherical(const Direction& d) {
  const double horizontal = std::hypot(d.x(), d.y());
  const double lat = std::atan2(d.z(), horizontal);
  if (horizontal == 0.0) return SphericalCoord(0.0, lat);
  return SphericalCoord(std::atan2(d.y(), d.x()), lat);
}

EquatorSpan equator_span(const FaceGeometry& geom) {
  const double heading_deg = geom.face_index() * central_angle(geom.n());
  return {heading_deg - geom.fov_deg() / 2.0, heading_deg + geom.fov_deg() / 2.0};
}

double seam_overlap(int n, double fov_deg) { return fov_deg - central_angle(n); }

}  // namespace prismmap::geometry
