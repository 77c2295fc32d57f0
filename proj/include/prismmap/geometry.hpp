#pragma once

#include <numbers>

namespace prismmap::geometry {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

/// Wraps an angle into [-pi, pi).
double normalize_longitude(double lon);

// Longitude in [-pi, pi), latitude in [-pi/2, pi/2]. At the poles the
// longitude is meaningless and is stored as 0.
class SphericalCoord {
 public:
  SphericalCoord() = default;
  SphericalCoord(double longitude, double latitude);

  double longitude() const { return longitude_; }
  double latitude() const { return latitude_; }

 private:
  double longitude_ = 0.0;
  double latitude_ = 0.0;
};

class Direction {
 public:
  /// Normalizes (x, y, z); throws kInvalidArgument for a zero or
  /// non-finite vector.
  Direction(double x, double y, double z);

  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  double dot(const Direction& o) const { return x_ * o.x_ + y_ * o.y_ + z_ * o.z_; }

 private:
  double x_, y_, z_;
};

/// Angle between two unit directions, accurate for tiny angles.
double angular_distance(const Direction& a, const Direction& b);

/// Central angle of a regular n-gon in degrees (360 / n). n < 3 throws
/// kInvalidPolygon.
double central_angle(int n);

// One lateral face of an n-gonal prism map. Face k looks along longitude
// k * 2pi / n at latitude 0, with square horizontal/vertical FOV.
class FaceGeometry {
 public:
  FaceGeometry(int n, double fov_deg, int face_index);

  int n() const { return n_; }
  double fov_deg() const { return fov_deg_; }
  int face_index() const { return face_index_; }
  double heading() const { return heading_; }
  /// tan(fov / 2): half-extent of the image plane at unit focal distance.
  double half_extent() const { return half_extent_; }

 private:
  int n_;
  double fov_deg_;
  int face_index_;
  double heading_;
  double half_extent_;
};

/// Continuous face coordinates (u, v) in [0, 1]^2, u to the right
/// (increasing longitude), v downward (decreasing latitude).
SphericalCoord face_point_to_spherical(double u, double v, const FaceGeometry& geom);

/// Pixel-centre variant: u = (i + 0.5) / N, v = (j + 0.5) / N.
SphericalCoord face_pixel_to_spherical(int i, int j, int face_size, const FaceGeometry& geom);

struct PixelCoord {
  double x;
  double y;
};

/// Equirectangular (plate carree) placement: x in [0, W), y in [0, H].
PixelCoord spherical_to_equirect(const SphericalCoord& coord, int width, int height);

Direction spherical_to_direction(const SphericalCoord& coord);
SphericalCoord direction_to_spherical(const Direction& d);

// Closed longitude interval covered by a face along the equator, expressed
// as [heading - fov/2, heading + fov/2] in degrees without wrapping.
struct EquatorSpan {
  double start_deg;
  double end_deg;
};

EquatorSpan equator_span(const FaceGeometry& geom);

/// Overlap in degrees between consecutive faces along the equator
/// (fov - 360/n; negative means a gap).
double seam_overlap(int n, double fov_deg);

}  // namespace prismmap::geometry
