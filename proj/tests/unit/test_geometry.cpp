#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "prismmap/error.hpp"
#include "prismmap/geometry.hpp"

using namespace prismmap;
using namespace prismmap::geometry;

TEST_CASE("central angle divides the full turn") {
  CHECK(central_angle(6) == 60.0);
  CHECK(central_angle(4) == 90.0);
  CHECK(central_angle(3) == 120.0);
  CHECK(central_angle(8) == 45.0);
}

TEST_CASE("central angle rejects degenerate polygons") {
  for (int n : {2, 1, 0, -4}) {
    try {
      central_angle(n);
      FAIL("expected invalid-polygon error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kInvalidPolygon);
    }
  }
}

TEST_CASE("face geometry validates fov and index") {
  CHECK_THROWS_AS(FaceGeometry(4, 0.0, 0), Error);
  CHECK_THROWS_AS(FaceGeometry(4, 180.0, 0), Error);
  CHECK_THROWS_AS(FaceGeometry(4, 90.0, 4), Error);
  try {
    FaceGeometry(4, 190.0, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidFov);
  }
  CHECK(FaceGeometry(6, 60.0, 0).heading() == 0.0);
  CHECK(FaceGeometry(8, 52.0, 2).heading() == doctest::Approx(kPi / 2).epsilon(1e-15));
}

TEST_CASE("longitude normalisation lands in [-pi, pi)") {
  CHECK(normalize_longitude(kPi) == -kPi);
  CHECK(normalize_longitude(-kPi) == -kPi);
  CHECK(normalize_longitude(3 * kPi) == doctest::Approx(-kPi));
  CHECK(normalize_longitude(0.25) == 0.25);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double lon = normalize_longitude(dist(rng));
    CHECK_UNARY(lon >= -kPi);
    CHECK_UNARY(lon < kPi);
  }
}

TEST_CASE("spherical coordinates canonicalise poles and clamp latitude") {
  const SphericalCoord north(1.3, kPi);
  CHECK(north.latitude() == kPi / 2);
  CHECK(north.longitude() == 0.0);
  const SphericalCoord wrapped(kPi + 0.5, 0.1);
  CHECK(wrapped.longitude() == doctest::Approx(-kPi + 0.5));
}

TEST_CASE("face centre pixels look along the heading") {
  const int size = 33;
  const auto c0 = face_pixel_to_spherical(16, 16, size, FaceGeometry(4, 90.0, 0));
  CHECK(c0.longitude() == doctest::Approx(0.0));
  CHECK(c0.latitude() == doctest::Approx(0.0));
  const auto c2 = face_pixel_to_spherical(16, 16, size, FaceGeometry(8, 52.0, 2));
  CHECK(rad_to_deg(c2.longitude()) == doctest::Approx(90.0));
  CHECK(c2.latitude() == doctest::Approx(0.0));
}

TEST_CASE("face orientation reads like the flat panorama") {
  const FaceGeometry g(4, 90.0, 0);
  const auto left = face_pixel_to_spherical(0, 8, 16, g);
  const auto right = face_pixel_to_spherical(15, 8, 16, g);
  CHECK(left.longitude() < right.longitude());
  const auto top = face_pixel_to_spherical(8, 0, 16, g);
  const auto bottom = face_pixel_to_spherical(8, 15, 16, g);
  CHECK(top.latitude() > bottom.latitude());
}

TEST_CASE("face pixels outside the face are rejected") {
  const FaceGeometry g(4, 90.0, 0);
  CHECK_THROWS_AS(face_pixel_to_spherical(16, 0, 16, g), Error);
  CHECK_THROWS_AS(face_pixel_to_spherical(0, -1, 16, g), Error);
}

TEST_CASE("n=4 fov=90 matches the naive cube-map ray generator on every pixel") {
  const int size = 16;
  const int width = 2048;
  const int height = 1024;
  for (int face = 0; face < 4; ++face) {
    const FaceGeometry g(4, 90.0, face);
    for (int j = 0; j < size; ++j) {
      for (int i = 0; i < size; ++i) {
        const auto p = spherical_to_equirect(face_pixel_to_spherical(i, j, size, g), width, height);
        const auto q = testing::naive_cube_source(face, i, j, size, width, height);
        CHECK(testing::wrapped_distance(p.x, q.x, width) < 1e-6);
        CHECK(std::abs(p.y - q.y) < 1e-6);
      }
    }
  }
}

TEST_CASE("equirect placement of reference points") {
  auto p = spherical_to_equirect(SphericalCoord(0, 0), 2048, 1024);
  CHECK(p.x == 1024.0);
  CHECK(p.y == 512.0);
  p = spherical_to_equirect(SphericalCoord(-kPi, 0), 2048, 1024);
  CHECK(p.x == 0.0);
  CHECK(p.y == 512.0);
  p = spherical_to_equirect(SphericalCoord(0, kPi / 2), 2048, 1024);
  CHECK(p.x == 1024.0);
  CHECK(p.y == 0.0);
  p = spherical_to_equirect(SphericalCoord(std::nextafter(kPi, 0.0), 0), 2048, 1024);
  CHECK_UNARY(p.x < 2048.0);
}

TEST_CASE("direction conversions") {
  const Direction d = spherical_to_direction(SphericalCoord(0, 0));
  CHECK(d.x() == 1.0);
  CHECK(d.y() == 0.0);
  CHECK(d.z() == 0.0);
  const SphericalCoord pole = direction_to_spherical(Direction(0, 0, 1));
  CHECK(pole.longitude() == 0.0);
  CHECK(pole.latitude() == kPi / 2);
  CHECK_THROWS_AS(Direction(0, 0, 0), Error);
}

TEST_CASE("direction round trip property") {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Direction d(gauss(rng), gauss(rng), gauss(rng));
    CHECK(std::abs(std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z()) - 1.0) < 1e-12);
    const Direction back = spherical_to_direction(direction_to_spherical(d));
    worst = std::max(worst, angular_distance(d, back));
  }
  CHECK(worst < 1e-9);

  std::uniform_real_distribution<double> lon(-kPi, kPi);
  std::uniform_real_distribution<double> lat(-1.5, 1.5);
  for (int k = 0; k < 1000; ++k) {
    const SphericalCoord c(lon(rng), lat(rng));
    const SphericalCoord back = direction_to_spherical(spherical_to_direction(c));
    CHECK(std::abs(normalize_longitude(back.longitude() - c.longitude())) < 1e-9);
    CHECK(std::abs(back.latitude() - c.latitude()) < 1e-9);
  }
}

TEST_CASE("heading additivity across faces") {
  for (int n : {3, 4, 6, 8}) {
    for (double fov : {60.0, 90.0, 120.0}) {
      const FaceGeometry base(n, fov, 0);
      for (int k = 1; k < n; ++k) {
        const FaceGeometry g(n, fov, k);
        for (int j = 0; j < 12; j += 3) {
          for (int i = 0; i < 12; ++i) {
            const auto c0 = face_pixel_to_spherical(i, j, 12, base);
            const auto ck = face_pixel_to_spherical(i, j, 12, g);
            const double shifted = normalize_longitude(c0.longitude() + k * kTwoPi / n);
            CHECK(std::abs(normalize_longitude(ck.longitude() - shifted)) < 1e-12);
            CHECK(ck.latitude() == c0.latitude());
          }
        }
      }
    }
  }
}

TEST_CASE("equator longitude increases strictly with column") {
  for (double fov : {45.0, 90.0, 120.0, 170.0}) {
    const FaceGeometry g(8, fov, 3);
    double prev = -1e9;
    for (int i = 0; i < 101; ++i) {
      // unwrap around the heading so the seam does not break monotonicity
      const auto c = face_pixel_to_spherical(i, 50, 101, g);
      const double rel = normalize_longitude(c.longitude() - g.heading());
      CHECK(c.latitude() == doctest::Approx(0.0));
      CHECK(rel > prev);
      prev = rel;
    }
  }
}

TEST_CASE("equator spans and seam overlap") {
  CHECK(seam_overlap(8, 52.0) == doctest::Approx(7.0));
  CHECK(seam_overlap(4, 90.0) == 0.0);
  const auto span = equator_span(FaceGeometry(6, 90.0, 1));
  CHECK(span.start_deg == 15.0);
  CHECK(span.end_deg == 105.0);
  // Continuous face edges at the equator land exactly on the span ends.
  const FaceGeometry g(6, 90.0, 1);
  const auto left = face_point_to_spherical(0.0, 0.5, g);
  const auto right = face_point_to_spherical(1.0, 0.5, g);
  CHECK(rad_to_deg(left.longitude()) == doctest::Approx(15.0));
  CHECK(rad_to_deg(right.longitude()) == doctest::Approx(105.0));
}
