#include "prismmap/synthetic.hpp"

#include <array>
#include <cmath>
#include <random>

#include "prismmap/geometry.hpp"

namespace prismmap::synthetic {

using geometry::deg_to_rad;
using geometry::kPi;

namespace {

// Portable uniform draw in [0, 1); std distributions vary across libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr std::array<std::array<std::uint8_t, 3>, 3> kColors = {{{255, 0, 0}, {0, 255, 0}, {0, 0, 255}}};

}  // namespace

Image render_fiducial_photosphere(int width, std::span<const Fiducial> fiducials, std::uint64_t seed) {
  const int height = width / 2;
  Image img(width, height, 3);
  std::mt19937_64 rng(seed);
  std::array<double, 3> phase_lon{}, phase_lat{};
  std::array<int, 3> freq{};
  for (int c = 0; c < 3; ++c) {
    phase_lon[c] = unit(rng) * 2 * kPi;
    phase_lat[c] = unit(rng) * 2 * kPi;
    freq[c] = 2 + static_cast<int>(unit(rng) * 5);
  }

  struct Poster {
    double lon, z_centre, half;
    const std::array<std::uint8_t, 3>* rgb;
  };
  std::vector<Poster> posters;
  for (const auto& f : fiducials) {
    posters.push_back({deg_to_rad(f.lon_deg), std::tan(deg_to_rad(f.lat_deg)),
                       std::tan(deg_to_rad(f.size_deg) / 2.0), &kColors[static_cast<int>(f.color)]});
  }

  for (int y = 0; y < height; ++y) {
    const double lat = (0.5 - (y + 0.5) / height) * kPi;
    for (int x = 0; x < width; ++x) {
      const double lon = ((x + 0.5) / width - 0.5) * 2 * kPi;
      std::uint8_t* px = img.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double v = std::sin(freq[c] * lon + phase_lon[c]) * std::cos(3.0 * lat + phase_lat[c]);
        px[c] = static_cast<std::uint8_t>(120.0 + 40.0 * v);
      }
      for (const auto& p : posters) {
        const double rel = geometry::normalize_longitude(lon - p.lon);
        if (std::abs(rel) >= kPi / 2) continue;
        // Intersection of the view ray with the wall plane at distance 1.
        const double s = std::tan(rel);
        const double z = std::tan(lat) / std::cos(rel);
        if (std::abs(s) <= p.half && std::abs(z - p.z_centre) <= p.half) {
          px[0] = (*p.rgb)[0];
          px[1] = (*p.rgb)[1];
          px[2] = (*p.rgb)[2];
        }
      }
    }
  }
  return img;
}

std::vector<Fiducial> corpus_layout(int index) {
  std::mt19937_64 rng(0x5eed0000ULL + static_cast<std::uint64_t>(index));
  const double base = unit(rng) * 360.0 - 180.0;
  const int equatorial = index % 3;
  std::vector<Fiducial> out;
  for (int k = 0; k < 3; ++k) {
    Fiducial f;
    f.color = static_cast<FiducialColor>(k);
    f.lon_deg = base + 120.0 * k + (unit(rng) - 0.5) * 30.0;
    if (f.lon_deg >= 180.0) f.lon_deg -= 360.0;
    if (k == equatorial) {
      f.lat_deg = (unit(rng) - 0.5) * 6.0;
    } else {
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      f.lat_deg = sign * (17.0 + 3.0 * unit(rng));
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace prismmap::synthetic
