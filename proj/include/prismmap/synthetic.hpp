#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "prismmap/backends.hpp"
#include "prismmap/image.hpp"

namespace prismmap::synthetic {

// A square poster on a vertical wall at unit horizontal distance from the
// sphere centre, facing the centre. Its centre sits at (lon_deg, lat_deg);
// size_deg is the angular width seen head-on.
struct Fiducial {
  FiducialColor color;
  double lon_deg;
  double lat_deg;
  double size_deg = 8.0;
};

/// Renders a W x W/2 photosphere: smooth low-contrast background plus the
/// posters, one hard-edged sample per pixel centre.
Image render_fiducial_photosphere(int width, std::span<const Fiducial> fiducials, std::uint64_t seed);

/// Deterministic three-fiducial layout (one per colour) for sample `index`:
/// one near the equator and two at 17-20 degrees of latitude.
std::vector<Fiducial> corpus_layout(int index);

}  // namespace prismmap::synthetic
