#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "prismmap/geometry.hpp"
#include "prismmap/image.hpp"

namespace prismmap {

// A photosphere whose width is exactly twice its height.
class EquirectImage {
 public:
  /// Throws kAspectRatio (with the actual W:H) unless W == 2H and H >= 2.
  static EquirectImage validate(Image image);

  const Image& image() const { return image_; }
  int width() const { return image_.width(); }
  int height() const { return image_.height(); }
  int channels() const { return image_.channels(); }

 private:
  explicit EquirectImage(Image image) : image_(std::move(image)) {}
  Image image_;
};

/// Decodes bytes and validates the 2:1 shape.
EquirectImage validate_photosphere(std::span<const std::uint8_t> encoded);

/// Bilinear resize to width 2 * height (height kept). Backs the CLI's
/// --resample-to-2to1 escape hatch.
EquirectImage resample_to_2to1(const Image& image);

enum class Sampling { kBilinear, kNearest };

const char* to_string(Sampling mode);
Sampling sampling_from_string(const std::string& name);

struct PrismMapConfig {
  int n = 8;
  double fov_deg = 52.0;
  int face_size = 1024;
  Sampling sampling = Sampling::kBilinear;
  // Allows fov < 360/n, which leaves gaps between faces.
  bool allow_narrow_fov = false;

  /// Throws kInvalidPolygon / kInvalidFov / kInvalidArgument.
  void validate() const;
  /// "n<n>_fov<fov>" with fov in shortest form (52, 52.5).
  std::string id() const;
};

/// Face headings k * 360 / n, in degrees.
double face_heading_deg(const PrismMapConfig& config, int face_index);

/// The 11 configurations of the experiment, ordered by n then fov.
std::vector<PrismMapConfig> default_sweep_configs();

using Color = std::array<std::uint8_t, 4>;

/// Texture lookup at continuous pixel coordinates (pixel centres at +0.5).
/// x wraps modulo W, y clamps to the first/last row centre.
Color sample(const EquirectImage& image, double x, double y, Sampling mode);

/// Equirect source coordinates for every face pixel, row-major (N*N).
std::vector<geometry::PixelCoord> face_source_coordinates(int width, int height,
                                                          const PrismMapConfig& config,
                                                          int face_index);

Image render_face(const EquirectImage& image, const PrismMapConfig& config, int face_index);

struct PrismMap {
  PrismMapConfig config;
  std::vector<Image> faces;
  std::string source_id;
};

/// Renders all n faces using up to `workers` threads (0 = hardware
/// concurrency). Output does not depend on scheduling.
PrismMap render_prism_map(const EquirectImage& image, const PrismMapConfig& config, int workers = 1);

}  // namespace prismmap
