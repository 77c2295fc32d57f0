#include "prismmap/reproject.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "prismmap/error.hpp"
#include "prismmap/hash.hpp"
#include "prismmap/parallel.hpp"

namespace prismmap {

using geometry::kPi;
using geometry::kTwoPi;

EquirectImage EquirectImage::validate(Image image) {
  if (image.width() != 2 * image.height() || image.height() < 2) {
    throw Error(ErrorKind::kAspectRatio,
                fmt::format("photosphere must be 2:1 (W = 2H, H >= 2), got {}x{} ({:.4f}:1)",
                            image.width(), image.height(),
                            static_cast<double>(image.width()) / image.height()));
  }
  return EquirectImage(std::move(image));
}

EquirectImage validate_photosphere(std::span<const std::uint8_t> encoded) {
  return EquirectImage::validate(decode_image(encoded));
}

EquirectImage resample_to_2to1(const Image& image) {
  const int height = std::max(image.height(), 2);
  const int width = 2 * height;
  const int channels = image.channels();
  Image out(width, height, channels);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      std::uint8_t* dst = out.pixel(x, y);
      for (int c = 0; c < channels; ++c) {
        const double top = (1.0 - wx) * image.pixel(x0, y0)[c] + wx * image.pixel(x1, y0)[c];
        const double bottom = (1.0 - wx) * image.pixel(x0, y1)[c] + wx * image.pixel(x1, y1)[c];
        dst[c] = static_cast<std::uint8_t>(std::clamp((1.0 - wy) * top + wy * bottom + 0.5, 0.0, 255.0));
      }
    }
  }
  return EquirectImage::validate(std::move(out));
}

const char* to_string(Sampling mode) {
  return mode == Sampling::kBilinear ? "bilinear" : "nearest";
}

Sampling sampling_from_string(const std::string& name) {
  if (name == "bilinear") return Sampling::kBilinear;
  if (name == "nearest") return Sampling::kNearest;
  throw Error(ErrorKind::kInvalidArgument,
              fmt::format("unknown sampling mode '{}' (expected bilinear or nearest)", name));
}

void PrismMapConfig::validate() const {
  const double central = geometry::central_angle(n);
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw Error(ErrorKind::kInvalidFov,
                fmt::format("field of view must lie in (0, 180) degrees, got {}", fov_deg));
  }
  if (fov_deg < central && !allow_narrow_fov) {
    throw Error(ErrorKind::kInvalidFov,
                fmt::format("fov {} is below the central angle {} of n={}; faces would leave gaps "
                            "(pass the narrow-fov override to accept)",
                            fov_deg, central, n));
  }
  if (face_size < 1) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("face size must be positive, got {}", face_size));
  }
}

std::string PrismMapConfig::id() const { return fmt::format("n{}_fov{}", n, fov_deg); }

double face_heading_deg(const PrismMapConfig& config, int face_index) {
  return face_index * geometry::central_angle(config.n);
}

std::vector<PrismMapConfig> default_sweep_configs() {
  struct Row {
    int n;
    std::vector<double> fovs;
  };
  const std::vector<Row> rows = {
      {3, {120}},
      {4, {90, 120}},
      {6, {60, 90, 120}},
      {8, {45, 52, 60, 90, 120}},
  };
  std::vector<PrismMapConfig> configs;
  for (const auto& row : rows) {
    for (double fov : row.fovs) {
      PrismMapConfig c;
      c.n = row.n;
      c.fov_deg = fov;
      configs.push_back(c);
    }
  }
  return configs;
}

namespace {

inline void sample_into(const Image& img, double x, double y, Sampling mode, std::uint8_t* dst) {
  const int width = img.width();
  const int height = img.height();
  const int channels = img.channels();
  if (mode == Sampling::kNearest) {
    int col = static_cast<int>(std::floor(x)) % width;
    if (col < 0) col += width;
    const int row = std::clamp(static_cast<int>(std::floor(y)), 0, height - 1);
    const std::uint8_t* src = img.pixel(col, row);
    for (int c = 0; c < channels; ++c) dst[c] = src[c];
    return;
  }
  const double fx = x - 0.5;
  const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(height - 1));
  const double x_floor = std::floor(fx);
  const double wx = fx - x_floor;
  int x0 = static_cast<int>(x_floor) % width;
  if (x0 < 0) x0 += width;
  const int x1 = x0 + 1 == width ? 0 : x0 + 1;
  const int y0 = static_cast<int>(fy);
  const int y1 = std::min(y0 + 1, height - 1);
  const double wy = fy - y0;
  const std::uint8_t* p00 = img.pixel(x0, y0);
  const std::uint8_t* p10 = img.pixel(x1, y0);
  const std::uint8_t* p01 = img.pixel(x0, y1);
  const std::uint8_t* p11 = img.pixel(x1, y1);
  for (int c = 0; c < channels; ++c) {
    const double top = p00[c] + wx * (p10[c] - p00[c]);
    const double bottom = p01[c] + wx * (p11[c] - p01[c]);
    const double v = top + wy * (bottom - top);
    dst[c] = static_cast<std::uint8_t>(v + 0.5);
  }
}

// Per-face lookup tables. Longitude depends only on the column, so the
// source x is computed once per column; y needs the full (a, b) pair.
class FacePlan {
 public:
  FacePlan(int width, int height, const PrismMapConfig& config, int face_index)
      : geom_(config.n, config.fov_deg, face_index),
        width_(width),
        height_(height),
        size_(config.face_size),
        a_(size_),
        b_(size_),
        x_(size_) {
    const double t = geom_.half_extent();
    const double inv = 1.0 / size_;
    for (int i = 0; i < size_; ++i) {
      const double u = (i + 0.5) * inv;
      a_[i] = (2.0 * u - 1.0) * t;
      const geometry::SphericalCoord c(geom_.heading() + std::atan2(a_[i], 1.0), 0.0);
      x_[i] = geometry::spherical_to_equirect(c, width_, height_).x;
    }
    for (int j = 0; j < size_; ++j) {
      const double v = (j + 0.5) * inv;
      b_[j] = (1.0 - 2.0 * v) * t;
    }
  }

  int size() const { return size_; }

  geometry::PixelCoord source(int i, int j) const {
    const double a = a_[i];
    const double b = b_[j];
    const double lat = std::asin(b / std::sqrt(1.0 + a * a + b * b));
    return {x_[i], (0.5 - lat / kPi) * height_};
  }

 private:
  geometry::FaceGeometry geom_;
  int width_;
  int height_;
  int size_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> x_;
};

void render_rows(const Image& src, const FacePlan& plan, Sampling mode, int row_begin, int row_end,
                 Image& out) {
  const int channels = out.channels();
  for (int j = row_begin; j < row_end; ++j) {
    std::uint8_t* dst = out.row(j);
    for (int i = 0; i < plan.size(); ++i, dst += channels) {
      const auto p = plan.source(i, j);
      sample_into(src, p.x, p.y, mode, dst);
    }
  }
}

constexpr int kRowsPerJob = 64;

}  // namespace

Color sample(const EquirectImage& image, double x, double y, Sampling mode) {
  Color out{0, 0, 0, 255};
  sample_into(image.image(), x, y, mode, out.data());
  return out;
}

std::vector<geometry::PixelCoord> face_source_coordinates(int width, int height,
                                                          const PrismMapConfig& config,
                                                          int face_index) {
  config.validate();
  const FacePlan plan(width, height, config, face_index);
  std::vector<geometry::PixelCoord> coords;
  coords.reserve(static_cast<std::size_t>(plan.size()) * plan.size());
  for (int j = 0; j < plan.size(); ++j) {
    for (int i = 0; i < plan.size(); ++i) coords.push_back(plan.source(i, j));
  }
  return coords;
}

Image render_face(const EquirectImage& image, const PrismMapConfig& config, int face_index) {
  config.validate();
  const FacePlan plan(image.width(), image.height(), config, face_index);
  Image out(config.face_size, config.face_size, image.channels());
  render_rows(image.image(), plan, config.sampling, 0, config.face_size, out);
  return out;
}

PrismMap render_prism_map(const EquirectImage& image, const PrismMapConfig& config, int workers) {
  config.validate();
  PrismMap map;
  map.config = config;
  map.source_id = content_id(image.image());
  std::vector<FacePlan> plans;
  plans.reserve(config.n);
  for (int k = 0; k < config.n; ++k) {
    plans.emplace_back(image.width(), image.height(), config, k);
    map.faces.emplace_back(config.face_size, config.face_size, image.channels());
  }
  const int bands = (config.face_size + kRowsPerJob - 1) / kRowsPerJob;
  parallel_for(config.n * bands, workers, [&](int job) {
    const int face = job / bands;
    const int band = job % bands;
    const int begin = band * kRowsPerJob;
    const int end = std::min(begin + kRowsPerJob, config.face_size);
    render_rows(image.image(), plans[face], config.sampling, begin, end, map.faces[face]);
  });
  return map;
}

}  // namespace prismmap
