#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "prismmap/backends.hpp"

namespace prismmap {

namespace {

constexpr int kTemplateCells = 16;
constexpr int kStrongChannel = 200;
constexpr int kWeakChannel = 60;

// 0 = background, 1 + FiducialColor otherwise.
inline std::uint8_t classify(const std::uint8_t* p) {
  for (int c = 0; c < 3; ++c) {
    if (p[c] < kStrongChannel) continue;
    const int o1 = p[(c + 1) % 3];
    const int o2 = p[(c + 2) % 3];
    if (o1 <= kWeakChannel && o2 <= kWeakChannel) return static_cast<std::uint8_t>(1 + c);
  }
  return 0;
}

struct Blob {
  std::uint8_t color_class;
  int min_x, min_y, max_x, max_y;
};

}  // namespace

const char* to_string(FiducialColor color) {
  switch (color) {
    case FiducialColor::kRed: return "red";
    case FiducialColor::kGreen: return "green";
    case FiducialColor::kBlue: return "blue";
  }
  return "unknown";
}

std::string fiducial_label(FiducialColor color) { return std::string("fiducial-") + to_string(color); }

std::vector<FiducialDetection> find_fiducial_candidates(const Image& image, const StubOptions& options) {
  const int width = image.width();
  const int height = image.height();
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> cls(count);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) cls[static_cast<std::size_t>(y) * width + x] = classify(image.pixel(x, y));
  }

  // 4-connected components of same-colour pixels.
  std::vector<std::int32_t> component(count, -1);
  std::vector<Blob> blobs;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < count; ++start) {
    if (cls[start] == 0 || component[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(blobs.size());
    const int sx = static_cast<int>(start % width);
    const int sy = static_cast<int>(start / width);
    Blob blob{cls[start], sx, sy, sx, sy};
    component[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(idx % width);
      const int y = static_cast<int>(idx / width);
      blob.min_x = std::min(blob.min_x, x);
      blob.max_x = std::max(blob.max_x, x);
      blob.min_y = std::min(blob.min_y, y);
      blob.max_y = std::max(blob.max_y, y);
      const auto visit = [&](std::size_t n) {
        if (cls[n] == blob.color_class && component[n] < 0) {
          component[n] = id;
          stack.push_back(n);
        }
      };
      if (x > 0) visit(idx - 1);
      if (x + 1 < width) visit(idx + 1);
      if (y > 0) visit(idx - width);
      if (y + 1 < height) visit(idx + width);
    }
    blobs.push_back(blob);
  }

  std::vector<FiducialDetection> out;
  std::vector<int> col_top, col_bottom;
  for (std::size_t id = 0; id < blobs.size(); ++id) {
    const Blob& b = blobs[id];
    const auto cid = static_cast<std::int32_t>(id);
    const int w = b.max_x - b.min_x + 1;
    if (std::max(w, b.max_y - b.min_y + 1) < options.min_side) continue;

    // Per-column vertical extent of the blob.
    col_top.assign(w, height);
    col_bottom.assign(w, -1);
    for (int y = b.min_y; y <= b.max_y; ++y) {
      for (int x = b.min_x; x <= b.max_x; ++x) {
        if (component[static_cast<std::size_t>(y) * width + x] != cid) continue;
        col_top[x - b.min_x] = std::min(col_top[x - b.min_x], y);
        col_bottom[x - b.min_x] = std::max(col_bottom[x - b.min_x], y);
      }
    }
    std::vector<int> heights;
    for (int c = 0; c < w; ++c) {
      if (col_bottom[c] >= 0) heights.push_back(col_bottom[c] - col_top[c] + 1);
    }
    std::nth_element(heights.begin(), heights.begin() + heights.size() / 2, heights.end());
    const int h = heights[heights.size() / 2];
    const int side = std::max(w, h);
    if (side < options.min_side) continue;

    // Square template of the blob's long side, probed at the centre of each
    // of its 16x16 cells. Columns are re-centred on their own vertical
    // midpoint first, which removes the shear perspective gives horizontal
    // edges off the horizon but keeps any anisotropic stretch.
    const double left = (b.min_x + b.max_x + 1) / 2.0 - side / 2.0;
    const double cell = static_cast<double>(side) / kTemplateCells;
    int matched = 0;
    for (int p = 0; p < kTemplateCells; ++p) {
      const int px = static_cast<int>(std::floor(left + (p + 0.5) * cell));
      if (px < b.min_x || px > b.max_x || col_bottom[px - b.min_x] < 0) continue;
      const double mid = (col_top[px - b.min_x] + col_bottom[px - b.min_x] + 1) / 2.0;
      for (int q = 0; q < kTemplateCells; ++q) {
        const int py = static_cast<int>(std::floor(mid - side / 2.0 + (q + 0.5) * cell));
        if (py < 0 || py >= height) continue;
        if (component[static_cast<std::size_t>(py) * width + px] == cid) ++matched;
      }
    }
    out.push_back({static_cast<FiducialColor>(b.color_class - 1),
                   matched / static_cast<double>(kTemplateCells * kTemplateCells), b.min_x, b.min_y, w,
                   b.max_y - b.min_y + 1});
  }
  return out;
}

LabelDump StubBackend::obtain_labels(const FaceImage& face) {
  std::array<double, 3> best{0.0, 0.0, 0.0};
  for (const auto& d : find_fiducial_candidates(face.pixels(), options_)) {
    if (d.match < options_.min_match) continue;
    auto& slot = best[static_cast<int>(d.color)];
    slot = std::max(slot, d.match);
  }
  LabelDump dump{face.sha256(), name(), {}};
  // Alphabetical label order: blue, green, red.
  for (FiducialColor color : {FiducialColor::kBlue, FiducialColor::kGreen, FiducialColor::kRed}) {
    const double m = best[static_cast<int>(color)];
    if (m > 0.0) dump.labels.emplace_back(fiducial_label(color), options_.full_match_confidence * m);
  }
  return dump;
}

}  // namespace prismmap
