#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "prismmap/image.hpp"

namespace prismmap::testing {

inline Image noise_image(int width, int height, std::uint64_t seed, int channels = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * channels);
  for (auto& v : px) v = static_cast<std::uint8_t>(dist(rng));
  return Image(width, height, channels, std::move(px));
}

inline Image gradient_image(int width, int height) {
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto* p = img.pixel(x, y);
      p[0] = static_cast<std::uint8_t>((x * 255) / (width - 1));
      p[1] = static_cast<std::uint8_t>((y * 255) / (height - 1));
      p[2] = static_cast<std::uint8_t>(((x + 2 * y) * 7) % 256);
    }
  }
  return img;
}

// Column-rotated copy: out column c = in column (c + shift) mod W.
inline Image shift_columns(const Image& in, int shift) {
  Image out(in.width(), in.height(), in.channels());
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      const int src = (x + shift) % in.width();
      for (int c = 0; c < in.channels(); ++c) out.pixel(x, y)[c] = in.pixel(src, y)[c];
    }
  }
  return out;
}

}  // namespace prismmap::testing
