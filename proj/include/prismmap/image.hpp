#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace prismmap {

// Row-major, interleaved 8-bit image with 3 (RGB) or 4 (RGBA) channels.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels);
  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  const std::uint8_t* pixel(int x, int y) const {
    return pixels_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }
  std::uint8_t* pixel(int x, int y) {
    return pixels_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_;
  }

  std::uint8_t* row(int y) { return pixels_.data() + static_cast<std::size_t>(y) * width_ * channels_; }
  const std::uint8_t* row(int y) const {
    return pixels_.data() + static_cast<std::size_t>(y) * width_ * channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

enum class ImageFormat { kPng, kJpeg };

ImageFormat format_from_extension(const std::string& ext);
const char* extension_for(ImageFormat format);

/// Decodes PNG or JPEG bytes (sniffed from the signature). Throws
/// kUndecodableImage on anything else.
Image decode_image(std::span<const std::uint8_t> bytes);

/// Encodes deterministically: no timestamps or other varying metadata.
std::vector<std::uint8_t> encode_image(const Image& image, ImageFormat format, int jpeg_quality = 90);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

Image load_image(const std::filesystem::path& path);

}  // namespace prismmap
