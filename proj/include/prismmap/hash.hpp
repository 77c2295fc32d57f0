#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "prismmap/image.hpp"

namespace prismmap {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(const std::string& text);

/// Identity of decoded pixel content: SHA-256 over a "WxHxC\n" header
/// followed by the raw pixel buffer.
std::string content_id(const Image& image);

}  // namespace prismmap
