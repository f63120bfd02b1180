#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "healthyplate/image.hpp"

namespace hplate {

// Reads a PNG or JPEG (detected by signature) into an RGB buffer at source
// resolution. Alpha is composited onto white.
ImageBuffer load_image(const std::filesystem::path& path);

// Writes an RGB or GRAY buffer as an 8-bit PNG. Other spaces are converted to
// RGB first; channel values are rounded and clamped.
void save_png(const std::filesystem::path& path, const ImageBuffer& img);

// 1-bit grayscale PNG; `bits` holds one 0/1 byte per pixel.
void save_bilevel_png(const std::filesystem::path& path, int width, int height, const std::vector<std::uint8_t>& bits);

// Palette-indexed 8-bit PNG. Every index must be < palette.size() <= 256.
void save_indexed_png(const std::filesystem::path& path, int width, int height,
                      const std::vector<std::uint8_t>& indices, const std::vector<std::array<std::uint8_t, 3>>& palette);

} // namespace hplate
