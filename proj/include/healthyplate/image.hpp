#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hplate {

enum class ColorSpace { RGB, HSV, LAB, GRAY };

std::string_view to_string(ColorSpace space) noexcept;
ColorSpace parse_color_space(std::string_view name);

std::size_t channel_count(ColorSpace space) noexcept;

// Inclusive canonical range of one channel: RGB 0..255, H 0..360, S/V 0..1,
// L 0..100, a/b -128..127, GRAY 0..255.
struct ChannelRange {
    double lo;
    double hi;
};
ChannelRange channel_range(ColorSpace space, std::size_t channel) noexcept;

// Row-major raster with real-valued channels. Values stay in the canonical
// range of the declared color space.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height, ColorSpace space);
    ImageBuffer(int width, int height, ColorSpace space, std::vector<double> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    ColorSpace color_space() const noexcept { return space_; }
    std::size_t channels() const noexcept { return channel_count(space_); }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool empty() const noexcept { return pixel_count() == 0; }

    std::span<const double> pixel(int x, int y) const noexcept {
        return {data_.data() + offset(x, y), channels()};
    }
    std::span<double> pixel(int x, int y) noexcept { return {data_.data() + offset(x, y), channels()}; }
    std::span<const double> pixel(std::size_t index) const noexcept {
        return {data_.data() + index * channels(), channels()};
    }
    std::span<double> pixel(std::size_t index) noexcept { return {data_.data() + index * channels(), channels()}; }

    const std::vector<double>& data() const noexcept { return data_; }

    // True when every channel value lies within its canonical range.
    bool in_range() const noexcept;

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
               channels();
    }

    int width_ = 0;
    int height_ = 0;
    ColorSpace space_ = ColorSpace::RGB;
    std::vector<double> data_;
};

inline constexpr int kNormalizedSize = 256;

// Plain bilinear resize to 256x256 RGB. A 256x256 input is returned unchanged.
ImageBuffer normalize(const ImageBuffer& img);

ImageBuffer resize_bilinear(const ImageBuffer& img, int width, int height);

// Supported pairs: identity, RGB<->HSV, RGB<->LAB, RGB->GRAY.
ImageBuffer convert_color(const ImageBuffer& img, ColorSpace target);

// Single-pixel conversions. RGB channels are 0..255 reals.
std::array<double, 3> rgb_to_hsv(std::array<double, 3> rgb) noexcept;
std::array<double, 3> hsv_to_rgb(std::array<double, 3> hsv) noexcept;
std::array<double, 3> rgb_to_lab(std::array<double, 3> rgb) noexcept;
std::array<double, 3> lab_to_rgb(std::array<double, 3> lab) noexcept;
double rgb_to_gray(std::array<double, 3> rgb) noexcept;

// Any supported pixel to 0..255 RGB (GRAY is replicated).
std::array<double, 3> pixel_to_rgb(std::span<const double> px, ColorSpace space);

struct Histogram {
    int bins = 0;
    std::vector<std::vector<std::size_t>> counts; // one array per channel
};

Histogram color_histogram(const ImageBuffer& img, int bins);

nlohmann::json to_json(const Histogram& hist);

} // namespace hplate
