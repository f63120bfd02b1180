#include "healthyplate/image.hpp"

#include <algorithm>
#include <cmath>

#include "healthyplate/error.hpp"

namespace hplate {

std::string_view to_string(ColorSpace space) noexcept {
    switch (space) {
        case ColorSpace::RGB: return "rgb";
        case ColorSpace::HSV: return "hsv";
        case ColorSpace::LAB: return "lab";
        case ColorSpace::GRAY: return "gray";
    }
    return "rgb";
}

ColorSpace parse_color_space(std::string_view name) {
    if (name == "rgb") return ColorSpace::RGB;
    if (name == "hsv") return ColorSpace::HSV;
    if (name == "lab") return ColorSpace::LAB;
    if (name == "gray") return ColorSpace::GRAY;
    fail(ErrorKind::InvalidArgument, "unknown color space '" + std::string(name) + "'");
}

std::size_t channel_count(ColorSpace space) noexcept { return space == ColorSpace::GRAY ? 1 : 3; }

ChannelRange channel_range(ColorSpace space, std::size_t channel) noexcept {
    switch (space) {
        case ColorSpace::RGB:
        case ColorSpace::GRAY: return {0.0, 255.0};
        case ColorSpace::HSV: return channel == 0 ? ChannelRange{0.0, 360.0} : ChannelRange{0.0, 1.0};
        case ColorSpace::LAB: return channel == 0 ? ChannelRange{0.0, 100.0} : ChannelRange{-128.0, 127.0};
    }
    return {0.0, 255.0};
}

ImageBuffer::ImageBuffer(int width, int height, ColorSpace space)
    : width_(width), height_(height), space_(space) {
    if (width < 0 || height < 0) fail(ErrorKind::InvalidArgument, "negative image dimension");
    data_.assign(pixel_count() * channels(), 0.0);
}

ImageBuffer::ImageBuffer(int width, int height, ColorSpace space, std::vector<double> data)
    : width_(width), height_(height), space_(space), data_(std::move(data)) {
    if (width < 0 || height < 0) fail(ErrorKind::InvalidArgument, "negative image dimension");
    if (data_.size() != pixel_count() * channels())
        fail(ErrorKind::InvalidArgument, "image data length does not match width x height x channels");
}

bool ImageBuffer::in_range() const noexcept {
    const std::size_t ch = channels();
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const auto r = channel_range(space_, i % ch);
        const double v = data_[i];
        if (!(v >= r.lo && v <= r.hi)) return false;
    }
    return true;
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int width, int height) {
    if (img.empty()) fail(ErrorKind::InvalidArgument, "empty image");
    if (width <= 0 || height <= 0) fail(ErrorKind::InvalidArgument, "resize target must be positive");
    if (img.width() == width && img.height() == height) return img;

    const std::size_t ch = img.channels();
    ImageBuffer out(width, height, img.color_space());
    const double sx = static_cast<double>(img.width()) / width;
    const double sy = static_cast<double>(img.height()) / height;

    auto source_coord = [](int dst, double scale, int src_len, int& i0, int& i1, double& frac) {
        double s = (dst + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
        i0 = static_cast<int>(std::floor(s));
        i1 = std::min(i0 + 1, src_len - 1);
        frac = s - i0;
    };

    for (int y = 0; y < height; ++y) {
        int y0, y1;
        double fy;
        source_coord(y, sy, img.height(), y0, y1, fy);
        for (int x = 0; x < width; ++x) {
            int x0, x1;
            double fx;
            source_coord(x, sx, img.width(), x0, x1, fx);
            auto p00 = img.pixel(x0, y0), p10 = img.pixel(x1, y0);
            auto p01 = img.pixel(x0, y1), p11 = img.pixel(x1, y1);
            auto dst = out.pixel(x, y);
            for (std::size_t c = 0; c < ch; ++c) {
                // Lerp form keeps uniform regions bit-exact.
                const double top = p00[c] + fx * (p10[c] - p00[c]);
                const double bottom = p01[c] + fx * (p11[c] - p01[c]);
                const auto r = channel_range(img.color_space(), c);
                dst[c] = std::clamp(top + fy * (bottom - top), r.lo, r.hi);
            }
        }
    }
    return out;
}

ImageBuffer normalize(const ImageBuffer& img) {
    if (img.empty()) fail(ErrorKind::InvalidArgument, "empty image");
    const ImageBuffer rgb = img.color_space() == ColorSpace::RGB ? img : convert_color(img, ColorSpace::RGB);
    return resize_bilinear(rgb, kNormalizedSize, kNormalizedSize);
}

namespace {

// sRGB primaries, D65 reference white.
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    constexpr double delta = 6.0 / 29.0;
    return t > delta ? t * t * t : 3.0 * delta * delta * (t - 4.0 / 29.0);
}

std::array<double, 3> to_array(std::span<const double> px) { return {px[0], px[1], px[2]}; }

template <typename Fn>
ImageBuffer map_pixels(const ImageBuffer& img, ColorSpace target, Fn fn) {
    ImageBuffer out(img.width(), img.height(), target);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) fn(img.pixel(i), out.pixel(i));
    return out;
}

} // namespace

std::array<double, 3> rgb_to_hsv(std::array<double, 3> rgb) noexcept {
    const double r = rgb[0], g = rgb[1], b = rgb[2];
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    double h = 0.0;
    if (delta > 0.0) {
        if (mx == r)
            h = 60.0 * std::fmod((g - b) / delta, 6.0);
        else if (mx == g)
            h = 60.0 * ((b - r) / delta + 2.0);
        else
            h = 60.0 * ((r - g) / delta + 4.0);
        if (h < 0.0) h += 360.0;
        if (h >= 360.0) h -= 360.0;
    }
    const double s = mx > 0.0 ? delta / mx : 0.0;
    return {h, s, mx / 255.0};
}

std::array<double, 3> hsv_to_rgb(std::array<double, 3> hsv) noexcept {
    const double h = std::fmod(std::fmod(hsv[0], 360.0) + 360.0, 360.0);
    const double s = std::clamp(hsv[1], 0.0, 1.0);
    const double v = std::clamp(hsv[2], 0.0, 1.0);
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(hp)) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    const double m = v - c;
    return {std::clamp((r + m) * 255.0, 0.0, 255.0), std::clamp((g + m) * 255.0, 0.0, 255.0),
            std::clamp((b + m) * 255.0, 0.0, 255.0)};
}

std::array<double, 3> rgb_to_lab(std::array<double, 3> rgb) noexcept {
    const double r = srgb_to_linear(rgb[0] / 255.0);
    const double g = srgb_to_linear(rgb[1] / 255.0);
    const double b = srgb_to_linear(rgb[2] / 255.0);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / kWhiteX), fy = lab_f(y / kWhiteY), fz = lab_f(z / kWhiteZ);
    return {std::clamp(116.0 * fy - 16.0, 0.0, 100.0), std::clamp(500.0 * (fx - fy), -128.0, 127.0),
            std::clamp(200.0 * (fy - fz), -128.0, 127.0)};
}

std::array<double, 3> lab_to_rgb(std::array<double, 3> lab) noexcept {
    const double fy = (lab[0] + 16.0) / 116.0;
    const double fx = fy + lab[1] / 500.0;
    const double fz = fy - lab[2] / 200.0;
    const double x = kWhiteX * lab_f_inv(fx);
    const double y = kWhiteY * lab_f_inv(fy);
    const double z = kWhiteZ * lab_f_inv(fz);
    const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
    const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
    const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
    auto encode = [](double c) { return std::clamp(linear_to_srgb(std::max(c, 0.0)) * 255.0, 0.0, 255.0); };
    return {encode(r), encode(g), encode(b)};
}

double rgb_to_gray(std::array<double, 3> rgb) noexcept {
    return std::clamp(0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2], 0.0, 255.0);
}

std::array<double, 3> pixel_to_rgb(std::span<const double> px, ColorSpace space) {
    switch (space) {
        case ColorSpace::RGB: return to_array(px);
        case ColorSpace::HSV: return hsv_to_rgb(to_array(px));
        case ColorSpace::LAB: return lab_to_rgb(to_array(px));
        case ColorSpace::GRAY: return {px[0], px[0], px[0]};
    }
    return {0, 0, 0};
}

ImageBuffer convert_color(const ImageBuffer& img, ColorSpace target) {
    const ColorSpace source = img.color_space();
    if (source == target) return img;

    if (source == ColorSpace::RGB) {
        switch (target) {
            case ColorSpace::HSV:
                return map_pixels(img, target, [](auto in, auto out) {
                    const auto v = rgb_to_hsv(to_array(in));
                    std::copy(v.begin(), v.end(), out.begin());
                });
            case ColorSpace::LAB:
                return map_pixels(img, target, [](auto in, auto out) {
                    const auto v = rgb_to_lab(to_array(in));
                    std::copy(v.begin(), v.end(), out.begin());
                });
            case ColorSpace::GRAY:
                return map_pixels(img, target, [](auto in, auto out) { out[0] = rgb_to_gray(to_array(in)); });
            default: break;
        }
    } else if (target == ColorSpace::RGB && (source == ColorSpace::HSV || source == ColorSpace::LAB)) {
        return map_pixels(img, target, [source](auto in, auto out) {
            const auto v = pixel_to_rgb(in, source);
            std::copy(v.begin(), v.end(), out.begin());
        });
    }
    fail(ErrorKind::InvalidArgument,
         "unsupported color conversion " + std::string(to_string(source)) + " -> " + std::string(to_string(target)));
}

Histogram color_histogram(const ImageBuffer& img, int bins) {
    if (bins < 1) fail(ErrorKind::InvalidArgument, "histogram needs at least one bin");
    const std::size_t ch = img.channels();
    Histogram hist;
    hist.bins = bins;
    hist.counts.assign(ch, std::vector<std::size_t>(static_cast<std::size_t>(bins), 0));
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const auto px = img.pixel(i);
        for (std::size_t c = 0; c < ch; ++c) {
            const auto r = channel_range(img.color_space(), c);
            const double t = (px[c] - r.lo) / (r.hi - r.lo);
            const int bin = std::clamp(static_cast<int>(std::floor(t * bins)), 0, bins - 1);
            ++hist.counts[c][static_cast<std::size_t>(bin)];
        }
    }
    return hist;
}

nlohmann::json to_json(const Histogram& hist) {
    return {{"bins", hist.bins}, {"channels", hist.counts}};
}

} // namespace hplate
