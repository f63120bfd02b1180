#include "healthyplate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "healthyplate/error.hpp"
#include "healthyplate/image_io.hpp"

namespace hplate {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
}

Rgb8 hsv_to_rgb8(std::array<double, 3> hsv) {
    const auto rgb = hsv_to_rgb(hsv);
    return {static_cast<int>(std::lround(rgb[0])), static_cast<int>(std::lround(rgb[1])),
            static_cast<int>(std::lround(rgb[2]))};
}

void paint(ImageBuffer& img, std::size_t index, const Rgb8& c) {
    auto px = img.pixel(index);
    px[0] = c[0], px[1] = c[1], px[2] = c[2];
}

bool in_disc(int x, int y, double cx, double cy, double r) {
    const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
    return dx * dx + dy * dy <= r * r;
}

bool in_shape(const ShapeSpec& s, int x, int y) {
    if (s.kind == ShapeSpec::Kind::Disc) return in_disc(x, y, s.cx, s.cy, s.radius);
    return x >= s.x && x < s.x + s.w && y >= s.y && y < s.y + s.h;
}

Rgb8 parse_rgb(const nlohmann::json& v) {
    const auto c = v.get<std::vector<int>>();
    if (c.size() != 3) fail(ErrorKind::InvalidArgument, "colors are [r, g, b] triples");
    for (int ch : c)
        if (ch < 0 || ch > 255) fail(ErrorKind::InvalidArgument, "color channels must be in 0..255");
    return {c[0], c[1], c[2]};
}

const CatalogEntry& catalog_entry(const std::string& label) {
    for (const auto& e : food_catalog())
        if (e.label == label) return e;
    fail(ErrorKind::InvalidArgument, "no reference color for label '" + label + "'");
}

} // namespace

const std::vector<CatalogEntry>& food_catalog() {
    static const std::vector<CatalogEntry> catalog{
        {"plate", {0.0, 0.0, 1.0}},
        {"apple", {5.0, 0.85, 0.80}},
        {"orange", {30.0, 0.95, 0.98}},
        {"banana", {57.0, 0.60, 0.95}},
        {"broccoli", {120.0, 0.75, 0.45}},
        {"red cabbage", {290.0, 0.60, 0.45}},
        {"fish", {15.0, 0.50, 0.98}},
        {"chicken", {30.0, 0.45, 0.75}},
        {"beans", {10.0, 0.60, 0.30}},
        {"rice", {48.0, 0.18, 0.90}},
        {"buckwheat", {25.0, 0.65, 0.50}},
        {"fries", {42.0, 0.80, 0.88}},
    };
    return catalog;
}

std::optional<Rgb8> catalog_color(const std::string& label) {
    for (const auto& e : food_catalog())
        if (e.label == label) return hsv_to_rgb8(e.hsv);
    return std::nullopt;
}

PlateSpec PlateSpec::from_json(const nlohmann::json& doc) {
    try {
        PlateSpec spec;
        spec.width = doc.value("width", spec.width);
        spec.height = doc.value("height", spec.height);
        if (doc.contains("background")) spec.background = parse_rgb(doc.at("background"));
        spec.plate_cx = spec.width / 2.0;
        spec.plate_cy = spec.height / 2.0;
        if (doc.contains("plate")) {
            const auto& p = doc.at("plate");
            spec.plate_cx = p.value("cx", spec.plate_cx);
            spec.plate_cy = p.value("cy", spec.plate_cy);
            spec.plate_radius = p.value("radius", spec.plate_radius);
            if (p.contains("color")) spec.plate_color = parse_rgb(p.at("color"));
        }
        for (const auto& item : doc.value("items", nlohmann::json::array())) {
            ShapeSpec s;
            s.label = item.at("label").get<std::string>();
            const auto shape = item.value("shape", std::string("disc"));
            if (shape == "disc") {
                s.kind = ShapeSpec::Kind::Disc;
                s.cx = item.at("cx").get<double>();
                s.cy = item.at("cy").get<double>();
                s.radius = item.at("radius").get<double>();
            } else if (shape == "rect") {
                s.kind = ShapeSpec::Kind::Rect;
                s.x = item.at("x").get<int>();
                s.y = item.at("y").get<int>();
                s.w = item.at("w").get<int>();
                s.h = item.at("h").get<int>();
            } else {
                fail(ErrorKind::InvalidArgument, "unknown shape '" + shape + "'");
            }
            if (item.contains("color")) s.color = parse_rgb(item.at("color"));
            spec.items.push_back(std::move(s));
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidArgument, std::string("malformed plate description: ") + e.what());
    }
}

nlohmann::json PlateSpec::to_json() const {
    nlohmann::json items_doc = nlohmann::json::array();
    for (const auto& s : items) {
        nlohmann::json d = {{"label", s.label}};
        if (s.kind == ShapeSpec::Kind::Disc) {
            d["shape"] = "disc", d["cx"] = s.cx, d["cy"] = s.cy, d["radius"] = s.radius;
        } else {
            d["shape"] = "rect", d["x"] = s.x, d["y"] = s.y, d["w"] = s.w, d["h"] = s.h;
        }
        if (s.color) d["color"] = *s.color;
        items_doc.push_back(std::move(d));
    }
    return {{"width", width},
            {"height", height},
            {"background", background},
            {"plate", {{"cx", plate_cx}, {"cy", plate_cy}, {"radius", plate_radius}, {"color", plate_color}}},
            {"items", items_doc}};
}

nlohmann::json GroundTruth::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& i : items) list.push_back({{"label", i.label}, {"pixels", i.pixels}});
    return {{"plate_pixels", plate_pixels}, {"food_pixels", food_pixels}, {"items", list}};
}

GroundTruth GroundTruth::from_json(const nlohmann::json& doc) {
    GroundTruth t;
    t.plate_pixels = doc.at("plate_pixels").get<std::size_t>();
    t.food_pixels = doc.at("food_pixels").get<std::size_t>();
    for (const auto& i : doc.at("items")) t.items.push_back({i.at("label").get<std::string>(), i.at("pixels").get<std::size_t>()});
    return t;
}

SyntheticPlate generate_plate(const PlateSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) fail(ErrorKind::InvalidArgument, "plate image must be non-empty");
    if (spec.items.size() > kMaxPlateObjects)
        fail(ErrorKind::InvalidArgument, "too many objects: " + std::to_string(spec.items.size()) + " (at most " +
                                             std::to_string(kMaxPlateObjects) + ")");

    SyntheticPlate out;
    out.image = ImageBuffer(spec.width, spec.height, ColorSpace::RGB);
    std::vector<int> owner(out.image.pixel_count(), -1);
    std::vector<Rgb8> colors;
    for (const auto& s : spec.items) {
        if (s.kind == ShapeSpec::Kind::Disc && !(s.radius > 0)) fail(ErrorKind::InvalidArgument, "disc radius must be positive");
        if (s.kind == ShapeSpec::Kind::Rect && (s.w <= 0 || s.h <= 0))
            fail(ErrorKind::InvalidArgument, "rectangle sides must be positive");
        colors.push_back(s.color ? *s.color : hsv_to_rgb8(catalog_entry(s.label).hsv));
        out.truth.items.push_back({s.label, 0});
    }

    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(spec.width) + static_cast<std::size_t>(x);
            const bool on_plate = in_disc(x, y, spec.plate_cx, spec.plate_cy, spec.plate_radius);
            paint(out.image, i, on_plate ? spec.plate_color : spec.background);
            if (on_plate) ++out.truth.plate_pixels;
        }

    // Shapes are checked over their bounding boxes, which may leave the image.
    for (std::size_t k = 0; k < spec.items.size(); ++k) {
        const auto& s = spec.items[k];
        int x0, y0, x1, y1;
        if (s.kind == ShapeSpec::Kind::Disc) {
            x0 = static_cast<int>(std::floor(s.cx - s.radius)) - 1, x1 = static_cast<int>(std::ceil(s.cx + s.radius)) + 1;
            y0 = static_cast<int>(std::floor(s.cy - s.radius)) - 1, y1 = static_cast<int>(std::ceil(s.cy + s.radius)) + 1;
        } else {
            x0 = s.x, x1 = s.x + s.w - 1, y0 = s.y, y1 = s.y + s.h - 1;
        }
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                if (!in_shape(s, x, y)) continue;
                if (x < 0 || y < 0 || x >= spec.width || y >= spec.height ||
                    !in_disc(x, y, spec.plate_cx, spec.plate_cy, spec.plate_radius))
                    fail(ErrorKind::InvalidArgument, "object " + std::to_string(k) + " (" + s.label + ") extends beyond the plate");
                const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(spec.width) + static_cast<std::size_t>(x);
                if (owner[i] >= 0)
                    fail(ErrorKind::InvalidArgument, "objects " + std::to_string(owner[i]) + " and " + std::to_string(k) + " overlap");
                owner[i] = static_cast<int>(k);
                paint(out.image, i, colors[k]);
                ++out.truth.items[k].pixels;
            }
        out.truth.food_pixels += out.truth.items[k].pixels;
    }
    return out;
}

SyntheticSample generate_sample(const std::string& label, std::mt19937_64& rng, bool plate_holes) {
    const auto& entry = catalog_entry(label);
    constexpr int kSize = kNormalizedSize;
    SyntheticSample sample{ImageBuffer(kSize, kSize, ColorSpace::RGB), Mask(kSize, kSize)};
    for (std::size_t i = 0; i < sample.image.pixel_count(); ++i) paint(sample.image, i, kNeutralBackground);

    std::array<double, 3> hsv = entry.hsv;
    if (label == "plate") {
        hsv = {uniform(rng, 0.0, 360.0), uniform(rng, 0.0, 0.03), uniform(rng, 0.96, 1.0)};
    } else {
        hsv[0] = std::fmod(hsv[0] + uniform(rng, -4.0, 4.0) + 360.0, 360.0);
        hsv[1] = std::clamp(hsv[1] + uniform(rng, -0.04, 0.04), 0.0, 1.0);
        hsv[2] = std::clamp(hsv[2] + uniform(rng, -0.04, 0.04), 0.0, 1.0);
    }
    const Rgb8 color = hsv_to_rgb8(hsv);

    ShapeSpec shape;
    if (label == "plate" && plate_holes) {
        shape.radius = uniform(rng, 80.0, 115.0);
        shape.cx = uniform(rng, shape.radius + 4, kSize - shape.radius - 4);
        shape.cy = uniform(rng, shape.radius + 4, kSize - shape.radius - 4);
    } else if (rng() & 1) {
        shape.radius = uniform(rng, 40.0, 80.0);
        shape.cx = uniform(rng, shape.radius + 4, kSize - shape.radius - 4);
        shape.cy = uniform(rng, shape.radius + 4, kSize - shape.radius - 4);
    } else {
        shape.kind = ShapeSpec::Kind::Rect;
        shape.w = static_cast<int>(uniform(rng, 70.0, 150.0));
        shape.h = static_cast<int>(uniform(rng, 70.0, 150.0));
        shape.x = static_cast<int>(uniform(rng, 4.0, kSize - shape.w - 4.0));
        shape.y = static_cast<int>(uniform(rng, 4.0, kSize - shape.h - 4.0));
    }

    std::vector<ShapeSpec> holes;
    std::vector<Rgb8> hole_colors;
    if (label == "plate" && plate_holes) {
        const int count = 1 + static_cast<int>(rng() % 4);
        const auto& foods = food_catalog();
        for (int h = 0; h < count; ++h) {
            ShapeSpec hole;
            hole.radius = uniform(rng, 15.0, 35.0);
            const double reach = std::max(shape.radius - hole.radius - 2.0, 0.0);
            const double angle = uniform(rng, 0.0, 2.0 * M_PI), dist = uniform(rng, 0.0, reach);
            hole.cx = shape.cx + dist * std::cos(angle);
            hole.cy = shape.cy + dist * std::sin(angle);
            holes.push_back(hole);
            hole_colors.push_back(hsv_to_rgb8(foods[1 + rng() % (foods.size() - 1)].hsv));
        }
    }

    for (int y = 0; y < kSize; ++y)
        for (int x = 0; x < kSize; ++x) {
            if (!in_shape(shape, x, y)) continue;
            const std::size_t i = sample.mask.index(x, y);
            std::size_t hole = holes.size();
            for (std::size_t h = 0; h < holes.size() && hole == holes.size(); ++h)
                if (in_shape(holes[h], x, y)) hole = h;
            if (hole < holes.size()) {
                paint(sample.image, i, hole_colors[hole]);
                continue;
            }
            paint(sample.image, i, color);
            sample.mask.set(i);
        }
    return sample;
}

void write_synthetic_dataset(const std::filesystem::path& dir, const std::vector<std::string>& labels,
                             std::size_t per_class, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (const auto& label : labels) {
        const auto class_dir = dir / label;
        std::error_code ec;
        std::filesystem::create_directories(class_dir, ec);
        if (ec) fail(ErrorKind::Io, "cannot create " + class_dir.string() + ": " + ec.message());
        for (std::size_t n = 0; n < per_class; ++n) {
            const auto sample = generate_sample(label, rng);
            char name[64];
            std::snprintf(name, sizeof name, "%03zu.png", n);
            save_png(class_dir / name, sample.image);
        }
    }
}

} // namespace hplate
