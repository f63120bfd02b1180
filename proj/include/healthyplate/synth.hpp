#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "healthyplate/image.hpp"
#include "healthyplate/segment.hpp"

namespace hplate {

using Rgb8 = std::array<int, 3>;

// Labels with a reference color for synthetic images, in HSV (degrees, 0..1, 0..1).
struct CatalogEntry {
    std::string label;
    std::array<double, 3> hsv;
};
const std::vector<CatalogEntry>& food_catalog();
std::optional<Rgb8> catalog_color(const std::string& label);

inline constexpr std::size_t kMaxPlateObjects = 8;

struct ShapeSpec {
    enum class Kind { Disc, Rect };
    std::string label;
    Kind kind = Kind::Disc;
    double cx = 0, cy = 0, radius = 0; // disc
    int x = 0, y = 0, w = 0, h = 0;    // rect
    std::optional<Rgb8> color;         // defaults to the catalog color
};

struct PlateSpec {
    int width = 256;
    int height = 256;
    Rgb8 background{24, 24, 24};
    double plate_cx = 128, plate_cy = 128, plate_radius = 120;
    Rgb8 plate_color{255, 255, 255};
    std::vector<ShapeSpec> items;

    static PlateSpec from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

struct GroundTruthItem {
    std::string label;
    std::size_t pixels = 0;
};

struct GroundTruth {
    std::size_t plate_pixels = 0; // plate disc, food included
    std::size_t food_pixels = 0;
    std::vector<GroundTruthItem> items;

    nlohmann::json to_json() const;
    static GroundTruth from_json(const nlohmann::json& doc);
};

struct SyntheticPlate {
    ImageBuffer image; // RGB, integer-valued
    GroundTruth truth;
};

// Rasterizes without anti-aliasing: a pixel belongs to a shape iff its center
// does. Rejects more than 8 objects, overlaps, and objects off the plate.
SyntheticPlate generate_plate(const PlateSpec& spec);

// One object on a neutral gray background together with its exact mask.
struct SyntheticSample {
    ImageBuffer image;
    Mask mask;
};

inline constexpr Rgb8 kNeutralBackground{128, 128, 128};

// Random shape, size, position and color jitter around the catalog color.
// With `plate_holes`, plate samples get food-shaped cut-outs excluded from
// the mask, mimicking the plate surface left around food.
SyntheticSample generate_sample(const std::string& label, std::mt19937_64& rng, bool plate_holes = false);

// Writes dir/<label>/<label>_NNN.png for each label.
void write_synthetic_dataset(const std::filesystem::path& dir, const std::vector<std::string>& labels,
                             std::size_t per_class, std::uint64_t seed);

} // namespace hplate
