#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "healthyplate/image.hpp"

namespace hplate {

class Mask {
public:
    Mask() = default;
    Mask(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }
    std::size_t pixel_count() const noexcept { return pixel_count_; }
    bool empty() const noexcept { return pixel_count_ == 0; }

    bool test(std::size_t index) const noexcept { return bits_[index] != 0; }
    bool test(int x, int y) const noexcept { return test(index(x, y)); }
    void set(std::size_t index, bool on = true) noexcept;
    void set(int x, int y, bool on = true) noexcept { set(index(x, y), on); }

    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

    friend bool operator==(const Mask&, const Mask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
    std::size_t pixel_count_ = 0;
};

struct BoundingBox {
    int x0 = 0, y0 = 0, x1 = -1, y1 = -1; // inclusive

    int width() const noexcept { return x1 - x0 + 1; }
    int height() const noexcept { return y1 - y0 + 1; }
    void extend(int x, int y) noexcept;
    static BoundingBox merged(const BoundingBox& a, const BoundingBox& b) noexcept;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct RegionStats {
    std::size_t pixel_count = 0;
    std::array<double, 3> mean_color{}; // CIELAB
    BoundingBox bbox;

    friend bool operator==(const RegionStats&, const RegionStats&) = default;
};

// Partition of the plate pixels into connected regions. Label 0 is reserved
// for background; regions are numbered 1..region_count().
struct RegionMap {
    int width = 0;
    int height = 0;
    int connectivity = 4;
    std::vector<int> labels;
    std::vector<RegionStats> stats; // stats[id - 1]

    std::size_t region_count() const noexcept { return stats.size(); }
    int label(int x, int y) const noexcept {
        return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    const RegionStats& region(int id) const { return stats.at(static_cast<std::size_t>(id - 1)); }
    std::size_t labeled_pixels() const noexcept;

    friend bool operator==(const RegionMap&, const RegionMap&) = default;
};

struct RegionAdjacencyGraph {
    std::vector<int> nodes;
    // Unordered pair stored as (lower id, higher id) -> mean-color distance.
    std::map<std::pair<int, int>, double> edges;

    bool adjacent(int a, int b) const { return edges.contains(std::minmax(a, b)); }
};

struct BackgroundParams {
    // Minimum RGB distance from the border color for a pixel to count as foreground.
    double threshold = 40.0;
    // Smallest accepted plate component, as a fraction of the image area.
    double min_area_fraction = 0.05;
};

// Plate mask: pixels far from the median border color, largest 4-connected
// component, holes filled.
Mask subtract_background(const ImageBuffer& img, const BackgroundParams& params = {});

// Connected components over plate pixels; neighbors join iff their colors are identical.
RegionMap region_grow(const ImageBuffer& quantized, const Mask& plate, int connectivity = 4);

RegionAdjacencyGraph build_rag(const RegionMap& regions);

struct MergeParams {
    double similarity_threshold = 12.0; // CIELAB units
    std::size_t min_region_px = 0;
};

// Region merging driven by the adjacency graph: most-similar pair first while
// within threshold, then undersized regions into their most similar neighbor.
// The lower id survives each merge; ids are compacted at the end.
RegionMap region_merge(const RegionMap& regions, const MergeParams& params);

std::vector<std::pair<int, Mask>> extract_masks(const RegionMap& regions);

Mask plate_mask_of(const RegionMap& regions);

nlohmann::json to_json(const RegionMap& regions);

// Deterministic display color for a region id (0 is black).
std::array<std::uint8_t, 3> region_color(int id) noexcept;

// Indexed PNG of the labels (falls back to an RGB rendering above 255 regions).
void save_label_png(const std::filesystem::path& path, const RegionMap& regions);
void save_mask_png(const std::filesystem::path& path, const Mask& mask);

// Blends each region's display color onto `rgb` at the given opacity.
ImageBuffer overlay(const ImageBuffer& rgb, const RegionMap& regions, double alpha = 0.5);

} // namespace hplate
