#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "healthyplate/image.hpp"

namespace hplate {

// Dense set of equal-dimension feature points stored row-major.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t dim, std::vector<double> values);
    PointSet(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const noexcept { return size() == 0; }

    std::span<const double> operator[](std::size_t i) const noexcept { return {values_.data() + i * dim_, dim_}; }
    std::span<double> operator[](std::size_t i) noexcept { return {values_.data() + i * dim_, dim_}; }

    void push_back(std::span<const double> point);
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

double euclidean_distance(std::span<const double> x, std::span<const double> c);
double squared_distance(std::span<const double> x, std::span<const double> c) noexcept;

struct ClusterModel {
    std::size_t k = 0;
    PointSet centroids;
    std::vector<std::size_t> assignments;
    double inertia = 0.0;
    int iterations_run = 0;
    bool converged = false;
    // Space of the clustered colors; empty for generic feature points.
    std::optional<ColorSpace> color_space;
    // Inertia after every assignment step of the returned run.
    std::vector<double> inertia_trace;

    // Recomputes the within-cluster sum of squares from centroids and assignments.
    double recompute_inertia(const PointSet& samples) const;
};

struct KMeansParams {
    std::size_t k = 8;
    int max_iter = 100;
    double tol = 1e-4;
    int restarts = 5;
    std::uint64_t seed = 0;
};

// Lloyd's algorithm with seeded random initialization from distinct samples,
// keeping the lowest-inertia run over `restarts`.
ClusterModel kmeans_fit(const PointSet& samples, const KMeansParams& params);

struct MeanShiftParams {
    double bandwidth = 1.0;
    int max_iter = 300;
    double tol = 1e-4;
    // Seed from occupied bandwidth-sized grid cells instead of every sample.
    bool bin_seeding = false;
};

// Flat-kernel mean shift. Modes closer than bandwidth/2 are merged.
ClusterModel mean_shift_fit(const PointSet& samples, const MeanShiftParams& params);

// Index of the nearest centroid, ties resolved to the lowest index.
std::size_t nearest_centroid(const PointSet& centroids, std::span<const double> x) noexcept;

PointSet samples_from_image(const ImageBuffer& img);

struct Palette {
    ColorSpace color_space = ColorSpace::RGB;
    PointSet colors;
    std::vector<std::array<std::uint8_t, 3>> rgb;
};

Palette make_palette(const ClusterModel& model);

// Replaces every pixel with its nearest centroid.
std::pair<ImageBuffer, Palette> quantize(const ImageBuffer& img, const ClusterModel& model);

// Horizontal strip of square swatches, one per palette color.
ImageBuffer palette_swatch(const Palette& palette, int swatch_px = 32);

nlohmann::json to_json(const ClusterModel& model);

} // namespace hplate
