#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "healthyplate/cluster.hpp"
#include "healthyplate/image.hpp"
#include "healthyplate/nutrition.hpp"
#include "healthyplate/segment.hpp"
#include "healthyplate/svm.hpp"

namespace hplate {

struct PipelineConfig {
    ColorSpace color_space = ColorSpace::HSV;
    std::size_t k = 8;
    int kmeans_max_iter = 100;
    double kmeans_tol = 1e-4;
    int kmeans_restarts = 5;
    int connectivity = 4;
    double merge_threshold = 12.0;
    // Absolute minimum region size; defaults to 0.5% of the plate area.
    std::optional<std::size_t> min_region_px;
    BackgroundParams background;
    SvmParams svm;
    std::uint64_t seed = 0;

    // Throws InvalidArgument for out-of-range fields.
    void validate() const;
    nlohmann::json to_json() const;
};

inline constexpr double kMinRegionPlateFraction = 0.005;
inline constexpr double kPlateRadiusCm = 10.0;

struct AssessmentReport {
    std::string input;
    PlateAssessment assessment;
    std::size_t plate_pixels = 0;
    std::size_t region_count = 0;
    std::size_t min_region_px = 0;
    double cluster_inertia = 0.0;
    std::optional<std::string> overlay_png;
    std::optional<std::string> label_png;
    std::optional<std::string> palette_png;

    nlohmann::json to_json() const;
};

// normalize -> convert -> k-means -> quantize -> plate mask -> region grow ->
// region merge -> masks -> classification -> assessment. Artifacts are
// written when `out_dir` is set.
AssessmentReport assess_image(const std::filesystem::path& image, const PipelineConfig& config, const SvmModel& model,
                              const Taxonomy& taxonomy, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Classifier trained on synthetic samples of every catalog label.
SvmModel demo_model(std::uint64_t seed = 7);

// SVM settings used for the demo model.
SvmParams demo_svm_params();

} // namespace hplate
