#include "healthyplate/pipeline.hpp"

#include <cmath>
#include <random>

#include "healthyplate/classify.hpp"
#include "healthyplate/error.hpp"
#include "healthyplate/image_io.hpp"
#include "healthyplate/synth.hpp"

namespace hplate {

void PipelineConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) fail(ErrorKind::InvalidArgument, what);
    };
    require(color_space != ColorSpace::GRAY, "clustering space must be rgb, hsv or lab");
    require(k >= 1, "k must be at least 1");
    require(kmeans_max_iter >= 1, "k-means max_iter must be at least 1");
    require(kmeans_tol >= 0.0, "k-means tol must be non-negative");
    require(kmeans_restarts >= 1, "k-means restarts must be at least 1");
    require(connectivity == 4 || connectivity == 8, "connectivity must be 4 or 8");
    require(std::isfinite(merge_threshold) && merge_threshold >= 0.0, "merge threshold must be non-negative");
    require(background.threshold >= 0.0, "background threshold must be non-negative");
    require(background.min_area_fraction > 0.0 && background.min_area_fraction <= 1.0,
            "plate area fraction must be in (0, 1]");
    require(svm.C > 0.0, "SVM C must be positive");
    require(svm.tol > 0.0, "SVM tol must be positive");
    require(svm.max_passes >= 1, "SVM max_passes must be at least 1");
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json doc = {{"space", std::string(to_string(color_space))},
                          {"k", k},
                          {"connectivity", connectivity},
                          {"merge_threshold", merge_threshold},
                          {"seed", seed}};
    doc["min_region_px"] = min_region_px ? nlohmann::json(*min_region_px) : nlohmann::json("0.5% of plate");
    return doc;
}

nlohmann::json AssessmentReport::to_json() const {
    nlohmann::json doc = hplate::to_json(assessment);
    doc["input"] = input;
    doc["regions"] = region_count;
    doc["min_region_px"] = min_region_px;
    doc["cluster_inertia"] = cluster_inertia;
    nlohmann::json artifacts = nlohmann::json::object();
    if (overlay_png) artifacts["overlay"] = *overlay_png;
    if (label_png) artifacts["labels"] = *label_png;
    if (palette_png) artifacts["palette"] = *palette_png;
    doc["artifacts"] = artifacts;
    // The scale is informational only; no score depends on it.
    const double plate_radius_px = std::sqrt(static_cast<double>(plate_pixels) / M_PI);
    doc["metadata"] = {{"plate_pixels", plate_pixels},
                       {"plate_radius_cm", kPlateRadiusCm},
                       {"pixels_per_cm", plate_radius_px / kPlateRadiusCm}};
    return doc;
}

AssessmentReport assess_image(const std::filesystem::path& image, const PipelineConfig& config, const SvmModel& model,
                              const Taxonomy& taxonomy, const std::optional<std::filesystem::path>& out_dir) {
    config.validate();
    const ImageBuffer rgb = normalize(load_image(image));
    const ImageBuffer colors = convert_color(rgb, config.color_space);

    KMeansParams km;
    km.k = config.k;
    km.max_iter = config.kmeans_max_iter;
    km.tol = config.kmeans_tol;
    km.restarts = config.kmeans_restarts;
    km.seed = config.seed;
    ClusterModel clusters = kmeans_fit(samples_from_image(colors), km);
    clusters.color_space = config.color_space;
    const auto [quantized, palette] = quantize(colors, clusters);

    const Mask plate = subtract_background(rgb, config.background);
    const RegionMap grown = region_grow(quantized, plate, config.connectivity);
    const std::size_t min_region = config.min_region_px.value_or(
        static_cast<std::size_t>(std::ceil(kMinRegionPlateFraction * static_cast<double>(plate.pixel_count()))));
    const RegionMap regions = region_merge(grown, {config.merge_threshold, min_region});

    const auto items = classify_regions(rgb, extract_masks(regions), model, taxonomy);
    if (items.empty()) fail(ErrorKind::NoFood, "no food items");

    AssessmentReport report;
    report.input = image.string();
    report.assessment = assess(items, taxonomy);
    report.plate_pixels = plate.pixel_count();
    report.region_count = regions.region_count();
    report.min_region_px = min_region;
    report.cluster_inertia = clusters.inertia;

    if (out_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*out_dir, ec);
        if (ec) fail(ErrorKind::Io, "cannot create " + out_dir->string() + ": " + ec.message());
        const std::string stem = image.stem().string();
        const auto overlay_path = *out_dir / (stem + "_overlay.png");
        const auto label_path = *out_dir / (stem + "_labels.png");
        const auto palette_path = *out_dir / (stem + "_palette.png");
        save_png(overlay_path, overlay(rgb, regions));
        save_label_png(label_path, regions);
        save_png(palette_path, palette_swatch(palette));
        report.overlay_png = overlay_path.string();
        report.label_png = label_path.string();
        report.palette_png = palette_path.string();
    }
    return report;
}

SvmParams demo_svm_params() {
    SvmParams params;
    // Descriptor components live in [0, 1]; the default 1/dim width underfits
    // neighbouring catalog colors such as rice and the bare plate.
    params.kernel = Kernel::rbf(2.0);
    return params;
}

SvmModel demo_model(std::uint64_t seed) {
    constexpr int kSamplesPerClass = 12;
    std::mt19937_64 rng(seed);
    LabeledDataset data;
    for (const auto& entry : food_catalog()) {
        for (int n = 0; n < kSamplesPerClass; ++n) {
            const bool holes = entry.label == "plate" && n % 2 == 0;
            const auto sample = generate_sample(entry.label, rng, holes);
            data.add(extract_features(sample.image, sample.mask), entry.label);
        }
    }
    return svm_train(data, demo_svm_params());
}

} // namespace hplate
