#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "healthyplate/image.hpp"
#include "healthyplate/nutrition.hpp"
#include "healthyplate/segment.hpp"
#include "healthyplate/svm.hpp"

namespace hplate {

// Layout of the region descriptor (all values in [0, 1], hue as degrees/360):
//   [0, 9)   three dominant HSV colors of the masked pixels, largest cluster first
//   [9, 12)  per-channel HSV mean
//   [12, 15) per-channel HSV standard deviation
//   [15]     mask area / bounding-box area
inline constexpr std::size_t kFeatureDim = 16;
inline constexpr std::size_t kDominantColors = 3;

Features extract_features(const ImageBuffer& rgb, const Mask& mask);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0; // TP / (TP + FP + FN)
    std::size_t support = 0;
};

struct Metrics {
    std::vector<std::string> labels;
    // confusion[truth][predicted], indexed like `labels`
    std::vector<std::vector<std::size_t>> confusion;
    std::map<std::string, ClassMetrics> per_class;
    double overall_accuracy = 0.0;

    nlohmann::json to_json() const;
};

// Precision and recall are 0 when their denominator is 0.
Metrics metrics_from_predictions(const std::vector<std::string>& truth, const std::vector<std::string>& predicted);

Metrics evaluate(const SvmModel& model, const LabeledDataset& test);

// Labels that name the bare plate surface rather than food.
bool is_plate_label(const std::string& label, const Taxonomy& taxonomy);

// One item per food mask; plate-surface regions are dropped and the
// remaining fractions are relative to the food pixel total.
std::vector<FoodItem> classify_regions(const ImageBuffer& rgb, const std::vector<std::pair<int, Mask>>& masks,
                                       const SvmModel& model, const Taxonomy& taxonomy = Taxonomy::default_taxonomy());

} // namespace hplate
