#include "healthyplate/classify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "healthyplate/cluster.hpp"
#include "healthyplate/error.hpp"

namespace hplate {

namespace {

std::uint64_t fnv1a(const Mask& mask) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (int v : {mask.width(), mask.height()})
        for (int s = 0; s < 32; s += 8) mix((static_cast<std::uint32_t>(v) >> s) & 0xFF);
    for (std::uint8_t b : mask.bits()) mix(b);
    return h;
}

} // namespace

Features extract_features(const ImageBuffer& rgb, const Mask& mask) {
    if (rgb.color_space() != ColorSpace::RGB) fail(ErrorKind::InvalidArgument, "feature extraction needs an RGB image");
    if (rgb.width() != mask.width() || rgb.height() != mask.height())
        fail(ErrorKind::InvalidArgument, "mask and image dimensions differ");
    if (mask.empty()) fail(ErrorKind::InvalidArgument, "empty mask");

    PointSet pixels(3);
    BoundingBox bbox;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.test(x, y)) continue;
            const auto p = rgb.pixel(x, y);
            const auto hsv = rgb_to_hsv({p[0], p[1], p[2]});
            const std::array<double, 3> scaled{hsv[0] / 360.0, hsv[1], hsv[2]};
            pixels.push_back(scaled);
            bbox.extend(x, y);
        }
    const std::size_t n = pixels.size();

    KMeansParams params;
    params.k = std::min(kDominantColors, n);
    params.max_iter = 50;
    params.tol = 1e-6;
    params.restarts = 3;
    params.seed = fnv1a(mask);
    const ClusterModel model = kmeans_fit(pixels, params);

    std::vector<std::size_t> population(model.k, 0);
    for (std::size_t a : model.assignments) ++population[a];
    std::vector<std::size_t> order(model.k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (population[a] != population[b]) return population[a] > population[b];
        const auto ca = model.centroids[a], cb = model.centroids[b];
        return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
    });

    Features f;
    f.reserve(kFeatureDim);
    for (std::size_t slot = 0; slot < kDominantColors; ++slot) {
        const auto c = model.centroids[order[std::min(slot, order.size() - 1)]];
        f.insert(f.end(), c.begin(), c.end());
    }

    std::array<double, 3> mean{}, var{};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) mean[c] += pixels[i][c];
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            const double d = pixels[i][c] - mean[c];
            var[c] += d * d;
        }
    f.insert(f.end(), mean.begin(), mean.end());
    for (double v : var) f.push_back(std::sqrt(v / static_cast<double>(n)));

    f.push_back(static_cast<double>(n) / (static_cast<double>(bbox.width()) * static_cast<double>(bbox.height())));
    return f;
}

Metrics metrics_from_predictions(const std::vector<std::string>& truth, const std::vector<std::string>& predicted) {
    if (truth.size() != predicted.size()) fail(ErrorKind::InvalidArgument, "truth and prediction counts differ");
    std::set<std::string> all(truth.begin(), truth.end());
    all.insert(predicted.begin(), predicted.end());

    Metrics m;
    m.labels.assign(all.begin(), all.end());
    const std::size_t c = m.labels.size();
    m.confusion.assign(c, std::vector<std::size_t>(c, 0));
    auto index = [&](const std::string& l) {
        return static_cast<std::size_t>(std::lower_bound(m.labels.begin(), m.labels.end(), l) - m.labels.begin());
    };
    for (std::size_t i = 0; i < truth.size(); ++i) ++m.confusion[index(truth[i])][index(predicted[i])];

    std::size_t correct = 0;
    for (std::size_t k = 0; k < c; ++k) {
        const std::size_t tp = m.confusion[k][k];
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < c; ++j) {
            row += m.confusion[k][j];
            col += m.confusion[j][k];
        }
        const std::size_t fp = col - tp, fn = row - tp;
        auto ratio = [](std::size_t num, std::size_t den) {
            return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
        };
        m.per_class[m.labels[k]] = {ratio(tp, tp + fp), ratio(tp, tp + fn), ratio(tp, tp + fp + fn), row};
        correct += tp;
    }
    m.overall_accuracy = truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
    return m;
}

nlohmann::json Metrics::to_json() const {
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [label, cm] : per_class)
        classes[label] = {{"precision", cm.precision},
                          {"recall", cm.recall},
                          {"accuracy", cm.accuracy},
                          {"support", cm.support}};
    return {{"labels", labels}, {"confusion", confusion}, {"per_class", classes}, {"overall_accuracy", overall_accuracy}};
}

Metrics evaluate(const SvmModel& model, const LabeledDataset& test) {
    if (test.size() == 0) fail(ErrorKind::InvalidArgument, "evaluation set is empty");
    std::vector<std::string> predicted;
    predicted.reserve(test.size());
    for (const auto& x : test.samples) predicted.push_back(svm_predict(model, x).label);
    return metrics_from_predictions(test.labels, predicted);
}

bool is_plate_label(const std::string& label, const Taxonomy& taxonomy) {
    return label == "plate" || label == "background" || taxonomy.category_of(label) == Category::PlateSurface;
}

std::vector<FoodItem> classify_regions(const ImageBuffer& rgb, const std::vector<std::pair<int, Mask>>& masks,
                                       const SvmModel& model, const Taxonomy& taxonomy) {
    std::vector<FoodItem> items;
    std::size_t food_total = 0;
    for (const auto& [id, mask] : masks) {
        if (mask.empty()) continue;
        const auto label = svm_predict(model, extract_features(rgb, mask)).label;
        if (is_plate_label(label, taxonomy)) continue;
        items.push_back({id, label, taxonomy.category_of(label), mask.pixel_count(), 0.0});
        food_total += mask.pixel_count();
    }
    for (auto& item : items) item.fraction = static_cast<double>(item.pixel_count) / static_cast<double>(food_total);
    return items;
}

} // namespace hplate
