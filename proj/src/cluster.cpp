#include "healthyplate/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <random>

#include "healthyplate/error.hpp"

namespace hplate {

PointSet::PointSet(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0 && !values_.empty()) fail(ErrorKind::InvalidArgument, "zero-dimension point set with values");
    if (dim_ != 0 && values_.size() % dim_ != 0)
        fail(ErrorKind::InvalidArgument, "point set values are not a multiple of the dimension");
}

PointSet::PointSet(std::initializer_list<std::initializer_list<double>> rows) {
    for (const auto& row : rows) push_back(std::span<const double>(row.begin(), row.size()));
}

void PointSet::push_back(std::span<const double> point) {
    if (dim_ == 0 && values_.empty()) dim_ = point.size();
    if (point.size() != dim_) fail(ErrorKind::InvalidArgument, "point dimension mismatch");
    values_.insert(values_.end(), point.begin(), point.end());
}

double squared_distance(std::span<const double> x, std::span<const double> c) noexcept {
    double sum = 0.0;
    for (std::size_t p = 0; p < x.size(); ++p) {
        const double d = x[p] - c[p];
        sum += d * d;
    }
    return sum;
}

double euclidean_distance(std::span<const double> x, std::span<const double> c) {
    if (x.size() != c.size()) fail(ErrorKind::InvalidArgument, "distance between points of different dimension");
    return std::sqrt(squared_distance(x, c));
}

std::size_t nearest_centroid(const PointSet& centroids, std::span<const double> x) noexcept {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.size(); ++j) {
        const double d = squared_distance(x, centroids[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

double ClusterModel::recompute_inertia(const PointSet& samples) const {
    double j = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) j += squared_distance(samples[i], centroids[assignments[i]]);
    return j;
}

namespace {

// Unbiased draw in [0, n) that does not depend on the standard library's
// distribution implementations.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = rng();
        if (r >= threshold) return r % n;
    }
}

bool same_point(std::span<const double> a, std::span<const double> b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

PointSet initial_centroids(const PointSet& samples, std::size_t k, std::mt19937_64& rng) {
    const std::size_t n = samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    PointSet chosen(samples.dim());
    for (std::size_t pos = 0; pos < n && chosen.size() < k; ++pos) {
        const std::size_t pick = pos + static_cast<std::size_t>(uniform_below(rng, n - pos));
        std::swap(order[pos], order[pick]);
        const auto candidate = samples[order[pos]];
        bool duplicate = false;
        for (std::size_t j = 0; j < chosen.size() && !duplicate; ++j) duplicate = same_point(chosen[j], candidate);
        if (!duplicate) chosen.push_back(candidate);
    }
    // Fewer than k distinct values: duplicates stay, their clusters remain empty.
    for (std::size_t j = 0; chosen.size() < k; ++j) {
        const std::vector<double> copy(chosen[j].begin(), chosen[j].end());
        chosen.push_back(copy);
    }
    return chosen;
}

double assign(const PointSet& samples, const PointSet& centroids, std::vector<std::size_t>& assignments) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t j = nearest_centroid(centroids, samples[i]);
        assignments[i] = j;
        inertia += squared_distance(samples[i], centroids[j]);
    }
    return inertia;
}

// Recomputes centroids as cluster means. Empty clusters are moved onto the
// sample farthest from its nearest non-empty centroid. Returns true if any
// cluster was empty.
bool update_centroids(const PointSet& samples, const std::vector<std::size_t>& assignments, PointSet& centroids) {
    const std::size_t k = centroids.size();
    const std::size_t dim = samples.dim();
    // Means are accumulated as offsets from each cluster's first member so a
    // cluster of identical values reproduces that value exactly.
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0), first(k, 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t j = assignments[i];
        if (counts[j]++ == 0) first[j] = i;
        const auto x = samples[i];
        const auto x0 = samples[first[j]];
        for (std::size_t p = 0; p < dim; ++p) sums[j * dim + p] += x[p] - x0[p];
    }

    std::vector<std::size_t> empty;
    for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
            empty.push_back(j);
            continue;
        }
        auto c = centroids[j];
        const auto x0 = samples[first[j]];
        for (std::size_t p = 0; p < dim; ++p) c[p] = x0[p] + sums[j * dim + p] / static_cast<double>(counts[j]);
    }
    if (empty.empty()) return false;

    std::vector<double> nearest(samples.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (counts[j] > 0) nearest[i] = std::min(nearest[i], squared_distance(samples[i], centroids[j]));

    for (std::size_t j : empty) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (nearest[i] > nearest[far]) far = i;
        if (!(nearest[far] > 0.0)) break; // every sample already sits on a centroid
        auto c = centroids[j];
        std::copy(samples[far].begin(), samples[far].end(), c.begin());
        for (std::size_t i = 0; i < samples.size(); ++i)
            nearest[i] = std::min(nearest[i], squared_distance(samples[i], centroids[j]));
    }
    return true;
}

ClusterModel lloyd(const PointSet& samples, const KMeansParams& params, std::uint64_t run) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);

    ClusterModel model;
    model.k = params.k;
    model.centroids = initial_centroids(samples, params.k, rng);
    model.assignments.assign(samples.size(), 0);
    std::vector<std::size_t> previous;

    for (int it = 1; it <= params.max_iter; ++it) {
        model.iterations_run = it;
        model.inertia = assign(samples, model.centroids, model.assignments);
        model.inertia_trace.push_back(model.inertia);
        if (it > 1 && model.assignments == previous) {
            model.converged = true;
            return model;
        }
        previous = model.assignments;

        const PointSet before = model.centroids;
        const bool repaired = update_centroids(samples, model.assignments, model.centroids);
        double shift = 0.0;
        for (std::size_t j = 0; j < model.k; ++j)
            shift = std::max(shift, std::sqrt(squared_distance(before[j], model.centroids[j])));
        if (shift <= params.tol && !repaired) {
            model.converged = true;
            break;
        }
    }
    // Align assignments and inertia with the final centroids.
    model.inertia = assign(samples, model.centroids, model.assignments);
    model.inertia_trace.push_back(model.inertia);
    return model;
}

} // namespace

ClusterModel kmeans_fit(const PointSet& samples, const KMeansParams& params) {
    if (samples.empty()) fail(ErrorKind::InvalidArgument, "k-means needs at least one sample");
    if (params.k < 1) fail(ErrorKind::InvalidArgument, "k must be at least 1");
    if (params.k > samples.size()) fail(ErrorKind::InvalidArgument, "k exceeds the number of samples");
    if (params.max_iter < 1) fail(ErrorKind::InvalidArgument, "max_iter must be at least 1");
    if (!(params.tol >= 0.0)) fail(ErrorKind::InvalidArgument, "tol must be non-negative");
    const int restarts = std::max(params.restarts, 1);

    std::vector<ClusterModel> runs(static_cast<std::size_t>(restarts));
    if (restarts == 1 || samples.size() * params.k < 4096) {
        for (int r = 0; r < restarts; ++r) runs[static_cast<std::size_t>(r)] = lloyd(samples, params, r);
    } else {
        std::vector<std::future<ClusterModel>> jobs;
        for (int r = 0; r < restarts; ++r)
            jobs.push_back(std::async(std::launch::async, [&, r] { return lloyd(samples, params, r); }));
        for (int r = 0; r < restarts; ++r) runs[static_cast<std::size_t>(r)] = jobs[static_cast<std::size_t>(r)].get();
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].inertia < runs[best].inertia) best = r;
    return std::move(runs[best]);
}

ClusterModel mean_shift_fit(const PointSet& samples, const MeanShiftParams& params) {
    if (samples.empty()) fail(ErrorKind::InvalidArgument, "mean shift needs at least one sample");
    if (!(params.bandwidth > 0.0)) fail(ErrorKind::InvalidArgument, "bandwidth must be positive");
    const std::size_t dim = samples.dim();
    const double radius2 = params.bandwidth * params.bandwidth;

    PointSet seeds(dim);
    if (params.bin_seeding) {
        std::map<std::vector<long long>, std::pair<std::vector<double>, std::size_t>> bins;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            std::vector<long long> key(dim);
            for (std::size_t p = 0; p < dim; ++p)
                key[p] = static_cast<long long>(std::floor(samples[i][p] / params.bandwidth));
            auto& [sum, count] = bins[key];
            sum.resize(dim, 0.0);
            for (std::size_t p = 0; p < dim; ++p) sum[p] += samples[i][p];
            ++count;
        }
        for (auto& [key, acc] : bins) {
            for (double& v : acc.first) v /= static_cast<double>(acc.second);
            seeds.push_back(acc.first);
        }
    } else {
        seeds = samples;
    }

    struct Mode {
        std::vector<double> point;
        std::size_t intensity;
    };
    std::vector<Mode> modes;
    int max_iterations = 0;
    bool all_converged = true;
    std::vector<double> mean(dim);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        std::vector<double> point(seeds[s].begin(), seeds[s].end());
        std::size_t in_window = 0;
        bool converged = false;
        int it = 0;
        while (it < params.max_iter) {
            ++it;
            std::fill(mean.begin(), mean.end(), 0.0);
            in_window = 0;
            for (std::size_t i = 0; i < samples.size(); ++i) {
                if (squared_distance(samples[i], point) <= radius2) {
                    for (std::size_t p = 0; p < dim; ++p) mean[p] += samples[i][p];
                    ++in_window;
                }
            }
            if (in_window == 0) break;
            for (double& v : mean) v /= static_cast<double>(in_window);
            const double shift = std::sqrt(squared_distance(mean, point));
            point = mean;
            if (shift <= params.tol) {
                converged = true;
                break;
            }
        }
        max_iterations = std::max(max_iterations, it);
        if (in_window == 0) continue;
        all_converged = all_converged && converged;
        modes.push_back({std::move(point), in_window});
    }
    if (modes.empty()) fail(ErrorKind::InvalidArgument, "mean shift found no modes; bandwidth too small for bin seeding");

    std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.intensity != b.intensity) return a.intensity > b.intensity;
        return a.point < b.point;
    });
    const double merge2 = (params.bandwidth / 2.0) * (params.bandwidth / 2.0);
    ClusterModel model;
    model.centroids = PointSet(dim);
    for (const Mode& m : modes) {
        bool distinct = true;
        for (std::size_t j = 0; j < model.centroids.size() && distinct; ++j)
            distinct = squared_distance(model.centroids[j], m.point) >= merge2;
        if (distinct) model.centroids.push_back(m.point);
    }
    model.k = model.centroids.size();
    model.assignments.assign(samples.size(), 0);
    model.inertia = assign(samples, model.centroids, model.assignments);
    model.inertia_trace.push_back(model.inertia);
    model.iterations_run = max_iterations;
    model.converged = all_converged;
    return model;
}

PointSet samples_from_image(const ImageBuffer& img) { return PointSet(img.channels(), img.data()); }

Palette make_palette(const ClusterModel& model) {
    if (!model.color_space) fail(ErrorKind::InvalidArgument, "palette needs a model fit on image colors");
    Palette palette;
    palette.color_space = *model.color_space;
    palette.colors = model.centroids;
    for (std::size_t j = 0; j < model.centroids.size(); ++j) {
        const auto rgb = pixel_to_rgb(model.centroids[j], palette.color_space);
        palette.rgb.push_back({static_cast<std::uint8_t>(std::lround(rgb[0])),
                               static_cast<std::uint8_t>(std::lround(rgb[1])),
                               static_cast<std::uint8_t>(std::lround(rgb[2]))});
    }
    return palette;
}

std::pair<ImageBuffer, Palette> quantize(const ImageBuffer& img, const ClusterModel& model) {
    if (!model.color_space || *model.color_space != img.color_space())
        fail(ErrorKind::InvalidArgument, "model was not fit in the image's color space");
    if (model.centroids.dim() != img.channels())
        fail(ErrorKind::InvalidArgument, "model dimension does not match image channels");
    ImageBuffer out(img.width(), img.height(), img.color_space());
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const auto c = model.centroids[nearest_centroid(model.centroids, img.pixel(i))];
        std::copy(c.begin(), c.end(), out.pixel(i).begin());
    }
    return {std::move(out), make_palette(model)};
}

ImageBuffer palette_swatch(const Palette& palette, int swatch_px) {
    const int n = static_cast<int>(palette.rgb.size());
    if (n == 0 || swatch_px <= 0) fail(ErrorKind::InvalidArgument, "empty palette");
    ImageBuffer out(n * swatch_px, swatch_px, ColorSpace::RGB);
    for (int y = 0; y < swatch_px; ++y)
        for (int x = 0; x < n * swatch_px; ++x) {
            const auto& c = palette.rgb[static_cast<std::size_t>(x / swatch_px)];
            auto px = out.pixel(x, y);
            px[0] = c[0], px[1] = c[1], px[2] = c[2];
        }
    return out;
}

nlohmann::json to_json(const ClusterModel& model) {
    nlohmann::json centroids = nlohmann::json::array();
    for (std::size_t j = 0; j < model.centroids.size(); ++j) {
        const auto c = model.centroids[j];
        centroids.push_back(std::vector<double>(c.begin(), c.end()));
    }
    return {{"k", model.k},
            {"centroids", centroids},
            {"inertia", model.inertia},
            {"color_space", model.color_space ? std::string(to_string(*model.color_space)) : std::string("none")}};
}

} // namespace hplate
