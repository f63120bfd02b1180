#include "healthyplate/segment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "healthyplate/cluster.hpp"
#include "healthyplate/error.hpp"
#include "healthyplate/image_io.hpp"

namespace hplate {

Mask::Mask(int width, int height) : width_(width), height_(height) {
    if (width < 0 || height < 0) fail(ErrorKind::InvalidArgument, "negative mask dimension");
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

void Mask::set(std::size_t index, bool on) noexcept {
    const std::uint8_t v = on ? 1 : 0;
    if (bits_[index] == v) return;
    bits_[index] = v;
    if (on)
        ++pixel_count_;
    else
        --pixel_count_;
}

void BoundingBox::extend(int x, int y) noexcept {
    if (x1 < x0) {
        x0 = x1 = x;
        y0 = y1 = y;
        return;
    }
    x0 = std::min(x0, x), x1 = std::max(x1, x);
    y0 = std::min(y0, y), y1 = std::max(y1, y);
}

BoundingBox BoundingBox::merged(const BoundingBox& a, const BoundingBox& b) noexcept {
    if (a.x1 < a.x0) return b;
    if (b.x1 < b.x0) return a;
    return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
}

std::size_t RegionMap::labeled_pixels() const noexcept {
    return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; }));
}

namespace {

constexpr std::array<std::pair<int, int>, 8> kNeighbors{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}}};

void check_connectivity(int connectivity) {
    if (connectivity != 4 && connectivity != 8) fail(ErrorKind::InvalidArgument, "connectivity must be 4 or 8");
}

std::array<double, 3> to_lab(std::span<const double> px, ColorSpace space) {
    if (space == ColorSpace::LAB) return {px[0], px[1], px[2]};
    return rgb_to_lab(pixel_to_rgb(px, space));
}

double color_distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return euclidean_distance(a, b);
}

// Labels 4-connected components of `on` pixels; returns per-pixel component
// ids (-1 for off pixels) and component sizes.
std::vector<int> label_components(const std::vector<std::uint8_t>& on, int w, int h, std::vector<std::size_t>& sizes) {
    std::vector<int> comp(on.size(), -1);
    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < on.size(); ++start) {
        if (!on[start] || comp[start] >= 0) continue;
        const int id = static_cast<int>(sizes.size());
        sizes.push_back(0);
        comp[start] = id;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            ++sizes.back();
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            for (std::size_t n = 0; n < 4; ++n) {
                const int nx = x + kNeighbors[n].first, ny = y + kNeighbors[n].second;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t j = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx);
                if (on[j] && comp[j] < 0) {
                    comp[j] = id;
                    queue.push_back(j);
                }
            }
        }
    }
    return comp;
}

} // namespace

Mask subtract_background(const ImageBuffer& img, const BackgroundParams& params) {
    if (img.color_space() != ColorSpace::RGB) fail(ErrorKind::InvalidArgument, "background subtraction needs RGB");
    if (img.empty()) fail(ErrorKind::InvalidArgument, "empty image");
    const int w = img.width(), h = img.height();

    std::array<std::vector<double>, 3> border;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x != 0 && y != 0 && x != w - 1 && y != h - 1) continue;
            const auto px = img.pixel(x, y);
            for (std::size_t c = 0; c < 3; ++c) border[c].push_back(px[c]);
        }
    std::array<double, 3> background{};
    for (std::size_t c = 0; c < 3; ++c) {
        auto mid = border[c].begin() + static_cast<std::ptrdiff_t>(border[c].size() / 2);
        std::nth_element(border[c].begin(), mid, border[c].end());
        background[c] = *mid;
    }

    std::vector<std::uint8_t> foreground(img.pixel_count(), 0);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        foreground[i] = euclidean_distance(img.pixel(i), background) > params.threshold ? 1 : 0;

    std::vector<std::size_t> sizes;
    const auto comp = label_components(foreground, w, h, sizes);
    const auto largest = std::max_element(sizes.begin(), sizes.end());
    if (largest == sizes.end() ||
        static_cast<double>(*largest) < params.min_area_fraction * static_cast<double>(img.pixel_count()))
        fail(ErrorKind::NoPlate, "no plate found");
    const int plate_id = static_cast<int>(largest - sizes.begin());

    // Holes are complement components that never reach the image border.
    std::vector<std::uint8_t> outside(img.pixel_count(), 0);
    for (std::size_t i = 0; i < outside.size(); ++i) outside[i] = comp[i] != plate_id ? 1 : 0;
    std::vector<std::size_t> outside_sizes;
    const auto outside_comp = label_components(outside, w, h, outside_sizes);
    std::vector<std::uint8_t> touches_border(outside_sizes.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x != 0 && y != 0 && x != w - 1 && y != h - 1) continue;
            const int c = outside_comp[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
            if (c >= 0) touches_border[static_cast<std::size_t>(c)] = 1;
        }

    Mask mask(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i)
        if (comp[i] == plate_id || (outside_comp[i] >= 0 && !touches_border[static_cast<std::size_t>(outside_comp[i])]))
            mask.set(i);
    return mask;
}

RegionMap region_grow(const ImageBuffer& quantized, const Mask& plate, int connectivity) {
    check_connectivity(connectivity);
    if (quantized.width() != plate.width() || quantized.height() != plate.height())
        fail(ErrorKind::InvalidArgument, "plate mask and image dimensions differ");
    const int w = quantized.width(), h = quantized.height();
    const std::size_t neighbor_count = connectivity == 8 ? 8 : 4;

    RegionMap map;
    map.width = w;
    map.height = h;
    map.connectivity = connectivity;
    map.labels.assign(quantized.pixel_count(), 0);

    auto same_color = [&](std::size_t a, std::size_t b) {
        const auto pa = quantized.pixel(a), pb = quantized.pixel(b);
        return std::equal(pa.begin(), pa.end(), pb.begin());
    };

    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < map.labels.size(); ++start) {
        if (!plate.test(start) || map.labels[start] != 0) continue;
        const int id = static_cast<int>(map.stats.size()) + 1;
        RegionStats stats;
        stats.mean_color = to_lab(quantized.pixel(start), quantized.color_space());
        map.labels[start] = id;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            ++stats.pixel_count;
            stats.bbox.extend(x, y);
            for (std::size_t n = 0; n < neighbor_count; ++n) {
                const int nx = x + kNeighbors[n].first, ny = y + kNeighbors[n].second;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t j = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx);
                if (map.labels[j] == 0 && plate.test(j) && same_color(i, j)) {
                    map.labels[j] = id;
                    queue.push_back(j);
                }
            }
        }
        map.stats.push_back(stats);
    }
    return map;
}

RegionAdjacencyGraph build_rag(const RegionMap& regions) {
    check_connectivity(regions.connectivity);
    RegionAdjacencyGraph rag;
    for (std::size_t id = 1; id <= regions.region_count(); ++id) rag.nodes.push_back(static_cast<int>(id));

    // Forward half of the neighborhood visits every adjacent pixel pair once.
    const std::array<std::pair<int, int>, 4> forward{{{1, 0}, {0, 1}, {1, 1}, {-1, 1}}};
    const std::size_t count = regions.connectivity == 8 ? 4 : 2;
    for (int y = 0; y < regions.height; ++y)
        for (int x = 0; x < regions.width; ++x) {
            const int a = regions.label(x, y);
            if (a == 0) continue;
            for (std::size_t n = 0; n < count; ++n) {
                const int nx = x + forward[n].first, ny = y + forward[n].second;
                if (nx < 0 || ny < 0 || nx >= regions.width || ny >= regions.height) continue;
                const int b = regions.label(nx, ny);
                if (b == 0 || b == a) continue;
                const auto key = std::minmax(a, b);
                if (!rag.edges.contains(key))
                    rag.edges.emplace(key, color_distance(regions.region(a).mean_color, regions.region(b).mean_color));
            }
        }
    return rag;
}

RegionMap region_merge(const RegionMap& regions, const MergeParams& params) {
    const std::size_t n = regions.region_count();
    std::vector<RegionStats> stats(n + 1);
    for (std::size_t id = 1; id <= n; ++id) stats[id] = regions.stats[id - 1];
    std::vector<std::set<int>> neighbors(n + 1);
    for (const auto& [edge, similarity] : build_rag(regions).edges) {
        neighbors[static_cast<std::size_t>(edge.first)].insert(edge.second);
        neighbors[static_cast<std::size_t>(edge.second)].insert(edge.first);
    }
    std::vector<int> absorbed_into(n + 1, 0);
    std::vector<bool> alive(n + 1, true);

    auto similarity = [&](int a, int b) {
        return color_distance(stats[static_cast<std::size_t>(a)].mean_color, stats[static_cast<std::size_t>(b)].mean_color);
    };

    auto merge = [&](int dst, int src) {
        auto& d = stats[static_cast<std::size_t>(dst)];
        const auto& s = stats[static_cast<std::size_t>(src)];
        const double nd = static_cast<double>(d.pixel_count), ns = static_cast<double>(s.pixel_count);
        for (std::size_t c = 0; c < 3; ++c) d.mean_color[c] += (s.mean_color[c] - d.mean_color[c]) * ns / (nd + ns);
        d.pixel_count += s.pixel_count;
        d.bbox = BoundingBox::merged(d.bbox, s.bbox);
        for (int other : neighbors[static_cast<std::size_t>(src)]) {
            auto& on = neighbors[static_cast<std::size_t>(other)];
            on.erase(src);
            if (other != dst) {
                on.insert(dst);
                neighbors[static_cast<std::size_t>(dst)].insert(other);
            }
        }
        neighbors[static_cast<std::size_t>(src)].clear();
        alive[static_cast<std::size_t>(src)] = false;
        absorbed_into[static_cast<std::size_t>(src)] = dst;
    };

    for (;;) {
        // Most similar adjacent pair within the threshold; ties by lower id pair.
        int best_a = 0, best_b = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 1; a <= n; ++a) {
            if (!alive[a]) continue;
            for (int b : neighbors[a]) {
                if (b <= static_cast<int>(a)) continue;
                const double s = similarity(static_cast<int>(a), b);
                if (s <= params.similarity_threshold && s < best) {
                    best = s;
                    best_a = static_cast<int>(a);
                    best_b = b;
                }
            }
        }
        if (best_a != 0) {
            merge(best_a, best_b);
            continue;
        }

        // Smallest undersized region with a neighbor, ties by lower id.
        int small = 0;
        for (std::size_t a = 1; a <= n; ++a) {
            if (!alive[a] || neighbors[a].empty() || stats[a].pixel_count >= params.min_region_px) continue;
            if (small == 0 || stats[a].pixel_count < stats[static_cast<std::size_t>(small)].pixel_count)
                small = static_cast<int>(a);
        }
        if (small == 0) break;
        int target = 0;
        double target_similarity = std::numeric_limits<double>::infinity();
        for (int b : neighbors[static_cast<std::size_t>(small)]) {
            const double s = similarity(small, b);
            if (s < target_similarity) {
                target_similarity = s;
                target = b;
            }
        }
        merge(std::min(target, small), std::max(target, small));
    }

    std::vector<int> new_id(n + 1, 0);
    RegionMap out;
    out.width = regions.width;
    out.height = regions.height;
    out.connectivity = regions.connectivity;
    for (std::size_t id = 1; id <= n; ++id) {
        if (!alive[id]) continue;
        out.stats.push_back(stats[id]);
        new_id[id] = static_cast<int>(out.stats.size());
    }
    auto resolve = [&](int id) {
        while (!alive[static_cast<std::size_t>(id)]) id = absorbed_into[static_cast<std::size_t>(id)];
        return new_id[static_cast<std::size_t>(id)];
    };
    std::vector<int> final_id(n + 1, 0);
    for (std::size_t id = 1; id <= n; ++id) final_id[id] = resolve(static_cast<int>(id));
    out.labels.resize(regions.labels.size());
    std::transform(regions.labels.begin(), regions.labels.end(), out.labels.begin(),
                   [&](int l) { return l == 0 ? 0 : final_id[static_cast<std::size_t>(l)]; });
    return out;
}

std::vector<std::pair<int, Mask>> extract_masks(const RegionMap& regions) {
    std::vector<std::pair<int, Mask>> masks;
    masks.reserve(regions.region_count());
    for (std::size_t id = 1; id <= regions.region_count(); ++id) masks.emplace_back(static_cast<int>(id), Mask(regions.width, regions.height));
    for (std::size_t i = 0; i < regions.labels.size(); ++i) {
        const int l = regions.labels[i];
        if (l != 0) masks[static_cast<std::size_t>(l - 1)].second.set(i);
    }
    return masks;
}

Mask plate_mask_of(const RegionMap& regions) {
    Mask mask(regions.width, regions.height);
    for (std::size_t i = 0; i < regions.labels.size(); ++i)
        if (regions.labels[i] != 0) mask.set(i);
    return mask;
}

nlohmann::json to_json(const RegionMap& regions) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t id = 1; id <= regions.region_count(); ++id) {
        const auto& s = regions.stats[id - 1];
        list.push_back({{"id", id},
                        {"pixels", s.pixel_count},
                        {"mean_color", s.mean_color},
                        {"bbox", {s.bbox.x0, s.bbox.y0, s.bbox.x1, s.bbox.y1}}});
    }
    return {{"width", regions.width}, {"height", regions.height}, {"connectivity", regions.connectivity},
            {"regions", list}};
}

std::array<std::uint8_t, 3> region_color(int id) noexcept {
    if (id == 0) return {0, 0, 0};
    const auto rgb = hsv_to_rgb({std::fmod(id * 137.508, 360.0), 0.65, 0.95});
    return {static_cast<std::uint8_t>(std::lround(rgb[0])), static_cast<std::uint8_t>(std::lround(rgb[1])),
            static_cast<std::uint8_t>(std::lround(rgb[2]))};
}

void save_label_png(const std::filesystem::path& path, const RegionMap& regions) {
    if (regions.region_count() <= 255) {
        std::vector<std::array<std::uint8_t, 3>> palette;
        for (std::size_t id = 0; id <= regions.region_count(); ++id) palette.push_back(region_color(static_cast<int>(id)));
        std::vector<std::uint8_t> indices(regions.labels.begin(), regions.labels.end());
        save_indexed_png(path, regions.width, regions.height, indices, palette);
        return;
    }
    ImageBuffer rgb(regions.width, regions.height, ColorSpace::RGB);
    for (std::size_t i = 0; i < regions.labels.size(); ++i) {
        const auto c = region_color(regions.labels[i]);
        auto px = rgb.pixel(i);
        px[0] = c[0], px[1] = c[1], px[2] = c[2];
    }
    save_png(path, rgb);
}

void save_mask_png(const std::filesystem::path& path, const Mask& mask) {
    save_bilevel_png(path, mask.width(), mask.height(), mask.bits());
}

ImageBuffer overlay(const ImageBuffer& rgb, const RegionMap& regions, double alpha) {
    if (rgb.color_space() != ColorSpace::RGB) fail(ErrorKind::InvalidArgument, "overlay needs an RGB image");
    if (rgb.width() != regions.width || rgb.height() != regions.height)
        fail(ErrorKind::InvalidArgument, "overlay dimensions differ");
    ImageBuffer out = rgb;
    for (std::size_t i = 0; i < regions.labels.size(); ++i) {
        if (regions.labels[i] == 0) continue;
        const auto c = region_color(regions.labels[i]);
        auto px = out.pixel(i);
        for (std::size_t ch = 0; ch < 3; ++ch) px[ch] = (1.0 - alpha) * px[ch] + alpha * c[ch];
    }
    return out;
}

} // namespace hplate
