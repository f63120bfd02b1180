// Reference implementations and random-input generators shared by the unit
// tests and the acceptance runner. Everything here is written independently
// of the library code it checks: straightforward loops, no shared helpers.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "healthyplate/cluster.hpp"
#include "healthyplate/image.hpp"
#include "healthyplate/segment.hpp"

namespace oracle {

using Vec3 = std::array<double, 3>;

// sRGB <-> CIELAB (D65) in the CIE epsilon/kappa formulation, with the
// XYZ -> linear RGB matrix obtained by inverting the forward matrix.
struct ReferenceLab {
    using Mat3 = std::array<std::array<double, 3>, 3>;
    static constexpr Mat3 kToXyz{{{0.4124564, 0.3575761, 0.1804375},
                                  {0.2126729, 0.7151522, 0.0721750},
                                  {0.0193339, 0.1191920, 0.9503041}}};
    static constexpr double kEpsilon = 216.0 / 24389.0;
    static constexpr double kKappa = 24389.0 / 27.0;
    static constexpr Vec3 kWhite{0.95047, 1.0, 1.08883};

    static Mat3 inverse(const Mat3& m) {
        const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        Mat3 r{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                // cofactor of m[j][i]
                const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
                r[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
            }
        return r;
    }

    static double linearize(double c) {
        c /= 255.0;
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
    static double encode(double c) {
        const double v = c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
        return std::clamp(v * 255.0, 0.0, 255.0);
    }

    static Vec3 rgb_to_lab(const Vec3& rgb) {
        Vec3 lin{linearize(rgb[0]), linearize(rgb[1]), linearize(rgb[2])};
        Vec3 f{};
        for (int i = 0; i < 3; ++i) {
            double t = 0;
            for (int j = 0; j < 3; ++j) t += kToXyz[i][j] * lin[j];
            t /= kWhite[i];
            f[i] = t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
        }
        return {116.0 * f[1] - 16.0, 500.0 * (f[0] - f[1]), 200.0 * (f[1] - f[2])};
    }

    static Vec3 lab_to_rgb(const Vec3& lab) {
        const double fy = (lab[0] + 16.0) / 116.0;
        const double fx = fy + lab[1] / 500.0;
        const double fz = fy - lab[2] / 200.0;
        auto inv = [](double f) { return f * f * f > kEpsilon ? f * f * f : (116.0 * f - 16.0) / kKappa; };
        const double yr = lab[0] > kKappa * kEpsilon ? fy * fy * fy : lab[0] / kKappa;
        const Vec3 xyz{inv(fx) * kWhite[0], yr * kWhite[1], inv(fz) * kWhite[2]};
        const Mat3 m = inverse(kToXyz);
        Vec3 out{};
        for (int i = 0; i < 3; ++i) {
            double t = 0;
            for (int j = 0; j < 3; ++j) t += m[i][j] * xyz[j];
            out[i] = encode(t);
        }
        return out;
    }
};

// Minimum within-cluster sum of squares over every labelling of the points
// with at most k labels.
inline double brute_force_kmeans(const std::vector<std::vector<double>>& pts, int k) {
    const std::size_t n = pts.size();
    const std::size_t dim = pts.empty() ? 0 : pts[0].size();
    std::vector<int> label(n, 0);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        double total = 0;
        for (int c = 0; c < k; ++c) {
            std::vector<double> mean(dim, 0.0);
            int count = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (label[i] == c) {
                    ++count;
                    for (std::size_t d = 0; d < dim; ++d) mean[d] += pts[i][d];
                }
            if (count == 0) continue;
            for (double& m : mean) m /= count;
            for (std::size_t i = 0; i < n; ++i)
                if (label[i] == c)
                    for (std::size_t d = 0; d < dim; ++d) total += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
        }
        best = std::min(best, total);
        std::size_t pos = 0;
        while (pos < n && ++label[pos] == k) label[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

// Flat-kernel mean shift fixed points, one per sample, iterated naively.
inline std::vector<std::vector<double>> brute_force_mean_shift_modes(const std::vector<std::vector<double>>& pts,
                                                                     double bandwidth) {
    std::vector<std::vector<double>> modes;
    for (const auto& start : pts) {
        std::vector<double> p = start;
        for (int it = 0; it < 10000; ++it) {
            std::vector<double> sum(p.size(), 0.0);
            int count = 0;
            for (const auto& q : pts) {
                double d2 = 0;
                for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - q[i]) * (p[i] - q[i]);
                if (d2 <= bandwidth * bandwidth) {
                    ++count;
                    for (std::size_t i = 0; i < p.size(); ++i) sum[i] += q[i];
                }
            }
            for (double& s : sum) s /= count;
            if (sum == p) break;
            p = sum;
        }
        bool known = false;
        for (const auto& m : modes) {
            double d2 = 0;
            for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - m[i]) * (p[i] - m[i]);
            if (d2 < 1e-12) known = true;
        }
        if (!known) modes.push_back(p);
    }
    std::sort(modes.begin(), modes.end());
    return modes;
}

// Partition checks over a region map and the mask it was grown from.
struct PartitionReport {
    bool covers = true;      // labeled exactly where the plate mask is set
    bool disjoint = true;    // per-region stats agree with the label raster
    bool connected = true;   // every region is one component
    bool ids_compact = true; // labels are exactly 1..region_count
    std::string detail;
    bool ok() const { return covers && disjoint && connected && ids_compact; }
};

inline PartitionReport check_partition(const hplate::RegionMap& map, const hplate::Mask& plate) {
    PartitionReport r;
    const int w = map.width, h = map.height;
    const int count = static_cast<int>(map.region_count());
    std::vector<std::size_t> seen(static_cast<std::size_t>(count) + 1, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int id = map.label(x, y);
            if ((id != 0) != plate.test(x, y)) {
                r.covers = false;
                r.detail = "coverage differs at (" + std::to_string(x) + "," + std::to_string(y) + ")";
            }
            if (id < 0 || id > count) {
                r.ids_compact = false;
                r.detail = "label out of range";
                return r;
            }
            ++seen[static_cast<std::size_t>(id)];
        }
    for (int id = 1; id <= count; ++id) {
        if (seen[static_cast<std::size_t>(id)] == 0) r.ids_compact = false;
        if (seen[static_cast<std::size_t>(id)] != map.region(id).pixel_count) {
            r.disjoint = false;
            r.detail = "pixel count of region " + std::to_string(id) + " disagrees with the raster";
        }
    }
    const bool eight = map.connectivity == 8;
    std::vector<char> visited(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    std::vector<char> started(static_cast<std::size_t>(count) + 1, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int id = map.label(x, y);
            if (id == 0 || visited[static_cast<std::size_t>(y * w + x)]) continue;
            if (started[static_cast<std::size_t>(id)]) {
                r.connected = false;
                r.detail = "region " + std::to_string(id) + " has several components";
                continue;
            }
            started[static_cast<std::size_t>(id)] = 1;
            std::deque<std::pair<int, int>> queue{{x, y}};
            visited[static_cast<std::size_t>(y * w + x)] = 1;
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        auto& v = visited[static_cast<std::size_t>(ny * w + nx)];
                        if (v || map.label(nx, ny) != id) continue;
                        v = 1;
                        queue.push_back({nx, ny});
                    }
            }
        }
    return r;
}

// Region merging simulated on the raster: every step recomputes regions,
// adjacency and mean CIELAB colors from scratch.
inline std::vector<int> simulate_merge(const hplate::ImageBuffer& quantized, const std::vector<int>& labels0,
                                       int connectivity, double threshold, std::size_t min_px) {
    const int w = quantized.width(), h = quantized.height();
    std::vector<int> labels = labels0;
    std::vector<Vec3> lab(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto rgb = hplate::pixel_to_rgb(quantized.pixel(i), quantized.color_space());
        lab[i] = hplate::rgb_to_lab(rgb);
    }
    for (;;) {
        // Offsets from the first member keep single-color means exact.
        std::map<int, std::pair<Vec3, std::size_t>> acc;
        std::map<int, std::size_t> first;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == 0) continue;
            first.emplace(labels[i], i);
            auto& [sum, n] = acc[labels[i]];
            for (int c = 0; c < 3; ++c) sum[c] += lab[i][c] - lab[first[labels[i]]][c];
            ++n;
        }
        std::map<int, Vec3> mean;
        for (auto& [id, a] : acc)
            for (int c = 0; c < 3; ++c) mean[id][c] = lab[first[id]][c] + a.first[c] / static_cast<double>(a.second);
        std::set<std::pair<int, int>> edges;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const int a = labels[static_cast<std::size_t>(y * w + x)];
                if (a == 0) continue;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const int b = labels[static_cast<std::size_t>(ny * w + nx)];
                        if (b != 0 && b != a) edges.insert(std::minmax(a, b));
                    }
            }
        auto dist = [&](int a, int b) {
            double d2 = 0;
            for (int c = 0; c < 3; ++c) d2 += (mean[a][c] - mean[b][c]) * (mean[a][c] - mean[b][c]);
            return std::sqrt(d2);
        };
        int keep = 0, drop = 0;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [a, b] : edges) {
            const double d = dist(a, b);
            if (d <= threshold && d < best) {
                best = d;
                keep = a;
                drop = b;
            }
        }
        if (keep == 0) {
            int small = 0;
            for (const auto& [id, a] : acc) {
                if (a.second >= min_px) continue;
                bool has_neighbor = false;
                for (const auto& e : edges) has_neighbor |= e.first == id || e.second == id;
                if (!has_neighbor) continue;
                if (small == 0 || a.second < acc[small].second) small = id;
            }
            if (small == 0) break;
            int target = 0;
            double td = std::numeric_limits<double>::infinity();
            for (const auto& [a, b] : edges) {
                if (a != small && b != small) continue;
                const int other = a == small ? b : a;
                const double d = dist(small, other);
                if (d < td || (d == td && other < target)) {
                    td = d;
                    target = other;
                }
            }
            keep = std::min(small, target);
            drop = std::max(small, target);
        }
        for (int& l : labels)
            if (l == drop) l = keep;
    }
    // Compact relabel in order of first id.
    std::map<int, int> remap;
    for (int l : labels)
        if (l != 0) remap[l] = 0;
    int next = 0;
    for (auto& [from, to] : remap) to = ++next;
    for (int& l : labels)
        if (l != 0) l = remap[l];
    return labels;
}

// Soft-margin dual by exhaustive active-set enumeration. Each variable is at
// 0, at C, or free; the free block is solved from its KKT system and the best
// feasible objective wins. Returns alphas and the bias (NaN when no variable
// is free).
struct DualSolution {
    std::vector<double> alpha;
    double bias = std::numeric_limits<double>::quiet_NaN();
    double objective = -std::numeric_limits<double>::infinity();
};

inline std::vector<double> solve_linear(std::vector<std::vector<double>> a, std::vector<double> b, bool& ok) {
    const std::size_t n = b.size();
    ok = true;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12) {
            ok = false;
            return {};
        }
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

inline DualSolution brute_force_dual(const std::vector<std::vector<double>>& K, const std::vector<int>& y, double C) {
    const std::size_t n = y.size();
    DualSolution best;
    std::vector<int> state(n, 0); // 0: at zero, 1: at C, 2: free
    for (;;) {
        std::vector<std::size_t> free_idx;
        std::vector<double> alpha(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] == 1) alpha[i] = C;
            if (state[i] == 2) free_idx.push_back(i);
        }
        bool feasible = true;
        double nu = std::numeric_limits<double>::quiet_NaN();
        if (!free_idx.empty()) {
            const std::size_t m = free_idx.size();
            std::vector<std::vector<double>> a(m + 1, std::vector<double>(m + 1, 0.0));
            std::vector<double> rhs(m + 1, 0.0);
            for (std::size_t r = 0; r < m; ++r) {
                const std::size_t i = free_idx[r];
                for (std::size_t c = 0; c < m; ++c) {
                    const std::size_t j = free_idx[c];
                    a[r][c] = y[i] * y[j] * K[i][j];
                }
                a[r][m] = y[i];
                a[m][r] = y[i];
                rhs[r] = 1.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (state[j] == 1) rhs[r] -= y[i] * y[j] * K[i][j] * C;
            }
            for (std::size_t j = 0; j < n; ++j)
                if (state[j] == 1) rhs[m] -= y[j] * C;
            bool ok = false;
            const auto sol = solve_linear(a, rhs, ok);
            if (!ok) feasible = false;
            for (std::size_t r = 0; feasible && r < m; ++r) {
                if (sol[r] <= 0.0 || sol[r] >= C) feasible = false;
                alpha[free_idx[r]] = sol[r];
            }
            if (feasible) nu = sol[m];
        } else {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) s += y[j] * alpha[j];
            feasible = std::abs(s) < 1e-12;
        }
        if (feasible) {
            double obj = 0;
            for (std::size_t i = 0; i < n; ++i) {
                obj += alpha[i];
                for (std::size_t j = 0; j < n; ++j) obj -= 0.5 * alpha[i] * alpha[j] * y[i] * y[j] * K[i][j];
            }
            if (obj > best.objective + 1e-12) {
                best.objective = obj;
                best.alpha = alpha;
                best.bias = nu;
            }
        }
        std::size_t pos = 0;
        while (pos < n && ++state[pos] == 3) state[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

} // namespace oracle

namespace gen {

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}
inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random quantized RGB image of blocky patches drawn from a small palette.
inline hplate::ImageBuffer quantized_image(std::mt19937_64& rng, int max_side = 64) {
    const int w = uniform_int(rng, 1, max_side);
    const int h = uniform_int(rng, 1, max_side);
    const int colors = uniform_int(rng, 1, 6);
    std::vector<std::array<double, 3>> palette;
    for (int c = 0; c < colors; ++c) {
        const std::array<double, 3> base{static_cast<double>(uniform_int(rng, 0, 255)),
                                         static_cast<double>(uniform_int(rng, 0, 255)),
                                         static_cast<double>(uniform_int(rng, 0, 255))};
        palette.push_back(base);
        // Occasional near-duplicate so threshold merges fire.
        if (uniform_int(rng, 0, 2) == 0)
            palette.push_back({std::min(255.0, base[0] + 3), base[1], std::max(0.0, base[2] - 2)});
    }
    hplate::ImageBuffer img(w, h, hplate::ColorSpace::RGB);
    auto paint = [&](int x0, int y0, int x1, int y1, const std::array<double, 3>& c) {
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                auto p = img.pixel(x, y);
                std::copy(c.begin(), c.end(), p.begin());
            }
    };
    paint(0, 0, w - 1, h - 1, palette[0]);
    const int patches = uniform_int(rng, 0, 40);
    for (int i = 0; i < patches; ++i) {
        const int x0 = uniform_int(rng, 0, w - 1), y0 = uniform_int(rng, 0, h - 1);
        const int x1 = std::min(w - 1, x0 + uniform_int(rng, 0, 12));
        const int y1 = std::min(h - 1, y0 + uniform_int(rng, 0, 12));
        paint(x0, y0, x1, y1, palette[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(palette.size()) - 1))]);
    }
    const int specks = uniform_int(rng, 0, 20);
    for (int i = 0; i < specks; ++i) {
        const int x = uniform_int(rng, 0, w - 1), y = uniform_int(rng, 0, h - 1);
        paint(x, y, x, y, palette[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(palette.size()) - 1))]);
    }
    return img;
}

// Random plate mask: everything, or a random subset with holes.
inline hplate::Mask plate_mask(std::mt19937_64& rng, int w, int h) {
    hplate::Mask m(w, h);
    const bool full = uniform_int(rng, 0, 1) == 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y, full || uniform_int(rng, 0, 9) != 0);
    return m;
}

inline std::vector<std::vector<double>> random_points(std::mt19937_64& rng, int n, int dim, double lo, double hi) {
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& p : pts)
        for (double& v : p) v = uniform_real(rng, lo, hi);
    return pts;
}

inline hplate::PointSet to_point_set(const std::vector<std::vector<double>>& pts) {
    hplate::PointSet s(pts.empty() ? 0 : pts[0].size());
    for (const auto& p : pts) s.push_back(p);
    return s;
}

} // namespace gen

namespace testutil {

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hplate_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace testutil
