#include "healthyplate/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <set>

#include "healthyplate/error.hpp"

namespace hplate {

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
    if (type == Type::Linear) return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
    double d2 = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        const double d = a[p] - b[p];
        d2 += d * d;
    }
    return std::exp(-gamma.value_or(1.0) * d2);
}

std::vector<std::string> LabeledDataset::label_set() const {
    const std::set<std::string> unique(labels.begin(), labels.end());
    return {unique.begin(), unique.end()};
}

double BinaryMachine::decision_dual(const Kernel& kernel, std::span<const double> x) const {
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) f += coefficients[i] * kernel(support_vectors[i], x);
    return f;
}

double BinaryMachine::decision(const Kernel& kernel, std::span<const double> x) const {
    if (weights) return std::inner_product(weights->begin(), weights->end(), x.begin(), 0.0) + bias;
    return decision_dual(kernel, x);
}

namespace {

constexpr double kTau = 1e-12;

std::vector<double> kernel_matrix(const std::vector<Features>& x, const Kernel& kernel) {
    const std::size_t n = x.size();
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) k[i * n + j] = k[j * n + i] = kernel(x[i], x[j]);
    return k;
}

// SMO on the dual  min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0,  using the
// maximal violating pair as the working set.
BinaryMachine smo(const std::vector<Features>& x, const std::vector<int>& y, const std::vector<double>& k,
                  const Kernel& kernel, double C, double tol, int max_passes) {
    const std::size_t n = x.size();
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto kij = [&](std::size_t i, std::size_t j) { return k[i * n + j]; };
    auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0.0 : alpha[t] < C; };

    BinaryMachine machine;
    const long long max_iter = static_cast<long long>(std::max(max_passes, 1)) * static_cast<long long>(std::max<std::size_t>(n, 1));
    for (long long it = 0; it < max_iter; ++it) {
        std::size_t i = n, j = n;
        double m = -std::numeric_limits<double>::infinity();
        double big_m = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > m) m = v, i = t;
            if (in_low(t) && v < big_m) big_m = v, j = t;
        }
        if (i == n || j == n || m - big_m < tol) {
            machine.converged = true;
            break;
        }
        machine.iterations = static_cast<int>(it + 1);

        const double a = std::max(kij(i, i) + kij(j, j) - 2.0 * kij(i, j), kTau);
        const double room_i = y[i] > 0 ? C - alpha[i] : alpha[i];
        const double room_j = y[j] > 0 ? alpha[j] : C - alpha[j];
        const double step = std::min({(m - big_m) / a, room_i, room_j});

        // Snap to the box exactly when a bound is reached.
        alpha[i] = step >= room_i ? (y[i] > 0 ? C : 0.0) : std::clamp(alpha[i] + y[i] * step, 0.0, C);
        alpha[j] = step >= room_j ? (y[j] > 0 ? 0.0 : C) : std::clamp(alpha[j] - y[j] * step, 0.0, C);
        for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * step * (kij(t, i) - kij(t, j));
    }

    // Bias from free vectors, or the midpoint of the feasible interval.
    double sum = 0.0;
    std::size_t free_count = 0;
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        const bool at_upper = alpha[t] >= C, at_lower = alpha[t] <= 0.0;
        if (!at_upper && !at_lower) {
            sum += yg;
            ++free_count;
        } else if ((y[t] > 0) == at_upper) {
            lower = std::max(lower, yg);
        } else {
            upper = std::min(upper, yg);
        }
    }
    double rho = 0.0;
    if (free_count > 0)
        rho = sum / static_cast<double>(free_count);
    else if (std::isfinite(upper) && std::isfinite(lower))
        rho = (upper + lower) / 2.0;
    else
        rho = std::isfinite(upper) ? upper : (std::isfinite(lower) ? lower : 0.0);
    machine.bias = -rho;

    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] <= 0.0) continue;
        machine.support_vectors.push_back(x[t]);
        machine.coefficients.push_back(alpha[t] * y[t]);
    }
    if (kernel.type == Kernel::Type::Linear) {
        Features w(x.empty() ? 0 : x.front().size(), 0.0);
        for (std::size_t s = 0; s < machine.support_vectors.size(); ++s)
            for (std::size_t p = 0; p < w.size(); ++p) w[p] += machine.coefficients[s] * machine.support_vectors[s][p];
        machine.weights = std::move(w);
    }
    return machine;
}

void check_samples(const std::vector<Features>& x) {
    if (x.empty()) fail(ErrorKind::InvalidArgument, "training set is empty");
    const std::size_t dim = x.front().size();
    if (dim == 0) fail(ErrorKind::InvalidArgument, "zero-dimension features");
    for (const auto& s : x) {
        if (s.size() != dim) fail(ErrorKind::InvalidArgument, "feature dimensions differ");
        for (double v : s)
            if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite feature value");
    }
}

Kernel resolve_kernel(Kernel kernel, std::size_t dim) {
    if (kernel.type == Kernel::Type::Rbf && !kernel.gamma) kernel.gamma = 1.0 / static_cast<double>(dim);
    if (kernel.type == Kernel::Type::Rbf && !(*kernel.gamma > 0.0))
        fail(ErrorKind::InvalidArgument, "rbf gamma must be positive");
    return kernel;
}

} // namespace

BinaryMachine train_binary(const std::vector<Features>& x, const std::vector<int>& y, const Kernel& kernel, double C,
                           double tol, int max_passes) {
    check_samples(x);
    if (y.size() != x.size()) fail(ErrorKind::InvalidArgument, "target count differs from sample count");
    for (int t : y)
        if (t != 1 && t != -1) fail(ErrorKind::InvalidArgument, "binary targets must be +1 or -1");
    if (!(C > 0.0)) fail(ErrorKind::InvalidArgument, "C must be positive");
    const Kernel k = resolve_kernel(kernel, x.front().size());
    return smo(x, y, kernel_matrix(x, k), k, C, tol, max_passes);
}

SvmModel svm_train(const LabeledDataset& data, const SvmParams& params) {
    if (data.samples.size() != data.labels.size()) fail(ErrorKind::InvalidArgument, "sample/label count mismatch");
    check_samples(data.samples);
    if (!(params.C > 0.0)) fail(ErrorKind::InvalidArgument, "C must be positive");
    const auto label_set = data.label_set();
    if (label_set.size() < 2) fail(ErrorKind::InvalidArgument, "training needs at least two classes");

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (data.samples[a] != data.samples[b]) return data.samples[a] < data.samples[b];
        return data.labels[a] < data.labels[b];
    });
    std::vector<Features> x;
    std::vector<std::string> labels;
    for (std::size_t i : order) {
        x.push_back(data.samples[i]);
        labels.push_back(data.labels[i]);
    }

    SvmModel model;
    model.kernel = resolve_kernel(params.kernel, x.front().size());
    model.C = params.C;
    model.dimension = x.front().size();
    model.labels = label_set;
    const auto k = kernel_matrix(x, model.kernel);

    std::vector<std::future<BinaryMachine>> jobs;
    for (const auto& positive : label_set) {
        jobs.push_back(std::async(std::launch::async, [&, positive] {
            std::vector<int> y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = labels[i] == positive ? 1 : -1;
            BinaryMachine m = smo(x, y, k, model.kernel, params.C, params.tol, params.max_passes);
            m.label = positive;
            return m;
        }));
    }
    for (auto& job : jobs) model.machines.push_back(job.get());
    return model;
}

Prediction svm_predict(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.dimension)
        fail(ErrorKind::InvalidArgument, "feature dimension " + std::to_string(x.size()) + " does not match model dimension " +
                                             std::to_string(model.dimension));
    if (model.machines.empty()) fail(ErrorKind::BadModel, "model has no machines");
    Prediction p;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : model.machines) {
        const double f = m.decision(model.kernel, x);
        p.decision_values.emplace_back(m.label, f);
        if (f > best || p.label.empty()) {
            if (f > best) best = f;
            p.label = m.label;
        }
    }
    return p;
}

nlohmann::json SvmModel::to_json() const {
    nlohmann::json kernel_doc = {{"type", kernel.type == Kernel::Type::Linear ? "linear" : "rbf"}};
    if (kernel.type == Kernel::Type::Rbf) kernel_doc["gamma"] = kernel.gamma.value_or(1.0);
    nlohmann::json machines_doc = nlohmann::json::array();
    for (const auto& m : machines) {
        nlohmann::json md = {{"label", m.label},
                             {"bias", m.bias},
                             {"support_vectors", m.support_vectors},
                             {"coefficients", m.coefficients}};
        if (m.weights) md["weights"] = *m.weights;
        machines_doc.push_back(std::move(md));
    }
    return {{"kernel", kernel_doc}, {"C", C}, {"dimension", dimension}, {"labels", labels}, {"machines", machines_doc}};
}

SvmModel SvmModel::from_json(const nlohmann::json& doc) {
    try {
        SvmModel model;
        const auto& kd = doc.at("kernel");
        const auto type = kd.at("type").get<std::string>();
        if (type == "linear")
            model.kernel = Kernel::linear();
        else if (type == "rbf")
            model.kernel = Kernel::rbf(kd.at("gamma").get<double>());
        else
            fail(ErrorKind::BadModel, "unknown kernel type '" + type + "'");
        model.C = doc.at("C").get<double>();
        model.dimension = doc.at("dimension").get<std::size_t>();
        model.labels = doc.at("labels").get<std::vector<std::string>>();
        for (const auto& md : doc.at("machines")) {
            BinaryMachine m;
            m.label = md.at("label").get<std::string>();
            m.bias = md.at("bias").get<double>();
            m.support_vectors = md.at("support_vectors").get<std::vector<Features>>();
            m.coefficients = md.at("coefficients").get<std::vector<double>>();
            if (md.contains("weights")) m.weights = md.at("weights").get<Features>();
            if (m.support_vectors.size() != m.coefficients.size())
                fail(ErrorKind::BadModel, "support vector and coefficient counts differ");
            for (const auto& sv : m.support_vectors)
                if (sv.size() != model.dimension) fail(ErrorKind::BadModel, "support vector dimension mismatch");
            if (m.weights && m.weights->size() != model.dimension) fail(ErrorKind::BadModel, "weight dimension mismatch");
            m.converged = true;
            model.machines.push_back(std::move(m));
        }
        if (model.machines.size() != model.labels.size()) fail(ErrorKind::BadModel, "one machine per label expected");
        for (std::size_t i = 0; i < model.labels.size(); ++i)
            if (model.machines[i].label != model.labels[i]) fail(ErrorKind::BadModel, "machine order does not match labels");
        return model;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadModel, std::string("malformed model: ") + e.what());
    }
}

void SvmModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write model " + path.string());
    out << to_json().dump(2) << '\n';
}

SvmModel SvmModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open model " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::BadModel, "malformed model " + path.string() + ": " + e.what());
    }
    return from_json(doc);
}

} // namespace hplate
