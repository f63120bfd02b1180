#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace hplate {

using Features = std::vector<double>;

struct Kernel {
    enum class Type { Linear, Rbf };
    Type type = Type::Rbf;
    // RBF width; when unset, 1 / feature dimension is used at training time.
    std::optional<double> gamma;

    static Kernel linear() { return {Type::Linear, std::nullopt}; }
    static Kernel rbf(std::optional<double> gamma = std::nullopt) { return {Type::Rbf, gamma}; }

    double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct LabeledDataset {
    std::vector<Features> samples;
    std::vector<std::string> labels;

    std::size_t size() const noexcept { return samples.size(); }
    void add(Features x, std::string label) {
        samples.push_back(std::move(x));
        labels.push_back(std::move(label));
    }
    // Distinct labels in lexicographic order.
    std::vector<std::string> label_set() const;
};

struct SvmParams {
    Kernel kernel = Kernel::rbf();
    double C = 10.0;
    double tol = 1e-3;
    int max_passes = 50;
};

// One binary soft-margin machine: f(x) = sum_i coef_i K(sv_i, x) + bias,
// with coef_i = alpha_i * y_i.
struct BinaryMachine {
    std::string label; // the +1 class in one-vs-rest
    std::vector<Features> support_vectors;
    std::vector<double> coefficients;
    double bias = 0.0;
    std::optional<Features> weights; // explicit w for the linear kernel
    int iterations = 0;
    bool converged = false;

    double decision(const Kernel& kernel, std::span<const double> x) const;
    double decision_dual(const Kernel& kernel, std::span<const double> x) const;
};

// Trains one binary machine by SMO on +/-1 targets. Stops once the maximal
// KKT violation is within `tol` or after max_passes * n pair updates.
BinaryMachine train_binary(const std::vector<Features>& x, const std::vector<int>& y, const Kernel& kernel, double C,
                           double tol, int max_passes);

struct SvmModel {
    Kernel kernel;
    double C = 10.0;
    std::size_t dimension = 0;
    std::vector<std::string> labels; // sorted
    std::vector<BinaryMachine> machines; // one per label, same order

    nlohmann::json to_json() const;
    static SvmModel from_json(const nlohmann::json& doc);
    void save(const std::filesystem::path& path) const;
    static SvmModel load(const std::filesystem::path& path);
};

// One-vs-rest training over a canonically sorted copy of the data, so the
// result does not depend on sample order.
SvmModel svm_train(const LabeledDataset& data, const SvmParams& params = {});

struct Prediction {
    std::string label;
    std::vector<std::pair<std::string, double>> decision_values;
};

// Argmax of the one-vs-rest decision values; ties go to the smallest label.
Prediction svm_predict(const SvmModel& model, std::span<const double> x);

} // namespace hplate
