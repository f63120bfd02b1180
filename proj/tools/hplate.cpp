// hplate: plate assessment, classifier training/evaluation and synthetic data.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "healthyplate/classify.hpp"
#include "healthyplate/dataset.hpp"
#include "healthyplate/error.hpp"
#include "healthyplate/image_io.hpp"
#include "healthyplate/pipeline.hpp"
#include "healthyplate/synth.hpp"

using namespace hplate;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NoPlate: return 2;
    case ErrorKind::NoFood: return 3;
    case ErrorKind::BadDataset:
    case ErrorKind::BadModel: return 4;
    case ErrorKind::Io:
    case ErrorKind::InvalidArgument: return 1;
    }
    return 1;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", v);
    return buf;
}

void print_report(const AssessmentReport& report) {
    const auto& a = report.assessment;
    std::cout << report.input << "\n";
    for (const auto& item : a.items)
        std::cout << "  region " << item.region_id << ": " << item.label << " (" << to_string(item.category) << ") "
                  << percent(100.0 * item.fraction) << "\n";
    std::cout << "  fruit " << percent(a.shares.fruit) << ", vegetable " << percent(a.shares.vegetable) << ", protein "
              << percent(a.shares.protein) << ", whole grain " << percent(a.shares.whole_grain) << ", junk "
              << percent(a.shares.junk) << "\n";
    std::cout << "  balance " << percent(a.balance) << ", healthy " << percent(100.0 * a.healthy) << "\n";
    std::cout << "  verdict: " << a.band.name << " (error " << percent(a.band.error) << ")\n";
    for (const auto& r : a.recommendations) std::cout << "  - " << r << "\n";
    if (report.overlay_png) std::cout << "  overlay: " << *report.overlay_png << "\n";
    if (report.label_png) std::cout << "  labels: " << *report.label_png << "\n";
}

void print_metrics(const Metrics& m) {
    std::printf("%-16s %9s %9s %9s %8s\n", "label", "precision", "recall", "accuracy", "support");
    for (const auto& label : m.labels) {
        const auto& c = m.per_class.at(label);
        std::printf("%-16s %9.3f %9.3f %9.3f %8zu\n", label.c_str(), c.precision, c.recall, c.accuracy, c.support);
    }
    std::printf("overall accuracy %.3f\n", m.overall_accuracy);
}

void write_json(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Healthy-plate assessment from top-down meal photographs"};
    app.require_subcommand(1);

    PipelineConfig config;
    std::string image_path, space = "hsv", model_path, taxonomy_path, out_dir;
    std::optional<std::size_t> min_region;
    bool as_json = false;
    auto* assess_cmd = app.add_subcommand("assess", "Assess a plate photograph");
    assess_cmd->add_option("image", image_path, "Plate image (PNG or JPEG)")->required();
    assess_cmd->add_option("--k", config.k, "Number of color clusters")->check(CLI::PositiveNumber);
    assess_cmd->add_option("--space", space, "Clustering color space")->check(CLI::IsMember({"rgb", "hsv", "lab"}));
    assess_cmd->add_option("--connectivity", config.connectivity, "Pixel connectivity")->check(CLI::IsMember({4, 8}));
    assess_cmd->add_option("--merge-threshold", config.merge_threshold, "CIELAB merge distance")
        ->check(CLI::NonNegativeNumber);
    assess_cmd->add_option("--min-region", min_region, "Minimum region size in pixels (default 0.5% of the plate)");
    assess_cmd->add_option("--model", model_path, "SVM model JSON (default: built-in demo model)");
    assess_cmd->add_option("--taxonomy", taxonomy_path, "Label-to-category JSON");
    assess_cmd->add_option("--seed", config.seed, "Clustering seed");
    assess_cmd->add_option("--out-dir", out_dir, "Directory for overlay, label and palette PNGs");
    assess_cmd->add_flag("--json", as_json, "Print the report as JSON");

    std::string dataset_dir, model_out;
    std::string kernel_name = "rbf";
    std::optional<double> gamma;
    SvmParams svm;
    auto* train_cmd = app.add_subcommand("train", "Train a classifier on dataset/<label>/*.png");
    train_cmd->add_option("dataset", dataset_dir, "Dataset directory")->required();
    train_cmd->add_option("-o,--output", model_out, "Model JSON to write")->required();
    train_cmd->add_option("--kernel", kernel_name, "Kernel")->check(CLI::IsMember({"linear", "rbf"}));
    train_cmd->add_option("--gamma", gamma, "RBF gamma (default 1/dimension)")->check(CLI::PositiveNumber);
    train_cmd->add_option("--C", svm.C, "Soft-margin penalty")->check(CLI::PositiveNumber);
    train_cmd->add_option("--max-passes", svm.max_passes, "Optimizer budget per sample")->check(CLI::PositiveNumber);
    train_cmd->add_flag("--json", as_json, "Print training metrics as JSON");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a classifier on a dataset");
    eval_cmd->add_option("model", model_path, "Model JSON")->required();
    eval_cmd->add_option("dataset", dataset_dir, "Dataset directory")->required();
    eval_cmd->add_flag("--json", as_json, "Print metrics as JSON");

    std::string spec_path, png_out, truth_out;
    auto* gen_cmd = app.add_subcommand("generate", "Render a synthetic plate from a JSON description");
    gen_cmd->add_option("spec", spec_path, "Plate description JSON")->required();
    gen_cmd->add_option("output", png_out, "PNG to write")->required();
    gen_cmd->add_option("--truth", truth_out, "Ground-truth JSON (default: <output>.json)");

    std::size_t per_class = 20;
    std::uint64_t data_seed = 1;
    std::vector<std::string> labels;
    auto* gen_data_cmd = app.add_subcommand("generate-dataset", "Write single-object training images per label");
    gen_data_cmd->add_option("dir", dataset_dir, "Output directory")->required();
    gen_data_cmd->add_option("--per-class", per_class, "Images per label")->check(CLI::PositiveNumber);
    gen_data_cmd->add_option("--seed", data_seed, "Random seed");
    gen_data_cmd->add_option("--labels", labels, "Labels (default: whole catalog)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*assess_cmd) {
            config.color_space = parse_color_space(space);
            config.min_region_px = min_region;
            const SvmModel model = model_path.empty() ? demo_model() : SvmModel::load(model_path);
            const Taxonomy taxonomy = taxonomy_path.empty() ? Taxonomy::default_taxonomy() : Taxonomy::load(taxonomy_path);
            std::optional<std::filesystem::path> dir;
            if (!out_dir.empty()) dir = out_dir;
            const auto report = assess_image(image_path, config, model, taxonomy, dir);
            if (as_json) {
                auto doc = report.to_json();
                doc["config"] = config.to_json();
                std::cout << doc.dump(2) << "\n";
            } else {
                print_report(report);
            }
        } else if (*train_cmd) {
            svm.kernel = kernel_name == "linear" ? Kernel::linear() : Kernel::rbf(gamma);
            const LabeledDataset data = load_dataset(dataset_dir);
            const SvmModel model = svm_train(data, svm);
            model.save(model_out);
            const Metrics m = evaluate(model, data);
            if (as_json) {
                std::cout << nlohmann::json{{"model", model_out}, {"samples", data.size()}, {"training", m.to_json()}}.dump(2)
                          << "\n";
            } else {
                std::cout << "trained on " << data.size() << " samples, wrote " << model_out << "\n";
                print_metrics(m);
            }
        } else if (*eval_cmd) {
            const SvmModel model = SvmModel::load(model_path);
            const Metrics m = evaluate(model, load_dataset(dataset_dir));
            if (as_json)
                std::cout << m.to_json().dump(2) << "\n";
            else
                print_metrics(m);
        } else if (*gen_cmd) {
            std::ifstream in(spec_path);
            if (!in) fail(ErrorKind::Io, "cannot read " + spec_path);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                fail(ErrorKind::InvalidArgument, "malformed plate description: " + std::string(e.what()));
            }
            const auto plate = generate_plate(PlateSpec::from_json(doc));
            save_png(png_out, plate.image);
            write_json(truth_out.empty() ? png_out + ".json" : truth_out, plate.truth.to_json());
        } else if (*gen_data_cmd) {
            if (labels.empty())
                for (const auto& entry : food_catalog()) labels.push_back(entry.label);
            write_synthetic_dataset(dataset_dir, labels, per_class, data_seed);
        }
    } catch (const Error& e) {
        std::cerr << "hplate: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "hplate: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
