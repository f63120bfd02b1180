#include "healthyplate/dataset.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "healthyplate/classify.hpp"
#include "healthyplate/error.hpp"
#include "healthyplate/image_io.hpp"
#include "healthyplate/segment.hpp"

namespace hplate {

namespace {

bool is_image_file(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

template <typename Pred>
std::vector<std::filesystem::path> sorted_entries(const std::filesystem::path& dir, Pred keep) {
    std::vector<std::filesystem::path> out;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
        if (keep(entry)) out.push_back(entry.path());
    if (ec) fail(ErrorKind::BadDataset, "cannot list " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

LabeledDataset load_dataset(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) fail(ErrorKind::BadDataset, "dataset directory not found: " + dir.string());

    const auto class_dirs = sorted_entries(dir, [](const auto& e) { return e.is_directory(); });
    if (class_dirs.size() < 2)
        fail(ErrorKind::BadDataset, "dataset needs at least two label directories, found " + std::to_string(class_dirs.size()));

    LabeledDataset data;
    for (const auto& class_dir : class_dirs) {
        const std::string label = class_dir.filename().string();
        const auto files = sorted_entries(class_dir, [](const auto& e) { return e.is_regular_file() && is_image_file(e.path()); });
        if (files.empty()) fail(ErrorKind::BadDataset, "label '" + label + "' has no images");
        for (const auto& file : files) {
            try {
                const ImageBuffer rgb = normalize(load_image(file));
                const Mask object = subtract_background(rgb);
                data.add(extract_features(rgb, object), label);
            } catch (const Error& e) {
                fail(ErrorKind::BadDataset, file.string() + ": " + e.what());
            }
        }
    }
    return data;
}

} // namespace hplate
