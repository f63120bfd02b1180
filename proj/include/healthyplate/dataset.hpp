#pragma once

#include <filesystem>

#include "healthyplate/svm.hpp"

namespace hplate {

// Reads dataset/<label>/*.{png,jpg,jpeg}; each image holds one object on a
// plain background. Objects are found by background subtraction and turned
// into region descriptors. Directory and file order is lexicographic.
// Any structural or decoding problem is reported as ErrorKind::BadDataset.
LabeledDataset load_dataset(const std::filesystem::path& dir);

} // namespace hplate
