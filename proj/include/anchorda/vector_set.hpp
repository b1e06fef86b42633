#pragma once

// A batch of ImageVectors on disk: an N x D f32 tensor plus a JSON sidecar
// (same stem, .json) holding ids, per-category presence and provenance.
// An empty batch is written as a sidecar with count 0 and no tensor file.

#include <filesystem>
#include <string>
#include <vector>

#include "anchorda/aggregation.hpp"

namespace anchorda {

struct VectorSetInfo {
    std::size_t num_categories = 0;
    std::size_t feature_channels = 0;
    std::string which_map;
};

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path);

void save_vector_set(const std::filesystem::path& tensor_path, const std::vector<ImageVector>& vectors,
                     const VectorSetInfo& info);

// Without a sidecar, ids default to the row index and presence is left empty.
std::vector<ImageVector> load_vector_set(const std::filesystem::path& tensor_path,
                                         VectorSetInfo* info = nullptr);

}  // namespace anchorda
