#pragma once

// Per-category masked feature means concatenated into one image-level vector.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "anchorda/maps.hpp"
#include "anchorda/manifest.hpp"
#include "anchorda/matrix.hpp"

namespace anchorda {

struct CategoryMask {
    std::uint16_t category = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<bool> pixels;  // row-major H x W
    std::size_t pixel_count = 0;

    static CategoryMask from_labels(const LabelMap& labels, std::uint16_t category);
};

struct ImageVector {
    std::string source_id;
    std::vector<double> values;  // length C * C_feat, category-major blocks
    std::vector<bool> presence;  // length C

    bool operator==(const ImageVector&) const = default;
};

enum class MapKind { ground_truth, prediction };

MapKind parse_map_kind(const std::string& name);
std::string to_string(MapKind kind);

// Masked mean over pixels for every channel; zeros when the mask is empty.
std::vector<double> aggregate_category(const FeatureMap& features, const CategoryMask& mask);

// Concatenates aggregate_category for categories 0..C-1. Pixels labelled
// kIgnoreLabel belong to no category.
ImageVector build_image_vector(const FeatureMap& features, const LabelMap& categories,
                               std::size_t num_categories, std::string source_id = {});

// One ImageVector per manifest sample, in manifest order. ground_truth reads
// label_path, prediction reads prediction_path; MissingMap otherwise.
std::vector<ImageVector> batch_vectors(const Manifest& manifest, MapKind which_map);

Matrix to_matrix(const std::vector<ImageVector>& vectors);

// Scales each row to unit L2 norm (zero rows are left alone).
void l2_normalize_rows(Matrix& m);

}  // namespace anchorda
