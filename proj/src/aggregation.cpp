#include "anchorda/aggregation.hpp"

#include <cmath>

#include "anchorda/error.hpp"
#include "anchorda/parallel.hpp"

namespace anchorda {

CategoryMask CategoryMask::from_labels(const LabelMap& labels, std::uint16_t category) {
    CategoryMask mask;
    mask.category = category;
    mask.height = labels.height;
    mask.width = labels.width;
    mask.pixels.resize(labels.pixels());
    for (std::size_t i = 0; i < labels.pixels(); ++i) {
        mask.pixels[i] = labels.values[i] == category;
        mask.pixel_count += mask.pixels[i] ? 1 : 0;
    }
    return mask;
}

MapKind parse_map_kind(const std::string& name) {
    if (name == "ground_truth") return MapKind::ground_truth;
    if (name == "prediction") return MapKind::prediction;
    fail(ErrorKind::InvalidArgument, "map kind must be ground_truth or prediction, got '" + name + "'");
}

std::string to_string(MapKind kind) {
    return kind == MapKind::ground_truth ? "ground_truth" : "prediction";
}

std::vector<double> aggregate_category(const FeatureMap& features, const CategoryMask& mask) {
    if (mask.height != features.height || mask.width != features.width ||
        mask.pixels.size() != features.pixels())
        fail(ErrorKind::ShapeMismatch, "mask is " + std::to_string(mask.height) + "x" +
                                           std::to_string(mask.width) + ", feature map is " +
                                           std::to_string(features.height) + "x" +
                                           std::to_string(features.width));
    std::vector<double> out(features.channels, 0.0);
    if (mask.pixel_count == 0) return out;
    for (std::size_t c = 0; c < features.channels; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < features.pixels(); ++i)
            if (mask.pixels[i]) sum += features.at(c, i);
        out[c] = sum / static_cast<double>(mask.pixel_count);
    }
    return out;
}

ImageVector build_image_vector(const FeatureMap& features, const LabelMap& categories,
                               std::size_t num_categories, std::string source_id) {
    if (categories.height != features.height || categories.width != features.width)
        fail(ErrorKind::ShapeMismatch, "category map is " + std::to_string(categories.height) +
                                           "x" + std::to_string(categories.width) +
                                           ", feature map is " + std::to_string(features.height) +
                                           "x" + std::to_string(features.width));
    const std::size_t cf = features.channels;
    std::vector<double> sums(num_categories * cf, 0.0);
    std::vector<std::size_t> counts(num_categories, 0);

    // Single row-major pass; per-category sums accumulate in pixel order.
    for (std::size_t i = 0; i < categories.pixels(); ++i) {
        const std::uint16_t cat = categories.values[i];
        if (cat == kIgnoreLabel) continue;
        if (cat >= num_categories)
            fail(ErrorKind::CategoryOutOfRange, "pixel " + std::to_string(i) + " has category " +
                                                    std::to_string(cat) + " but C = " +
                                                    std::to_string(num_categories));
        ++counts[cat];
        for (std::size_t ch = 0; ch < cf; ++ch) sums[cat * cf + ch] += features.at(ch, i);
    }

    ImageVector v;
    v.source_id = std::move(source_id);
    v.values.assign(num_categories * cf, 0.0);
    v.presence.assign(num_categories, false);
    for (std::size_t cat = 0; cat < num_categories; ++cat) {
        if (counts[cat] == 0) continue;
        v.presence[cat] = true;
        for (std::size_t ch = 0; ch < cf; ++ch)
            v.values[cat * cf + ch] = sums[cat * cf + ch] / static_cast<double>(counts[cat]);
    }
    return v;
}

std::vector<ImageVector> batch_vectors(const Manifest& manifest, MapKind which_map) {
    for (const auto& s : manifest.samples) {
        const auto& p = which_map == MapKind::ground_truth ? s.label_path : s.prediction_path;
        if (!p)
            fail(ErrorKind::MissingMap, "sample '" + s.id + "' has no " +
                                            (which_map == MapKind::ground_truth ? "label_path"
                                                                                : "prediction_path"));
    }
    std::vector<ImageVector> out(manifest.samples.size());
    parallel_for(manifest.samples.size(), [&](std::size_t i) {
        const auto& s = manifest.samples[i];
        const auto features = feature_map_from(read_tensor(s.feature_path));
        if (features.channels != manifest.feature_channels)
            fail(ErrorKind::ShapeMismatch, "sample '" + s.id + "' has " +
                                               std::to_string(features.channels) +
                                               " feature channels, manifest declares " +
                                               std::to_string(manifest.feature_channels));
        const auto& map_path =
            which_map == MapKind::ground_truth ? *s.label_path : *s.prediction_path;
        const auto labels = label_map_from(read_tensor(map_path));
        out[i] = build_image_vector(features, labels, manifest.num_categories, s.id);
    });
    return out;
}

Matrix to_matrix(const std::vector<ImageVector>& vectors) {
    if (vectors.empty()) return {};
    Matrix m(vectors.size(), vectors.front().values.size());
    for (std::size_t r = 0; r < vectors.size(); ++r) {
        if (vectors[r].values.size() != m.cols())
            fail(ErrorKind::ShapeMismatch, "image vector '" + vectors[r].source_id +
                                               "' has length " +
                                               std::to_string(vectors[r].values.size()));
        std::copy(vectors[r].values.begin(), vectors[r].values.end(), m.row(r).begin());
    }
    return m;
}

void l2_normalize_rows(Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        double norm = 0.0;
        for (double x : row) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        for (double& x : row) x /= norm;
    }
}

}  // namespace anchorda
