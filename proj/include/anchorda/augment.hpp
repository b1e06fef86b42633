#pragma once

// Confidence-driven cutmix (region level) and copy-paste (pixel level).
// Plans are computed first and then applied, so every augmentation can be
// serialized, audited and replayed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "anchorda/maps.hpp"
#include "anchorda/matrix.hpp"

namespace anchorda {

using ClassConfidence = std::vector<std::optional<double>>;

struct DonorDistribution {
    std::vector<std::string> candidate_ids;
    std::vector<double> weights;
    Matrix per_class_softmax;  // C x candidates; zero where the class is absent
};

// For each class, softmax of (1 - Conf_c) across the candidates that contain
// the class; the per-candidate sum over classes is renormalized to 1.
DonorDistribution donor_distribution(const std::vector<std::string>& candidate_ids,
                                     const std::vector<ClassConfidence>& confidences);

struct Rect {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t width = 0;
    std::size_t height = 0;

    bool operator==(const Rect&) const = default;
};

struct RectFractionRange {
    double lo = 0.25;
    double hi = 0.5;
};

struct CutmixPlan {
    std::string base_id;
    std::string donor_id;
    Rect rect;
    std::uint64_t seed = 0;

    bool operator==(const CutmixPlan&) const = default;
};

struct CopyPastePlan {
    std::string base_id;
    std::string donor_id;
    std::vector<std::uint16_t> copied_classes;
    std::ptrdiff_t dx = 0;
    std::ptrdiff_t dy = 0;
    std::uint64_t seed = 0;

    bool operator==(const CopyPastePlan&) const = default;
};

struct ImageLabelPair {
    FeatureMap image;
    LabelMap label;

    bool operator==(const ImageLabelPair&) const = default;
};

// Donor drawn from the distribution; rect area fraction uniform in the range,
// aspect ratio uniform in [0.5, 2], position uniform over valid placements.
CutmixPlan plan_cutmix(const std::string& base_id, const DonorDistribution& distribution,
                       std::size_t height, std::size_t width, RectFractionRange range,
                       std::uint64_t seed);

ImageLabelPair apply_cutmix(const ImageLabelPair& base, const ImageLabelPair& donor,
                            const CutmixPlan& plan);

// copied_classes = donor's present classes minus the tail classes. The paste
// offset is (0, 0) unless max_jitter > 0, in which case each component is
// uniform in [-max_jitter, max_jitter].
CopyPastePlan plan_copy_paste(const std::string& base_id, const LabelMap& base_labels,
                              const std::string& donor_id, const LabelMap& donor_labels,
                              const std::set<std::uint16_t>& tail_classes, std::uint64_t seed,
                              std::size_t max_jitter = 0);

ImageLabelPair apply_copy_paste(const ImageLabelPair& base, const ImageLabelPair& donor,
                                const CopyPastePlan& plan);

// Classes whose labelled-pixel count falls in the bottom `quantile` of the C
// classes (floor(quantile * C) classes, ties by class index).
std::set<std::uint16_t> tail_classes(const std::vector<LabelMap>& labels,
                                     std::size_t num_categories, double quantile = 0.3);

// Number of output pixels whose (image, label) pair matches neither the base
// pixel at the same position nor the donor pixel at (position - offset).
std::size_t provenance_violations(const ImageLabelPair& base, const ImageLabelPair& donor,
                                  const ImageLabelPair& output, std::ptrdiff_t dx = 0,
                                  std::ptrdiff_t dy = 0);

nlohmann::json to_json(const CutmixPlan& plan);
nlohmann::json to_json(const CopyPastePlan& plan);
CutmixPlan cutmix_plan_from_json(const nlohmann::json& j);
CopyPastePlan copy_paste_plan_from_json(const nlohmann::json& j);

}  // namespace anchorda
