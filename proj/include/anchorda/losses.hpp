#pragma once

// Segmentation, consistency and anchor-alignment losses on post-softmax
// probabilities, with analytic gradients where the loss is differentiable.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "anchorda/anchor_bank.hpp"
#include "anchorda/maps.hpp"

namespace anchorda {

inline constexpr double kSoftAlignEpsilon = 1e-8;
// log() floor for a zero true-class probability; keeps losses finite.
inline constexpr double kProbabilityFloor = 1e-12;

struct PixelLossInput {
    ProbabilityMap probabilities;  // C x H x W
    LabelMap labels;               // H x W, kIgnoreLabel excluded
};

struct OhemConfig {
    double prob_threshold = 0.7;
    double min_kept_fraction = 1.0 / 16.0;

    void validate() const;
};

struct LossValue {
    double value = 0.0;
    // Same layout as the differentiated input (probabilities or feature).
    std::optional<std::vector<double>> gradient;
    std::optional<std::vector<bool>> pixel_mask;  // H x W, OHEM only
};

// Shapes agree, probabilities non-negative and per-pixel sums within 1e-4 of 1,
// labels in [0, C) or ignore. Throws ShapeMismatch / NotNormalized /
// CategoryOutOfRange.
void validate_loss_input(const PixelLossInput& input);

// Mean of -log p[true class] over non-ignored pixels; gradient w.r.t. p.
LossValue cross_entropy(const PixelLossInput& input);

// L_ce(source) + L_ce(active target).
LossValue seg_loss(const PixelLossInput& source, const PixelLossInput& active_target);

// Cross-entropy restricted to hard pixels (true-class probability below the
// threshold), topped up to ceil(min_kept_fraction * N) of the hardest pixels.
LossValue ohem_cross_entropy(const PixelLossInput& input, const OhemConfig& cfg = {});

// L_ohem(augmented active) + L_ohem(augmented unlabeled with pseudo labels).
LossValue consistency_loss(const PixelLossInput& aug_active, const PixelLossInput& aug_unlabeled,
                           const OhemConfig& cfg = {});

// Per class: mean log p_c over pixels pseudo-labelled c. nullopt when the
// class has no pixels.
std::vector<std::optional<double>> confidence(const ProbabilityMap& probabilities,
                                              const LabelMap& pseudo_labels,
                                              std::size_t num_categories);

// V / sum_v 1 / max(|F - A_v|^2, eps); gradient w.r.t. F.
LossValue soft_alignment_loss(std::span<const double> feature, const AnchorBank& bank,
                              double epsilon = kSoftAlignEpsilon);

// Unweighted sum.
LossValue total_semi_loss(const LossValue& seg, const LossValue& cons, const LossValue& dis);

}  // namespace anchorda
