#include "anchorda/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "anchorda/error.hpp"

namespace anchorda {
namespace {

struct ValidPixel {
    std::size_t index;
    double prob;  // true-class probability
};

std::vector<ValidPixel> valid_pixels(const PixelLossInput& input) {
    std::vector<ValidPixel> out;
    out.reserve(input.labels.pixels());
    for (std::size_t i = 0; i < input.labels.pixels(); ++i) {
        const std::uint16_t y = input.labels.values[i];
        if (y == kIgnoreLabel) continue;
        out.push_back({i, input.probabilities.at(y, i)});
    }
    return out;
}

double neg_log(double p) { return -std::log(std::max(p, kProbabilityFloor)); }

// Mean of -log p over `pixels`, with gradient w.r.t. the probability map.
LossValue masked_mean_ce(const PixelLossInput& input, const std::vector<ValidPixel>& pixels) {
    LossValue out;
    std::vector<double> grad(input.probabilities.values.size(), 0.0);
    const double m = static_cast<double>(pixels.size());
    double sum = 0.0;
    for (const auto& px : pixels) {
        sum += neg_log(px.prob);
        if (px.prob > kProbabilityFloor)
            grad[input.labels.values[px.index] * input.probabilities.pixels() + px.index] =
                -1.0 / (m * px.prob);
    }
    out.value = sum / m;
    out.gradient = std::move(grad);
    return out;
}

}  // namespace

void OhemConfig::validate() const {
    require(prob_threshold > 0.0 && prob_threshold < 1.0, "OHEM threshold must lie in (0, 1)");
    require(min_kept_fraction > 0.0 && min_kept_fraction <= 1.0,
            "OHEM min_kept_fraction must lie in (0, 1]");
}

void validate_loss_input(const PixelLossInput& input) {
    const auto& p = input.probabilities;
    const auto& y = input.labels;
    if (p.height != y.height || p.width != y.width)
        fail(ErrorKind::ShapeMismatch, "probabilities are " + std::to_string(p.height) + "x" +
                                           std::to_string(p.width) + ", labels are " +
                                           std::to_string(y.height) + "x" + std::to_string(y.width));
    if (p.values.size() != p.channels * p.pixels() || y.values.size() != y.pixels())
        fail(ErrorKind::ShapeMismatch, "map storage does not match its declared shape");
    for (std::size_t i = 0; i < p.pixels(); ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < p.channels; ++c) {
            const double v = p.at(c, i);
            if (!(v >= 0.0))
                fail(ErrorKind::NotNormalized, "pixel " + std::to_string(i) + " has a negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-4)
            fail(ErrorKind::NotNormalized,
                 "pixel " + std::to_string(i) + " probabilities sum to " + std::to_string(sum));
        const std::uint16_t label = y.values[i];
        if (label != kIgnoreLabel && label >= p.channels)
            fail(ErrorKind::CategoryOutOfRange, "pixel " + std::to_string(i) + " label " +
                                                    std::to_string(label) + " >= C = " +
                                                    std::to_string(p.channels));
    }
}

LossValue cross_entropy(const PixelLossInput& input) {
    validate_loss_input(input);
    const auto pixels = valid_pixels(input);
    if (pixels.empty()) fail(ErrorKind::NoValidPixels, "every pixel is ignore-labelled");
    return masked_mean_ce(input, pixels);
}

LossValue seg_loss(const PixelLossInput& source, const PixelLossInput& active_target) {
    return {cross_entropy(source).value + cross_entropy(active_target).value, {}, {}};
}

LossValue ohem_cross_entropy(const PixelLossInput& input, const OhemConfig& cfg) {
    cfg.validate();
    validate_loss_input(input);
    auto pixels = valid_pixels(input);
    if (pixels.empty()) fail(ErrorKind::NoValidPixels, "every pixel is ignore-labelled");

    const double n = static_cast<double>(pixels.size());
    std::vector<ValidPixel> kept;
    for (const auto& px : pixels)
        if (px.prob < cfg.prob_threshold) kept.push_back(px);

    if (static_cast<double>(kept.size()) < cfg.min_kept_fraction * n) {
        const auto min_kept = static_cast<std::size_t>(std::ceil(cfg.min_kept_fraction * n - 1e-9));
        std::stable_sort(pixels.begin(), pixels.end(),
                         [](const ValidPixel& a, const ValidPixel& b) { return a.prob < b.prob; });
        kept.assign(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(
                                                         std::min(min_kept, pixels.size())));
        std::sort(kept.begin(), kept.end(),
                  [](const ValidPixel& a, const ValidPixel& b) { return a.index < b.index; });
    }

    LossValue out = masked_mean_ce(input, kept);
    std::vector<bool> mask(input.labels.pixels(), false);
    for (const auto& px : kept) mask[px.index] = true;
    out.pixel_mask = std::move(mask);
    return out;
}

LossValue consistency_loss(const PixelLossInput& aug_active, const PixelLossInput& aug_unlabeled,
                           const OhemConfig& cfg) {
    return {ohem_cross_entropy(aug_active, cfg).value + ohem_cross_entropy(aug_unlabeled, cfg).value,
            {}, {}};
}

std::vector<std::optional<double>> confidence(const ProbabilityMap& probabilities,
                                              const LabelMap& pseudo_labels,
                                              std::size_t num_categories) {
    if (probabilities.height != pseudo_labels.height || probabilities.width != pseudo_labels.width ||
        probabilities.channels != num_categories)
        fail(ErrorKind::ShapeMismatch, "probability map " + std::to_string(probabilities.channels) +
                                           "x" + std::to_string(probabilities.height) + "x" +
                                           std::to_string(probabilities.width) +
                                           " does not match pseudo labels / C");
    std::vector<double> sums(num_categories, 0.0);
    std::vector<std::size_t> counts(num_categories, 0);
    for (std::size_t i = 0; i < pseudo_labels.pixels(); ++i) {
        const std::uint16_t c = pseudo_labels.values[i];
        if (c == kIgnoreLabel) continue;
        if (c >= num_categories)
            fail(ErrorKind::CategoryOutOfRange, "pseudo label " + std::to_string(c) + " >= C");
        sums[c] += std::log(std::max(probabilities.at(c, i), kProbabilityFloor));
        ++counts[c];
    }
    std::vector<std::optional<double>> out(num_categories);
    for (std::size_t c = 0; c < num_categories; ++c)
        if (counts[c] > 0) out[c] = sums[c] / static_cast<double>(counts[c]);
    return out;
}

LossValue soft_alignment_loss(std::span<const double> feature, const AnchorBank& bank,
                              double epsilon) {
    if (feature.size() != bank.dim())
        fail(ErrorKind::ShapeMismatch, "feature has " + std::to_string(feature.size()) +
                                           " dims, bank has " + std::to_string(bank.dim()));
    require(bank.size() >= 1, "bank has no anchors");
    const std::size_t v_count = bank.size();
    std::vector<double> dist(v_count);
    double inv_sum = 0.0;
    for (std::size_t v = 0; v < v_count; ++v) {
        dist[v] = std::max(squared_distance(feature, bank.anchors.row(v)), epsilon);
        inv_sum += 1.0 / dist[v];
    }
    const double value = static_cast<double>(v_count) / inv_sum;

    // dL/dF = (L^2 / V) * sum_v 2 (F - A_v) / d_v^2 over unclamped anchors.
    std::vector<double> grad(feature.size(), 0.0);
    const double scale = value * value / static_cast<double>(v_count);
    for (std::size_t v = 0; v < v_count; ++v) {
        if (dist[v] <= epsilon) continue;
        const auto anchor = bank.anchors.row(v);
        const double w = 2.0 * scale / (dist[v] * dist[v]);
        for (std::size_t d = 0; d < feature.size(); ++d) grad[d] += w * (feature[d] - anchor[d]);
    }
    return {value, std::move(grad), {}};
}

LossValue total_semi_loss(const LossValue& seg, const LossValue& cons, const LossValue& dis) {
    return {seg.value + cons.value + dis.value, {}, {}};
}

}  // namespace anchorda
