#include "anchorda/augment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "anchorda/error.hpp"
#include "anchorda/rng.hpp"

namespace anchorda {
namespace {

void check_same_shape(const ImageLabelPair& a, const ImageLabelPair& b) {
    const bool ok = a.image.channels == b.image.channels && a.image.height == b.image.height &&
                    a.image.width == b.image.width && a.label.height == b.label.height &&
                    a.label.width == b.label.width && a.image.height == a.label.height &&
                    a.image.width == a.label.width;
    if (!ok) fail(ErrorKind::ShapeMismatch, "base and donor image/label shapes differ");
}

void copy_pixel(ImageLabelPair& dst, std::size_t dst_index, const ImageLabelPair& src,
                std::size_t src_index) {
    for (std::size_t c = 0; c < dst.image.channels; ++c)
        dst.image.at(c, dst_index) = src.image.at(c, src_index);
    dst.label.values[dst_index] = src.label.values[src_index];
}

bool same_pixel(const ImageLabelPair& a, std::size_t ia, const ImageLabelPair& b, std::size_t ib) {
    if (a.label.values[ia] != b.label.values[ib]) return false;
    for (std::size_t c = 0; c < a.image.channels; ++c)
        if (a.image.at(c, ia) != b.image.at(c, ib)) return false;
    return true;
}

}  // namespace

DonorDistribution donor_distribution(const std::vector<std::string>& candidate_ids,
                                     const std::vector<ClassConfidence>& confidences) {
    if (candidate_ids.empty()) fail(ErrorKind::NoCandidates, "no donor candidates");
    if (confidences.size() != candidate_ids.size())
        fail(ErrorKind::ShapeMismatch, "one confidence vector per candidate is required");
    const std::size_t n = candidate_ids.size();
    const std::size_t num_classes = confidences.front().size();
    for (const auto& conf : confidences)
        if (conf.size() != num_classes)
            fail(ErrorKind::ShapeMismatch, "confidence vectors differ in class count");

    DonorDistribution out;
    out.candidate_ids = candidate_ids;
    out.per_class_softmax = Matrix(num_classes, n);
    for (std::size_t c = 0; c < num_classes; ++c) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            if (confidences[i][c]) peak = std::max(peak, 1.0 - *confidences[i][c]);
        if (!std::isfinite(peak)) continue;
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (confidences[i][c]) denom += std::exp(1.0 - *confidences[i][c] - peak);
        for (std::size_t i = 0; i < n; ++i)
            if (confidences[i][c])
                out.per_class_softmax(c, i) = std::exp(1.0 - *confidences[i][c] - peak) / denom;
    }

    out.weights.assign(n, 0.0);
    for (std::size_t c = 0; c < num_classes; ++c)
        for (std::size_t i = 0; i < n; ++i) out.weights[i] += out.per_class_softmax(c, i);
    const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    if (total > 0.0) {
        for (double& w : out.weights) w /= total;
    } else {
        // No candidate has any confident class: fall back to uniform.
        std::fill(out.weights.begin(), out.weights.end(), 1.0 / static_cast<double>(n));
    }
    return out;
}

CutmixPlan plan_cutmix(const std::string& base_id, const DonorDistribution& distribution,
                       std::size_t height, std::size_t width, RectFractionRange range,
                       std::uint64_t seed) {
    if (!(range.lo > 0.0 && range.lo <= range.hi && range.hi <= 1.0))
        fail(ErrorKind::EmptyRange, "rect fraction range must satisfy 0 < lo <= hi <= 1");
    if (distribution.candidate_ids.empty()) fail(ErrorKind::NoCandidates, "no donor candidates");
    if (distribution.weights.size() != distribution.candidate_ids.size())
        fail(ErrorKind::ShapeMismatch, "distribution weights do not cover the candidates");
    require(height >= 1 && width >= 1, "image must be at least 1x1");

    CounterRng rng(derive_seed(seed, "cutmix"));
    CutmixPlan plan;
    plan.base_id = base_id;
    plan.seed = seed;

    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t donor = distribution.weights.size();
    for (std::size_t i = 0; i < distribution.weights.size(); ++i) {
        acc += distribution.weights[i];
        if (distribution.weights[i] > 0.0 && u < acc) {
            donor = i;
            break;
        }
    }
    if (donor == distribution.weights.size())
        for (std::size_t i = distribution.weights.size(); i-- > 0;)
            if (distribution.weights[i] > 0.0) {
                donor = i;
                break;
            }
    if (donor == distribution.weights.size())
        fail(ErrorKind::NoCandidates, "every donor weight is zero");
    plan.donor_id = distribution.candidate_ids[donor];

    const double fraction = range.lo == range.hi ? range.lo : rng.uniform(range.lo, range.hi);
    const double aspect = rng.uniform(0.5, 2.0);
    const double h_d = static_cast<double>(height);
    const double w_d = static_cast<double>(width);
    const double area = fraction * h_d * w_d;
    // Heights for which area / height still fits inside the width.
    const double h_lo = std::max(1.0, std::ceil(area / w_d - 1e-9));
    const double h_hi = std::max(h_lo, std::min(h_d, std::floor(area + 1e-9)));
    const double h = std::clamp(std::round(std::sqrt(aspect * area)), h_lo, std::min(h_hi, h_d));
    const double w = std::clamp(std::round(area / h), 1.0, w_d);
    plan.rect.height = static_cast<std::size_t>(h);
    plan.rect.width = static_cast<std::size_t>(w);
    plan.rect.x0 = static_cast<std::size_t>(rng.below(width - plan.rect.width + 1));
    plan.rect.y0 = static_cast<std::size_t>(rng.below(height - plan.rect.height + 1));
    return plan;
}

ImageLabelPair apply_cutmix(const ImageLabelPair& base, const ImageLabelPair& donor,
                            const CutmixPlan& plan) {
    check_same_shape(base, donor);
    const Rect& r = plan.rect;
    if (r.width < 1 || r.height < 1 || r.x0 + r.width > base.label.width ||
        r.y0 + r.height > base.label.height)
        fail(ErrorKind::RectOutOfBounds, "rect does not fit inside the image");
    ImageLabelPair out = base;
    for (std::size_t y = r.y0; y < r.y0 + r.height; ++y)
        for (std::size_t x = r.x0; x < r.x0 + r.width; ++x) {
            const std::size_t i = y * base.label.width + x;
            copy_pixel(out, i, donor, i);
        }
    return out;
}

CopyPastePlan plan_copy_paste(const std::string& base_id, const LabelMap& base_labels,
                              const std::string& donor_id, const LabelMap& donor_labels,
                              const std::set<std::uint16_t>& tail_classes, std::uint64_t seed,
                              std::size_t max_jitter) {
    if (base_labels.height != donor_labels.height || base_labels.width != donor_labels.width)
        fail(ErrorKind::ShapeMismatch, "base and donor label maps differ in shape");
    std::set<std::uint16_t> present;
    for (std::uint16_t v : donor_labels.values)
        if (v != kIgnoreLabel) present.insert(v);

    CopyPastePlan plan;
    plan.base_id = base_id;
    plan.donor_id = donor_id;
    plan.seed = seed;
    for (std::uint16_t c : present)
        if (!tail_classes.contains(c)) plan.copied_classes.push_back(c);
    if (plan.copied_classes.empty())
        fail(ErrorKind::NoCopyableClasses, "donor '" + donor_id + "' holds only tail classes");

    if (max_jitter > 0) {
        CounterRng rng(derive_seed(seed, "copy-paste"));
        const auto span = static_cast<std::uint64_t>(2 * max_jitter + 1);
        plan.dx = static_cast<std::ptrdiff_t>(rng.below(span)) - static_cast<std::ptrdiff_t>(max_jitter);
        plan.dy = static_cast<std::ptrdiff_t>(rng.below(span)) - static_cast<std::ptrdiff_t>(max_jitter);
    }
    return plan;
}

ImageLabelPair apply_copy_paste(const ImageLabelPair& base, const ImageLabelPair& donor,
                                const CopyPastePlan& plan) {
    check_same_shape(base, donor);
    const std::set<std::uint16_t> copied(plan.copied_classes.begin(), plan.copied_classes.end());
    const auto h = static_cast<std::ptrdiff_t>(base.label.height);
    const auto w = static_cast<std::ptrdiff_t>(base.label.width);
    ImageLabelPair out = base;
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const auto src = static_cast<std::size_t>(y * w + x);
            if (!copied.contains(donor.label.values[src])) continue;
            const std::ptrdiff_t ty = y + plan.dy;
            const std::ptrdiff_t tx = x + plan.dx;
            if (ty < 0 || ty >= h || tx < 0 || tx >= w) continue;
            copy_pixel(out, static_cast<std::size_t>(ty * w + tx), donor, src);
        }
    return out;
}

std::set<std::uint16_t> tail_classes(const std::vector<LabelMap>& labels,
                                     std::size_t num_categories, double quantile) {
    require(quantile >= 0.0 && quantile <= 1.0, "tail quantile must lie in [0, 1]");
    std::vector<std::size_t> counts(num_categories, 0);
    for (const auto& map : labels)
        for (std::uint16_t v : map.values)
            if (v != kIgnoreLabel && v < num_categories) ++counts[v];
    std::vector<std::uint16_t> order(num_categories);
    std::iota(order.begin(), order.end(), std::uint16_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint16_t a, std::uint16_t b) { return counts[a] < counts[b]; });
    const auto n_tail = static_cast<std::size_t>(
        std::floor(quantile * static_cast<double>(num_categories) + 1e-9));
    return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_tail)};
}

std::size_t provenance_violations(const ImageLabelPair& base, const ImageLabelPair& donor,
                                  const ImageLabelPair& output, std::ptrdiff_t dx,
                                  std::ptrdiff_t dy) {
    check_same_shape(base, donor);
    check_same_shape(base, output);
    const auto h = static_cast<std::ptrdiff_t>(base.label.height);
    const auto w = static_cast<std::ptrdiff_t>(base.label.width);
    std::size_t bad = 0;
    for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>(y * w + x);
            if (same_pixel(output, i, base, i)) continue;
            const std::ptrdiff_t sy = y - dy;
            const std::ptrdiff_t sx = x - dx;
            if (sy >= 0 && sy < h && sx >= 0 && sx < w &&
                same_pixel(output, i, donor, static_cast<std::size_t>(sy * w + sx)))
                continue;
            ++bad;
        }
    return bad;
}

nlohmann::json to_json(const CutmixPlan& plan) {
    return {{"kind", "cutmix"},
            {"base_id", plan.base_id},
            {"donor_id", plan.donor_id},
            {"rect",
             {{"x0", plan.rect.x0},
              {"y0", plan.rect.y0},
              {"width", plan.rect.width},
              {"height", plan.rect.height}}},
            {"seed", plan.seed}};
}

nlohmann::json to_json(const CopyPastePlan& plan) {
    return {{"kind", "copy_paste"},
            {"base_id", plan.base_id},
            {"donor_id", plan.donor_id},
            {"copied_classes", plan.copied_classes},
            {"paste_offset", {{"dx", plan.dx}, {"dy", plan.dy}}},
            {"seed", plan.seed}};
}

CutmixPlan cutmix_plan_from_json(const nlohmann::json& j) {
    try {
        if (j.at("kind").get<std::string>() != "cutmix")
            fail(ErrorKind::InvalidArgument, "plan kind is not cutmix");
        CutmixPlan p;
        p.base_id = j.at("base_id").get<std::string>();
        p.donor_id = j.at("donor_id").get<std::string>();
        const auto& r = j.at("rect");
        p.rect = {r.at("x0").get<std::size_t>(), r.at("y0").get<std::size_t>(),
                  r.at("width").get<std::size_t>(), r.at("height").get<std::size_t>()};
        p.seed = j.at("seed").get<std::uint64_t>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::MissingField, std::string("cutmix plan: ") + e.what());
    }
}

CopyPastePlan copy_paste_plan_from_json(const nlohmann::json& j) {
    try {
        if (j.at("kind").get<std::string>() != "copy_paste")
            fail(ErrorKind::InvalidArgument, "plan kind is not copy_paste");
        CopyPastePlan p;
        p.base_id = j.at("base_id").get<std::string>();
        p.donor_id = j.at("donor_id").get<std::string>();
        p.copied_classes = j.at("copied_classes").get<std::vector<std::uint16_t>>();
        p.dx = j.at("paste_offset").at("dx").get<std::ptrdiff_t>();
        p.dy = j.at("paste_offset").at("dy").get<std::ptrdiff_t>();
        p.seed = j.at("seed").get<std::uint64_t>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::MissingField, std::string("copy-paste plan: ") + e.what());
    }
}

}  // namespace anchorda
