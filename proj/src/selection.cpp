#include "anchorda/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "anchorda/error.hpp"
#include "anchorda/parallel.hpp"
#include "anchorda/rng.hpp"

namespace anchorda {
namespace {

[[noreturn]] void missing(Metric metric, const std::string& what, const std::string& sample_id) {
    fail(ErrorKind::MissingInput,
         "metric " + to_string(metric) + " needs " + what + " for sample '" + sample_id + "'");
}

const std::vector<double>& need_vector(const SampleRecord& s, Metric metric) {
    if (!s.vector) missing(metric, "an image vector", s.id);
    return *s.vector;
}

double entropy_of(const SampleRecord& s, Metric metric) {
    if (!s.probabilities) missing(metric, "a probability map", s.id);
    return score_entropy(*s.probabilities, s.probabilities->channels);
}

double adversarial_of(const SampleRecord& s, Metric metric) {
    if (!s.discriminator_score) missing(metric, "a discriminator score", s.id);
    return score_adversarial(*s.discriminator_score);
}

// Ranking order: by score in the configured direction, ties by ascending id.
std::vector<std::size_t> rank_order(const std::vector<SampleRecord>& samples,
                                    const std::vector<double>& scores, Direction direction) {
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b])
            return direction == Direction::largest ? scores[a] > scores[b] : scores[a] < scores[b];
        return samples[a].id < samples[b].id;
    });
    return order;
}

SelectionReport make_report(const std::vector<SampleRecord>& samples,
                            const std::vector<double>& scores,
                            const std::vector<std::size_t>& order, const SelectionConfig& cfg,
                            const SelectionContext& ctx) {
    SelectionReport report;
    report.metric = cfg.metric;
    report.direction = cfg.direction;
    report.budget_fraction = cfg.budget_fraction;
    report.budget_count = budget_count(cfg.budget_fraction, samples.size());
    report.samples.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        report.samples[i] = {samples[i].id, scores[i], 0};
    for (std::size_t r = 0; r < order.size(); ++r) report.samples[order[r]].rank = r;
    for (std::size_t r = 0; r < report.budget_count; ++r)
        report.selected_ids.push_back(samples[order[r]].id);
    if (ctx.source_bank) report.source_bank_fingerprint = fingerprint(*ctx.source_bank);
    if (ctx.target_bank) report.target_bank_fingerprint = fingerprint(*ctx.target_bank);
    return report;
}

}  // namespace

Metric parse_metric(const std::string& name) {
    for (Metric m : kAllMetrics)
        if (to_string(m) == name) return m;
    fail(ErrorKind::InvalidArgument, "unknown metric '" + name + "'");
}

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::dual_domain: return "dual_domain";
        case Metric::mada_source_only: return "mada_source_only";
        case Metric::random: return "random";
        case Metric::entropy: return "entropy";
        case Metric::adversarial: return "adversarial";
        case Metric::aada: return "aada";
        case Metric::prototype: return "prototype";
    }
    return "unknown";
}

Direction parse_direction(const std::string& name) {
    if (name == "largest") return Direction::largest;
    if (name == "smallest") return Direction::smallest;
    fail(ErrorKind::InvalidArgument, "direction must be largest or smallest, got '" + name + "'");
}

std::string to_string(Direction direction) {
    return direction == Direction::largest ? "largest" : "smallest";
}

void SelectionConfig::validate() const {
    require(budget_fraction > 0.0 && budget_fraction <= 1.0,
            "budget_fraction must lie in (0, 1], got " + std::to_string(budget_fraction));
}

double source_anchor_distance(std::span<const double> feature, const AnchorBank& source_bank) {
    return nearest(source_bank, feature).squared_distance;
}

double dual_domain_distance(std::span<const double> feature, const AnchorBank& source_bank,
                            const AnchorBank& target_bank) {
    if (source_bank.dim() != target_bank.dim())
        fail(ErrorKind::ShapeMismatch, "source bank has " + std::to_string(source_bank.dim()) +
                                           " dims, target bank has " +
                                           std::to_string(target_bank.dim()));
    return nearest(source_bank, feature).squared_distance +
           nearest(target_bank, feature).squared_distance;
}

double score_entropy(const ProbabilityMap& probabilities, std::size_t num_categories) {
    require(num_categories >= 2, "entropy needs at least 2 categories");
    if (probabilities.channels != num_categories)
        fail(ErrorKind::ShapeMismatch, "probability map has " +
                                           std::to_string(probabilities.channels) +
                                           " channels, expected " + std::to_string(num_categories));
    double total = 0.0;
    for (std::size_t i = 0; i < probabilities.pixels(); ++i) {
        double sum = 0.0;
        double h = 0.0;
        for (std::size_t c = 0; c < num_categories; ++c) {
            const double p = probabilities.at(c, i);
            if (!(p >= 0.0))
                fail(ErrorKind::NotNormalized, "pixel " + std::to_string(i) + " has negative probability");
            sum += p;
            if (p > 0.0) h += p * std::log(p);
        }
        if (std::abs(sum - 1.0) > 1e-4)
            fail(ErrorKind::NotNormalized,
                 "pixel " + std::to_string(i) + " probabilities sum to " + std::to_string(sum));
        total += h;
    }
    return -total / std::log(static_cast<double>(num_categories));
}

double score_adversarial(double discriminator_prob) {
    if (!(discriminator_prob > 0.0))
        fail(ErrorKind::ZeroProbability, "discriminator probability must be > 0");
    require(discriminator_prob <= 1.0, "discriminator probability must be <= 1");
    return (1.0 - discriminator_prob) / discriminator_prob;
}

double score_aada(double entropy_score, double adversarial_score) {
    require(std::isfinite(entropy_score) && std::isfinite(adversarial_score),
            "aada inputs must be finite");
    return entropy_score * adversarial_score;
}

double score_prototype(std::span<const double> feature, std::span<const double> centroid) {
    return squared_distance(feature, centroid);
}

std::size_t budget_count(double fraction, std::size_t n) {
    require(fraction > 0.0 && fraction <= 1.0, "budget fraction must lie in (0, 1]");
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
    return std::min(n, std::max<std::size_t>(1, k));
}

std::vector<double> score_samples(const std::vector<SampleRecord>& samples,
                                  const SelectionConfig& cfg, const SelectionContext& ctx) {
    const Metric metric = cfg.metric;
    const std::size_t n = samples.size();
    std::vector<double> scores(n, 0.0);

    switch (metric) {
        case Metric::dual_domain:
        case Metric::mada_source_only:
            if (!ctx.source_bank) missing(metric, "a source anchor bank", "*");
            if (metric == Metric::dual_domain && !ctx.target_bank)
                missing(metric, "a target anchor bank", "*");
            break;
        case Metric::prototype:
            if (!ctx.centroid) missing(metric, "a domain centroid", "*");
            break;
        default: break;
    }
    for (const auto& s : samples) {
        switch (metric) {
            case Metric::dual_domain:
            case Metric::mada_source_only:
            case Metric::prototype: need_vector(s, metric); break;
            case Metric::entropy:
                if (!s.probabilities) missing(metric, "a probability map", s.id);
                break;
            case Metric::adversarial:
                if (!s.discriminator_score) missing(metric, "a discriminator score", s.id);
                break;
            case Metric::aada:
                if (!s.probabilities) missing(metric, "a probability map", s.id);
                if (!s.discriminator_score) missing(metric, "a discriminator score", s.id);
                break;
            case Metric::random: break;
        }
    }

    if (metric == Metric::random) {
        // Seeded Fisher-Yates shuffle; earlier shuffle positions score higher.
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        CounterRng rng(derive_seed(cfg.seed, "random-selection"));
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        for (std::size_t pos = 0; pos < n; ++pos)
            scores[perm[pos]] = static_cast<double>(n - pos) / static_cast<double>(n);
        return scores;
    }

    parallel_for(n, [&](std::size_t i) {
        const auto& s = samples[i];
        switch (metric) {
            case Metric::dual_domain:
                scores[i] = dual_domain_distance(*s.vector, *ctx.source_bank, *ctx.target_bank);
                break;
            case Metric::mada_source_only:
                scores[i] = source_anchor_distance(*s.vector, *ctx.source_bank);
                break;
            case Metric::prototype: scores[i] = score_prototype(*s.vector, *ctx.centroid); break;
            case Metric::entropy: scores[i] = entropy_of(s, metric); break;
            case Metric::adversarial: scores[i] = adversarial_of(s, metric); break;
            case Metric::aada:
                scores[i] = score_aada(entropy_of(s, metric), adversarial_of(s, metric));
                break;
            case Metric::random: break;
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        if (std::isnan(scores[i]))
            fail(ErrorKind::InvalidArgument, "score for sample '" + samples[i].id + "' is NaN");
    return scores;
}

SelectionReport select(const std::vector<SampleRecord>& samples, const SelectionConfig& cfg,
                       const SelectionContext& ctx) {
    cfg.validate();
    if (samples.empty()) fail(ErrorKind::TooFewSamples, "no samples to select from");
    const auto scores = score_samples(samples, cfg, ctx);
    const auto order = rank_order(samples, scores, cfg.direction);
    return make_report(samples, scores, order, cfg, ctx);
}

std::vector<SelectionReport> budget_sweep(const std::vector<SampleRecord>& samples,
                                          const std::vector<double>& fractions,
                                          const SelectionConfig& cfg,
                                          const SelectionContext& ctx) {
    for (double f : fractions) {
        SelectionConfig c = cfg;
        c.budget_fraction = f;
        c.validate();
    }
    if (samples.empty()) fail(ErrorKind::TooFewSamples, "no samples to select from");
    const auto scores = score_samples(samples, cfg, ctx);
    const auto order = rank_order(samples, scores, cfg.direction);
    std::vector<SelectionReport> out;
    out.reserve(fractions.size());
    for (double f : fractions) {
        SelectionConfig c = cfg;
        c.budget_fraction = f;
        out.push_back(make_report(samples, scores, order, c, ctx));
    }
    return out;
}

nlohmann::json to_json(const SelectionReport& report) {
    nlohmann::json scores = nlohmann::json::object();
    nlohmann::json ranks = nlohmann::json::object();
    for (const auto& s : report.samples) {
        scores[s.id] = s.score;
        ranks[s.id] = s.rank;
    }
    nlohmann::json j;
    j["metric"] = to_string(report.metric);
    j["direction"] = to_string(report.direction);
    j["budget_fraction"] = report.budget_fraction;
    j["budget_count"] = report.budget_count;
    j["selected_ids"] = report.selected_ids;
    j["scores"] = std::move(scores);
    j["ranks"] = std::move(ranks);
    j["source_bank_fingerprint"] = report.source_bank_fingerprint;
    j["target_bank_fingerprint"] = report.target_bank_fingerprint;
    return j;
}

}  // namespace anchorda
