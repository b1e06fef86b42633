#pragma once

// Target-sample scoring and budgeted selection.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "anchorda/anchor_bank.hpp"
#include "anchorda/maps.hpp"

namespace anchorda {

inline constexpr double kDefaultBudgetFraction = 0.05;

enum class Metric { dual_domain, mada_source_only, random, entropy, adversarial, aada, prototype };
enum class Direction { largest, smallest };

inline constexpr Metric kAllMetrics[] = {Metric::dual_domain, Metric::mada_source_only,
                                         Metric::random,      Metric::entropy,
                                         Metric::adversarial, Metric::aada,
                                         Metric::prototype};

Metric parse_metric(const std::string& name);
std::string to_string(Metric metric);
Direction parse_direction(const std::string& name);
std::string to_string(Direction direction);

struct SelectionConfig {
    double budget_fraction = kDefaultBudgetFraction;
    Metric metric = Metric::dual_domain;
    std::uint64_t seed = 0;  // random metric only
    Direction direction = Direction::largest;

    void validate() const;
};

struct SampleRecord {
    std::string id;
    std::optional<std::vector<double>> vector;
    std::optional<ProbabilityMap> probabilities;
    std::optional<double> discriminator_score;
};

// Whatever the chosen metric needs beyond the per-sample records.
struct SelectionContext {
    const AnchorBank* source_bank = nullptr;
    const AnchorBank* target_bank = nullptr;
    const std::vector<double>* centroid = nullptr;  // prototype metric
};

struct ScoredSample {
    std::string id;
    double score = 0.0;
    std::size_t rank = 0;  // 0 = first picked
};

struct SelectionReport {
    Metric metric = Metric::dual_domain;
    Direction direction = Direction::largest;
    double budget_fraction = kDefaultBudgetFraction;
    std::size_t budget_count = 0;
    std::vector<ScoredSample> samples;  // input order
    std::vector<std::string> selected_ids;  // rank order
    std::string source_bank_fingerprint;
    std::string target_bank_fingerprint;
};

// min_k |F - A^s_k|^2 + min_k |F - A^w_k|^2
double dual_domain_distance(std::span<const double> feature, const AnchorBank& source_bank,
                            const AnchorBank& target_bank);
// First term only.
double source_anchor_distance(std::span<const double> feature, const AnchorBank& source_bank);

// -(1/log C) * sum over pixels and classes of p log p.
double score_entropy(const ProbabilityMap& probabilities, std::size_t num_categories);
// (1 - p) / p for discriminator output p in (0, 1].
double score_adversarial(double discriminator_prob);
double score_aada(double entropy_score, double adversarial_score);
double score_prototype(std::span<const double> feature, std::span<const double> centroid);

// max(1, floor(fraction * n)), capped at n.
std::size_t budget_count(double fraction, std::size_t n);

std::vector<double> score_samples(const std::vector<SampleRecord>& samples,
                                  const SelectionConfig& cfg, const SelectionContext& ctx);

SelectionReport select(const std::vector<SampleRecord>& samples, const SelectionConfig& cfg,
                       const SelectionContext& ctx);

// Scores once, then cuts the same ranking at each fraction, so every
// selection is a prefix of the larger ones.
std::vector<SelectionReport> budget_sweep(const std::vector<SampleRecord>& samples,
                                          const std::vector<double>& fractions,
                                          const SelectionConfig& cfg,
                                          const SelectionContext& ctx);

// {metric, direction, budget_fraction, budget_count, selected_ids, scores,
//  ranks, source_bank_fingerprint, target_bank_fingerprint}
nlohmann::json to_json(const SelectionReport& report);

}  // namespace anchorda
