#pragma once

// Synthetic multimodal source/target domains and the selection, budget and
// anchor-count protocols run against them. Segmentation accuracy is replaced
// by proxies that can be checked against the known mixture modes:
//   exclusive_mode_recall  fraction of selected samples from target-only modes
//   coverage               fraction of target-only samples that were selected

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "anchorda/kmeans.hpp"
#include "anchorda/selection.hpp"

namespace anchorda {

inline constexpr const char* kProxyNote =
    "desk-scale proxies: exclusive_mode_recall and coverage against known mixture modes "
    "stand in for segmentation mIoU; no network is trained";

struct MixtureMode {
    std::vector<double> mean;
    double covariance_scale = 1.0;  // isotropic covariance scale * I
    double weight = 0.0;
    bool exclusive = false;  // present in the target domain only
};

struct SyntheticDomainSpec {
    std::vector<MixtureMode> modes;
    std::size_t samples_per_domain = 500;
    std::uint64_t seed = 0;
    // When set, the source also draws from exclusive modes, making the two
    // domains identically distributed (exclusive flags then only tag samples).
    bool source_includes_exclusive = false;

    std::size_t dimension() const;
    // Throws InvalidArgument; require_exclusive demands >= 1 shared and >= 1 exclusive mode.
    void validate(bool require_exclusive = false) const;
};

struct SyntheticSample {
    std::string id;
    std::vector<double> vector;
    std::size_t mode = 0;
    bool exclusive = false;
};

struct SyntheticDomains {
    std::vector<SyntheticSample> source;
    std::vector<SyntheticSample> target;
};

SyntheticDomains generate_domains(const SyntheticDomainSpec& spec);

struct BenchConfig {
    std::size_t k = 10;
    std::size_t restarts = 1;
    std::size_t max_iters = 100;
    double tol = 1e-6;
    double budget_fraction = kDefaultBudgetFraction;
    std::vector<double> fractions = {0.01, 0.02, 0.05, 0.10, 0.20};
    std::vector<std::size_t> k_list = {1, 2, 5, 10, 20, 50, 100};
    std::vector<Metric> strategies = {std::begin(kAllMetrics), std::end(kAllMetrics)};
    Metric sweep_metric = Metric::dual_domain;
    std::uint64_t seed = 0;  // keys clustering and the random strategy
};

struct StrategyResult {
    Metric metric = Metric::dual_domain;
    double exclusive_mode_recall = 0.0;
    double coverage = 0.0;
    double mean_min_anchor_distance = 0.0;
    double runtime_ms = 0.0;
    std::vector<std::string> selected_ids;
};

struct BudgetRow {
    double fraction = 0.0;
    std::size_t budget_count = 0;
    double exclusive_mode_recall = 0.0;
    double coverage = 0.0;
    bool nested_in_next = true;  // selection is a subset of the next row's
};

struct AnchorRow {
    std::size_t k = 0;
    double sse = 0.0;
    double exclusive_mode_recall = 0.0;
};

struct BenchmarkReport {
    std::string protocol;
    std::string config_fingerprint;
    std::vector<StrategyResult> strategies;
    std::vector<BudgetRow> budget_rows;
    std::vector<AnchorRow> anchor_rows;
};

// Everything a selection strategy needs, built once per domain pair:
// source / warm-up target banks from K-means, the source centroid, and target
// sample records with synthetic prediction and discriminator proxies.
struct PreparedDomains {
    AnchorBank source_bank;
    AnchorBank target_bank;
    std::vector<double> source_centroid;
    std::vector<SampleRecord> target_records;
    std::vector<bool> target_exclusive;
    double target_sse = 0.0;  // objective of the target-domain clustering
};

PreparedDomains prepare_domains(const SyntheticDomains& domains, const BenchConfig& cfg);

double exclusive_mode_recall(const std::vector<std::string>& selected_ids,
                             const std::vector<SyntheticSample>& target);
double exclusive_coverage(const std::vector<std::string>& selected_ids,
                          const std::vector<SyntheticSample>& target);

BenchmarkReport run_strategy_comparison(const SyntheticDomains& domains,
                                        const std::vector<Metric>& strategies,
                                        double budget_fraction, const BenchConfig& cfg);
BenchmarkReport run_budget_sweep(const SyntheticDomains& domains,
                                 const std::vector<double>& fractions, const BenchConfig& cfg);
BenchmarkReport run_anchor_sweep(const SyntheticDomains& domains,
                                 const std::vector<std::size_t>& k_list, const BenchConfig& cfg);

// A versioned benchmark spec file: domain mixture, protocol knobs and the
// fixed seed list every protocol is repeated over.
struct BenchSpecFile {
    int version = 1;
    SyntheticDomainSpec domain;
    BenchConfig config;
    std::vector<std::uint64_t> seeds = {0};
};

BenchSpecFile bench_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchSpecFile& spec);
BenchSpecFile load_bench_spec(const std::filesystem::path& path);
std::string fingerprint(const BenchSpecFile& spec);

enum class Protocol { compare, budget_sweep, anchor_sweep };
Protocol parse_protocol(const std::string& name);
std::string to_string(Protocol protocol);

struct SeededReport {
    std::uint64_t seed = 0;
    BenchmarkReport report;
};

struct ProtocolRun {
    Protocol protocol = Protocol::compare;
    std::string config_fingerprint;
    std::vector<SeededReport> runs;
};

// Runs the protocol once per seed in spec.seeds; the domain and clustering
// streams of each run are keyed by that seed.
ProtocolRun run_protocol(const BenchSpecFile& spec, Protocol protocol);

nlohmann::json to_json(const BenchmarkReport& report, bool include_timing = false);
nlohmann::json to_json(const ProtocolRun& run, bool include_timing = false);
std::string format_table(const ProtocolRun& run, bool include_timing = false);

}  // namespace anchorda
