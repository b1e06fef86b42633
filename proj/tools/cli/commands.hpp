#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace anchorda::cli {

struct GlobalOptions {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::filesystem::path out = "out";
};

struct AggregateOptions {
    std::filesystem::path manifest;
    std::string map = "ground_truth";
};

struct ClusterOptions {
    std::filesystem::path vectors;
    std::size_t k = 10;
    std::string domain = "source";
    double alpha = 0.999;
    std::size_t max_iters = 100;
    double tol = 1e-6;
    std::size_t restarts = 1;
    bool normalize = false;
};

struct SelectOptions {
    std::filesystem::path vectors;
    std::optional<std::filesystem::path> source_bank;
    std::optional<std::filesystem::path> target_bank;
    std::optional<std::filesystem::path> manifest;
    std::optional<std::filesystem::path> source_vectors;
    std::string metric = "dual_domain";
    std::string direction = "largest";
    double budget = 0.05;
    bool normalize = false;
};

struct UpdateBankOptions {
    std::filesystem::path bank;
    std::filesystem::path vectors;
    std::optional<double> alpha;
    bool normalize = false;
};

struct LossEvalOptions {
    std::filesystem::path manifest;
    std::filesystem::path target_bank;
    double ohem_threshold = 0.7;
    double ohem_min_kept = 1.0 / 16.0;
    std::string dis_scope = "all";
    bool normalize = false;
};

struct AugmentOptions {
    std::filesystem::path manifest;
    std::string kind = "both";
    std::optional<std::filesystem::path> plans;
    double tail_quantile = 0.3;
    double fraction_lo = 0.25;
    double fraction_hi = 0.5;
    std::size_t jitter = 0;
};

struct BenchOptions {
    std::filesystem::path spec;
    std::string protocol = "compare";
    bool timing = false;
};

void run_aggregate(const GlobalOptions& g, const AggregateOptions& o);
void run_cluster(const GlobalOptions& g, const ClusterOptions& o);
void run_select(const GlobalOptions& g, const SelectOptions& o);
void run_update_bank(const GlobalOptions& g, const UpdateBankOptions& o);
void run_loss_eval(const GlobalOptions& g, const LossEvalOptions& o);
void run_augment(const GlobalOptions& g, const AugmentOptions& o);
void run_bench(const GlobalOptions& g, const BenchOptions& o);

}  // namespace anchorda::cli
