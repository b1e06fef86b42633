#pragma once

// Lloyd K-means with distance-proportional (k-means++) seeding.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anchorda/matrix.hpp"

namespace anchorda {

struct KMeansConfig {
    std::size_t k = 10;
    std::size_t max_iters = 100;
    double tol = 1e-6;  // stop once the largest centroid shift (L2) drops below this
    std::uint64_t seed = 0;
    bool normalize = false;  // L2-normalize inputs before clustering

    // Throws InvalidArgument / TooFewSamples.
    void validate(std::size_t num_points) const;
};

struct Clustering {
    Matrix anchors;                      // K x D
    std::vector<std::size_t> assignment; // per input row, in [0, K)
    double sse = 0.0;
    std::size_t iterations_run = 0;
    // Objective after every assignment step and every centroid update, in order.
    std::vector<double> sse_history;
    // Fewer distinct inputs than K: some anchors are duplicates.
    bool degenerate = false;
    KMeansConfig config;
};

struct Assignment {
    std::vector<std::size_t> index;
    std::vector<double> distance;  // squared L2 to the chosen anchor
};

// Nearest anchor per row by squared L2; ties go to the smallest index.
Assignment assign(const Matrix& points, const Matrix& anchors);

// The seeding used by kmeans_fit, exposed so independent Lloyd
// implementations can start from identical anchors.
Matrix kmeanspp_seeds(const Matrix& points, std::size_t k, std::uint64_t seed);

Clustering kmeans_fit(const Matrix& points, const KMeansConfig& cfg);

// Lowest-SSE fit over `restarts` seeds. Restart 0 uses cfg.seed, restart r
// uses derive_seed(cfg.seed, r); ties keep the earliest restart.
Clustering kmeans_best_of(const Matrix& points, const KMeansConfig& cfg, std::size_t restarts);

struct AnchorCountPoint {
    std::size_t k = 0;
    double sse = 0.0;
    std::size_t iterations_run = 0;
};

std::vector<AnchorCountPoint> sweep_anchor_count(const Matrix& points,
                                                 const std::vector<std::size_t>& k_list,
                                                 const KMeansConfig& cfg,
                                                 std::size_t restarts = 1);

}  // namespace anchorda
