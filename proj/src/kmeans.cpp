#include "anchorda/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "anchorda/aggregation.hpp"
#include "anchorda/error.hpp"
#include "anchorda/parallel.hpp"
#include "anchorda/rng.hpp"

namespace anchorda {
namespace {

struct SeedResult {
    Matrix anchors;
    bool degenerate = false;
};

SeedResult seed_anchors(const Matrix& points, std::size_t k, std::uint64_t seed) {
    const std::size_t n = points.rows();
    CounterRng rng(derive_seed(seed, "kmeans++"));
    SeedResult out{Matrix(k, points.cols()), false};

    auto copy_row = [&](std::size_t dst, std::size_t src) {
        std::copy(points.row(src).begin(), points.row(src).end(), out.anchors.row(dst).begin());
    };

    copy_row(0, rng.below(n));
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points.row(i), out.anchors.row(0));

    for (std::size_t j = 1; j < k; ++j) {
        double total = 0.0;
        for (double d : nearest) total += d;
        std::size_t chosen = n - 1;
        if (total <= 0.0) {
            out.degenerate = true;
            chosen = rng.below(n);
        } else {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest[i];
                if (nearest[i] > 0.0 && acc > target) {
                    chosen = i;
                    break;
                }
            }
            // Rounding can leave `target` past the last bin; take the last positive one.
            if (acc <= target)
                for (std::size_t i = n; i-- > 0;)
                    if (nearest[i] > 0.0) {
                        chosen = i;
                        break;
                    }
        }
        copy_row(j, chosen);
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], squared_distance(points.row(i), out.anchors.row(j)));
    }
    return out;
}

double objective(const Matrix& points, const Matrix& anchors,
                 const std::vector<std::size_t>& assignment) {
    double sse = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i)
        sse += squared_distance(points.row(i), anchors.row(assignment[i]));
    return sse;
}

// Empty clusters take the point farthest from the centroid of the currently
// largest cluster; that point becomes the new anchor so the objective cannot rise.
void repair_empty_clusters(const Matrix& points, Matrix& anchors,
                           std::vector<std::size_t>& assignment, std::vector<double>& distance) {
    const std::size_t k = anchors.rows();
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t a : assignment) ++sizes[a];
    for (std::size_t empty = 0; empty < k; ++empty) {
        if (sizes[empty] != 0) continue;
        const std::size_t largest =
            static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        std::size_t farthest = points.rows();
        double best = -1.0;
        for (std::size_t i = 0; i < points.rows(); ++i)
            if (assignment[i] == largest && distance[i] > best) {
                best = distance[i];
                farthest = i;
            }
        assignment[farthest] = empty;
        distance[farthest] = 0.0;
        std::copy(points.row(farthest).begin(), points.row(farthest).end(),
                  anchors.row(empty).begin());
        --sizes[largest];
        ++sizes[empty];
    }
}

Matrix cluster_means(const Matrix& points, const std::vector<std::size_t>& assignment,
                     std::size_t k) {
    Matrix sums(k, points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        auto dst = sums.row(assignment[i]);
        auto src = points.row(i);
        for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += src[d];
        ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (double& x : sums.row(c)) x /= static_cast<double>(counts[c]);
    return sums;
}

}  // namespace

void KMeansConfig::validate(std::size_t num_points) const {
    require(k >= 1, "K must be >= 1");
    require(max_iters >= 1, "max_iters must be >= 1");
    require(tol >= 0.0 && std::isfinite(tol), "tol must be finite and >= 0");
    if (num_points < k)
        fail(ErrorKind::TooFewSamples, "K = " + std::to_string(k) + " exceeds the " +
                                           std::to_string(num_points) + " input vectors");
}

Assignment assign(const Matrix& points, const Matrix& anchors) {
    if (anchors.rows() == 0) fail(ErrorKind::InvalidArgument, "no anchors to assign to");
    if (points.rows() > 0 && points.cols() != anchors.cols())
        fail(ErrorKind::ShapeMismatch, "vectors have " + std::to_string(points.cols()) +
                                           " dims, anchors have " + std::to_string(anchors.cols()));
    Assignment out;
    out.index.resize(points.rows());
    out.distance.resize(points.rows());
    parallel_for(points.rows(), [&](std::size_t i) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < anchors.rows(); ++k) {
            const double d = squared_distance(points.row(i), anchors.row(k));
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        out.index[i] = best;
        out.distance[i] = best_d;
    });
    return out;
}

Matrix kmeanspp_seeds(const Matrix& points, std::size_t k, std::uint64_t seed) {
    KMeansConfig cfg;
    cfg.k = k;
    cfg.validate(points.rows());
    return seed_anchors(points, k, seed).anchors;
}

Clustering kmeans_fit(const Matrix& input, const KMeansConfig& cfg) {
    cfg.validate(input.rows());
    Matrix normalized;
    if (cfg.normalize) {
        normalized = input;
        l2_normalize_rows(normalized);
    }
    const Matrix& points = cfg.normalize ? normalized : input;

    auto seeded = seed_anchors(points, cfg.k, cfg.seed);
    Clustering out;
    out.config = cfg;
    out.degenerate = seeded.degenerate;
    out.anchors = std::move(seeded.anchors);

    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        auto a = assign(points, out.anchors);
        repair_empty_clusters(points, out.anchors, a.index, a.distance);
        out.assignment = std::move(a.index);
        out.sse_history.push_back(objective(points, out.anchors, out.assignment));

        Matrix updated = cluster_means(points, out.assignment, cfg.k);
        double shift = 0.0;
        for (std::size_t c = 0; c < cfg.k; ++c)
            shift = std::max(shift, std::sqrt(squared_distance(updated.row(c), out.anchors.row(c))));
        out.anchors = std::move(updated);
        out.iterations_run = it;
        out.sse_history.push_back(objective(points, out.anchors, out.assignment));
        if (shift < cfg.tol || shift == 0.0) break;
    }
    out.sse = out.sse_history.back();
    return out;
}

Clustering kmeans_best_of(const Matrix& points, const KMeansConfig& cfg, std::size_t restarts) {
    require(restarts >= 1, "restarts must be >= 1");
    Clustering best = kmeans_fit(points, cfg);
    for (std::size_t r = 1; r < restarts; ++r) {
        KMeansConfig c = cfg;
        c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
        Clustering candidate = kmeans_fit(points, c);
        if (candidate.sse < best.sse) best = std::move(candidate);
    }
    return best;
}

std::vector<AnchorCountPoint> sweep_anchor_count(const Matrix& points,
                                                 const std::vector<std::size_t>& k_list,
                                                 const KMeansConfig& cfg, std::size_t restarts) {
    for (std::size_t k : k_list) {
        KMeansConfig c = cfg;
        c.k = k;
        c.validate(points.rows());
    }
    std::vector<AnchorCountPoint> out;
    out.reserve(k_list.size());
    for (std::size_t k : k_list) {
        KMeansConfig c = cfg;
        c.k = k;
        const Clustering fit = kmeans_best_of(points, c, restarts);
        out.push_back({k, fit.sse, fit.iterations_run});
    }
    return out;
}

}  // namespace anchorda
