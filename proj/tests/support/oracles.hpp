#pragma once

// Independent reference implementations used to check the library. They are
// deliberately naive: plain loops, no shared helpers with src/.

#include <cstdint>
#include <functional>
#include <vector>

#include "anchorda/augment.hpp"

namespace anchorda::testing {

using Points = std::vector<std::vector<double>>;

struct LloydResult {
    Points centroids;
    std::vector<std::size_t> labels;
    double sse = 0.0;
    std::size_t iterations = 0;
};

// Textbook Lloyd from the given initial centroids. Stops when the largest
// centroid move is below tol. Requires that no cluster ever empties.
LloydResult lloyd(const Points& points, Points centroids, std::size_t max_iters, double tol);

double sq_dist(const std::vector<double>& a, const std::vector<double>& b);

// min over every source anchor plus min over every target anchor.
double brute_dual_distance(const std::vector<double>& f, const Points& source, const Points& target);

// Central differences of `fn` at x with step h.
std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& fn,
                                       const std::vector<double>& x, double h);

// Counts output pixels whose (feature vector, label) pair equals neither the
// base pixel at the same position nor the donor pixel shifted by (dx, dy).
std::size_t traced_violations(const ImageLabelPair& base, const ImageLabelPair& donor,
                              const ImageLabelPair& out, std::ptrdiff_t dx, std::ptrdiff_t dy);

// Per-class softmax of (1 - conf) across candidates, summed and renormalized.
std::vector<double> donor_weights(const std::vector<ClassConfidence>& confidences);

}  // namespace anchorda::testing
