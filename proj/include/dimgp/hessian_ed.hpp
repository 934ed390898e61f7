#pragma once

#include "dimgp/dataset.hpp"
#include "dimgp/expr.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace dimgp {

/// Averaged finite-difference Hessian and its rank.
struct HessianEstimate {
    Eigen::MatrixXd h_bar;           // p x p, symmetric
    int points_used = 0;
    int entry_failures = 0;          // entries zeroed due to non-finite values
    Eigen::VectorXd singular_values; // descending
    int ed = 0;
    std::vector<int> per_point_ranks; // rank of each per-point Hessian, for
                                      // spotting sign cancellation
};

/// Central-difference Hessian of the model at x. Step per axis is
/// epsilon^(1/6) * max(1, |x_i|). Non-finite entries are zeroed.
Eigen::MatrixXd numerical_hessian(const StackModel& m, const Eigen::VectorXd& x,
                                  int* entry_failures = nullptr);

/// Rank by singular values: count of sigma > max(1e-6 * sigma_max, 1e-8).
std::pair<int, Eigen::VectorXd> rank_with_tolerance(const Eigen::MatrixXd& m);

/// ED from the Hessian averaged over the three strategic points.
HessianEstimate effective_dimensionality(const StackModel& m, const Dataset& d);

/// ED from Hessians averaged over n_points dataset rows sampled uniformly
/// (without replacement; with replacement if n_points exceeds the row count).
HessianEstimate effective_dimensionality_random(const StackModel& m, const Dataset& d,
                                                int n_points, std::uint64_t seed);

/// Per-genotype ED memo. The metric is expensive, so selection loops share
/// one cache keyed on the canonical token string.
class EdCache {
public:
    int ed_for(const StackModel& m, const Dataset& d);
    std::size_t size() const { return cache_.size(); }

private:
    std::unordered_map<std::string, int> cache_;
};

} // namespace dimgp
