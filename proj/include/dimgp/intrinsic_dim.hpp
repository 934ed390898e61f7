#pragma once

#include "dimgp/dataset.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dimgp {

struct IdParams {
    int k = 20;               // neighbors for local estimators; min(k, n-1) in effect
    double lpca_alpha = 0.05; // eigenvalue significance threshold
    int corrint_scales = 10;  // log-spaced radii between the 10th and 50th
                              // percentiles of pairwise distances
    int knn_repeats = 3;      // subsample draws averaged per graph size
    std::uint64_t subsample_seed = 1813; // fixed default so a profile depends
                                         // only on the data
};

/// Per-estimator values plus the aggregated target window
/// [mean - stdev, mean + stdev], with the lower edge floored at 0.
struct IDProfile {
    std::map<std::string, double> estimates;
    std::map<std::string, std::string> failures; // estimator -> reason
    double id_mean = 0.0;
    double id_stdev = 0.0;
    double id_min = 0.0;
    double id_max = 0.0;
};

/// Canonical estimator names: CorrInt, KNN, MADA, MLE, MoM, TwoNN, lPCA.
const std::vector<std::string>& default_estimators();

/// Run one estimator. Throws EstimatorError with the failure reason when the
/// dataset is too small or degenerate for the method.
double estimate_id(const Dataset& d, const std::string& method,
                   const IdParams& params = {});

/// Aggregate already-computed estimates into a profile (population stdev,
/// window floored at 0). Throws if fewer than two estimates are present.
IDProfile make_profile(std::map<std::string, double> estimates,
                       std::map<std::string, std::string> failures);

/// Run the suite, recording failures, and aggregate the successes.
/// Throws if fewer than two estimators succeed.
IDProfile id_profile(const Dataset& d,
                     const std::vector<std::string>& methods = default_estimators(),
                     const IdParams& params = {}, int threads = 1);

} // namespace dimgp
