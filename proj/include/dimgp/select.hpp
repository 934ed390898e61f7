#pragma once

#include "dimgp/dataset.hpp"
#include "dimgp/evolve.hpp"
#include "dimgp/intrinsic_dim.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dimgp {

enum class Band { Ideal, Close, Far };

const char* band_name(Band b);

/// Ideal when ed lies inside [id_min, id_max]; Close when within one unit of
/// the window; Far otherwise.
Band classify_band(int ed, const IDProfile& profile);

struct SelectionResult {
    std::vector<ScoredModel> models; // EDs filled in
    Band band_used = Band::Ideal;
    bool fallback = false; // true when Ideal was empty (or both were)
    bool empty = false;    // true when neither Ideal nor Close had members
};

/// Ideal subset of the front in front order; falls back to Close (flagged)
/// when Ideal is empty. EDs are computed on demand and cached.
SelectionResult select_models(const std::vector<ScoredModel>& front, const IDProfile& profile,
                              const Dataset& d, EdCache* cache = nullptr, int threads = 1);

/// Two-sided Mann-Whitney test. Exact distribution when |a|+|b| <= 20 and
/// the pooled values carry no ties; normal approximation with tie and
/// continuity corrections otherwise. Returns (U of sample a, p).
std::pair<double, double> mann_whitney_u(const std::vector<double>& a,
                                         const std::vector<double>& b);

/// Exact two-sided p for integral U (no ties), by null-distribution count.
double mann_whitney_exact_p(std::size_t n, std::size_t m, double u_a);

/// Normal-approximation two-sided p with tie correction.
double mann_whitney_normal_p(const std::vector<double>& a, const std::vector<double>& b,
                             double u_a);

struct BandAggregate {
    int count = 0;
    std::optional<double> median_normalized_fitness;
    std::optional<double> median_stderr; // bootstrap, 1000 resamples
};

struct PairTest {
    std::optional<double> u;
    std::optional<double> p;
    bool significant = false; // p < 0.05
};

struct ModelRow {
    int model_id = 0; // index within the front
    int ed = 0;
    Band band = Band::Far;
    double train_fitness = 0.0;
    double test_fitness = 0.0;
    double normalized_test_fitness = 0.0;
    int size = 0;
    std::string infix;
};

struct BandReport {
    std::vector<ModelRow> rows;
    std::map<std::string, BandAggregate> bands;     // keyed by band name
    std::map<std::string, PairTest> pairwise_tests; // "ideal_vs_close" etc.
};

/// Per-model banding plus per-band performance statistics on the test set.
/// Normalized test fitness is min-max scaled across the front (all-equal
/// fronts normalize to 0).
BandReport band_report(const std::vector<ScoredModel>& front, const IDProfile& profile,
                       const Dataset& train, const Dataset& test,
                       std::uint64_t bootstrap_seed = 0, EdCache* cache = nullptr,
                       int threads = 1);

} // namespace dimgp
