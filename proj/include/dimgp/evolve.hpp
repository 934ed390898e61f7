#pragma once

#include "dimgp/dataset.hpp"
#include "dimgp/expr.hpp"
#include "dimgp/hessian_ed.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dimgp {

enum class SelectionScheme { Tournament, ParetoTournament };
enum class ComplexityMetric { Size, EffectiveDim };

/// Engine settings; defaults follow the StackGP configuration
/// (mutation/crossover/spawn 79/11/10, elitism 10, 2-point crossover,
/// tournament 30, population 400, 200 generations, max complexity 300).
struct GPConfig {
    double mutation_rate = 79.0;
    double crossover_rate = 11.0;
    double spawn_rate = 10.0;
    int elitism_count = 10;
    int tournament_size = 30;
    int population_size = 400;
    int generations = 200;
    int max_complexity = kDefaultMaxComplexity;
    int max_init_size = 80; // spawn/init diversity; the engine's main
                            // exploration knob besides the offspring mix
    SelectionScheme selection = SelectionScheme::Tournament;
    ComplexityMetric complexity_metric = ComplexityMetric::Size;
    std::uint64_t seed = 0;
    int threads = 1; // fitness evaluation only; draws stay on the coordinator

    void validate() const; // throws ConfigError
};

struct ScoredModel {
    StackModel model;
    double train_fitness = 1.0; // 1 - r^2, lower is better
    int size = 0;
    std::optional<int> ed;
};

struct Population {
    std::vector<ScoredModel> members;
    int generation = 0;
};

struct GenStats {
    int generation = 0;
    double best_fitness = 1.0;
    double median_fitness = 1.0;
};

struct EvolutionResult {
    Population population;
    std::vector<GenStats> history;
};

/// 1 - r^2 with r the Pearson correlation between model output and target;
/// 1 when either side has zero variance. Always in [0,1].
double fitness(const StackModel& m, const Dataset& d);

/// Single-token edit (replace/insert/delete on a uniformly chosen stack).
/// Retries up to 10 times if the edit breaks an invariant, then returns a
/// copy of the parent. feature_count bounds freshly drawn feature tokens.
StackModel mutate(const StackModel& m, std::mt19937_64& rng, const GPConfig& cfg,
                  int feature_count);

/// Two-point crossover applied independently to the operator and operand
/// stacks: a middle segment of b replaces a middle segment of a.
StackModel crossover(const StackModel& a, const StackModel& b, std::mt19937_64& rng,
                     const GPConfig& cfg);

/// Index of the tournament winner: minimal train_fitness, ties broken by
/// smaller size then earlier index.
std::size_t tournament_select(const Population& pop, std::mt19937_64& rng,
                              const GPConfig& cfg);

/// Index of a uniformly drawn member of the tournament pool's non-dominated
/// subset under (train_fitness, complexity) minimization.
std::size_t pareto_tournament_select(const Population& pop, std::mt19937_64& rng,
                                     const GPConfig& cfg,
                                     const std::function<double(const ScoredModel&)>& complexity_of);

/// Largest-remainder allocation of an offspring pool among the mutation,
/// crossover, and spawn types per the configured rates.
std::array<int, 3> offspring_quota(const GPConfig& cfg, int n_offspring);

/// Generational loop per the configuration. Deterministic under seed; the
/// optional cache is consulted when complexity_metric is EffectiveDim.
EvolutionResult evolve(const Dataset& d, const GPConfig& cfg, EdCache* ed_cache = nullptr);

/// Non-dominated members under (train_fitness, size), size-ascending, with
/// duplicate (fitness, size) pairs reduced to their first representative.
std::vector<ScoredModel> pareto_front(const Population& pop);

} // namespace dimgp
