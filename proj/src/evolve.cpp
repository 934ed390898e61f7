#include "dimgp/evolve.hpp"
#include "dimgp/common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace dimgp {

void GPConfig::validate() const {
    if (mutation_rate < 0 || crossover_rate < 0 || spawn_rate < 0)
        throw ConfigError("offspring rates must be non-negative");
    if (mutation_rate + crossover_rate + spawn_rate <= 0)
        throw ConfigError("offspring rates must not all be zero");
    if (population_size < 1) throw ConfigError("population_size must be >= 1");
    if (elitism_count < 0 || elitism_count >= population_size)
        throw ConfigError("elitism_count must be in [0, population_size)");
    if (tournament_size < 1 || tournament_size > population_size)
        throw ConfigError("tournament_size must be in [1, population_size]");
    if (generations < 0) throw ConfigError("generations must be >= 0");
    if (max_complexity < 1) throw ConfigError("max_complexity must be >= 1");
    if (max_init_size < 1 || max_init_size > max_complexity)
        throw ConfigError("max_init_size must be in [1, max_complexity]");
}

double fitness(const StackModel& m, const Dataset& d) {
    if (d.n_rows() < 2) throw DataError("fitness requires at least 2 rows");
    const Eigen::VectorXd yhat = evaluate_batch(m, d);
    const Eigen::VectorXd yc = d.target.array() - d.target.mean();
    const Eigen::VectorXd hc = yhat.array() - yhat.mean();
    const double sy = yc.squaredNorm();
    const double sh = hc.squaredNorm();
    if (sy <= 0.0 || sh <= 0.0) return 1.0;
    const double r = yc.dot(hc) / std::sqrt(sy * sh);
    return std::clamp(1.0 - r * r, 0.0, 1.0);
}

namespace {

Operand random_operand(std::mt19937_64& rng, int p) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < 0.7) {
        std::uniform_int_distribution<int> feature(0, p - 1);
        return Operand::make_feature(feature(rng));
    }
    std::uniform_real_distribution<double> constant(-10.0, 10.0);
    return Operand::make_constant(constant(rng));
}

OpCode random_op(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, all_ops().size() - 1);
    return all_ops()[pick(rng)];
}

bool model_ok(const StackModel& m, int max_complexity) {
    return !m.operands.empty() && size_complexity(m) <= max_complexity;
}

} // namespace

StackModel mutate(const StackModel& m, std::mt19937_64& rng, const GPConfig& cfg,
                  int feature_count) {
    const int p = std::max(1, feature_count);
    for (int attempt = 0; attempt < 10; ++attempt) {
        StackModel child = m;
        std::uniform_int_distribution<int> action_pick(0, 2);
        std::uniform_int_distribution<int> stack_pick(0, 1);
        const int action = action_pick(rng); // 0 replace, 1 insert, 2 delete
        const bool on_ops = stack_pick(rng) == 0;

        if (action == 0) {
            if (on_ops) {
                if (child.ops.empty()) continue;
                std::uniform_int_distribution<std::size_t> at(0, child.ops.size() - 1);
                child.ops[at(rng)] = random_op(rng);
            } else {
                std::uniform_int_distribution<std::size_t> at(0, child.operands.size() - 1);
                child.operands[at(rng)] = random_operand(rng, p);
            }
        } else if (action == 1) {
            if (on_ops) {
                std::uniform_int_distribution<std::size_t> at(0, child.ops.size());
                child.ops.insert(child.ops.begin() + static_cast<std::ptrdiff_t>(at(rng)),
                                 random_op(rng));
            } else {
                std::uniform_int_distribution<std::size_t> at(0, child.operands.size());
                child.operands.insert(child.operands.begin() + static_cast<std::ptrdiff_t>(at(rng)),
                                      random_operand(rng, p));
            }
        } else {
            if (on_ops) {
                if (child.ops.empty()) continue;
                std::uniform_int_distribution<std::size_t> at(0, child.ops.size() - 1);
                child.ops.erase(child.ops.begin() + static_cast<std::ptrdiff_t>(at(rng)));
            } else {
                if (child.operands.size() < 2) continue; // would empty the stack
                std::uniform_int_distribution<std::size_t> at(0, child.operands.size() - 1);
                child.operands.erase(child.operands.begin() + static_cast<std::ptrdiff_t>(at(rng)));
            }
        }
        if (model_ok(child, cfg.max_complexity)) return child;
    }
    return m;
}

namespace {

template <typename T>
std::vector<T> splice(const std::vector<T>& a, const std::vector<T>& b,
                      std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    std::vector<T> out;
    out.reserve(i + (l - k) + (a.size() - j));
    out.insert(out.end(), a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i));
    out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(k),
               b.begin() + static_cast<std::ptrdiff_t>(l));
    out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(j), a.end());
    return out;
}

std::pair<std::size_t, std::size_t> cut_points(std::mt19937_64& rng, std::size_t len) {
    std::uniform_int_distribution<std::size_t> at(0, len);
    std::size_t i = at(rng);
    std::size_t j = at(rng);
    if (i > j) std::swap(i, j);
    return {i, j};
}

} // namespace

StackModel crossover(const StackModel& a, const StackModel& b, std::mt19937_64& rng,
                     const GPConfig& cfg) {
    StackModel child;
    for (int attempt = 0; attempt < 10; ++attempt) {
        const auto [i1, j1] = cut_points(rng, a.ops.size());
        const auto [k1, l1] = cut_points(rng, b.ops.size());
        const auto [i2, j2] = cut_points(rng, a.operands.size());
        const auto [k2, l2] = cut_points(rng, b.operands.size());
        child.ops = splice(a.ops, b.ops, i1, j1, k1, l1);
        child.operands = splice(a.operands, b.operands, i2, j2, k2, l2);
        if (model_ok(child, cfg.max_complexity)) return child;
    }
    if (child.operands.empty()) return a;
    // over-length after all retries: drop stack tails until it fits
    while (size_complexity(child) > cfg.max_complexity) {
        if (!child.ops.empty()) child.ops.pop_back();
        else if (child.operands.size() > 1) child.operands.pop_back();
        else break;
    }
    return child;
}

namespace {

bool beats(const ScoredModel& challenger, std::size_t ci, const ScoredModel& champion,
           std::size_t bi) {
    if (challenger.train_fitness != champion.train_fitness)
        return challenger.train_fitness < champion.train_fitness;
    if (challenger.size != champion.size) return challenger.size < champion.size;
    return ci < bi;
}

std::vector<std::size_t> sample_pool(const Population& pop, std::mt19937_64& rng,
                                     const GPConfig& cfg) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.members.size() - 1);
    std::vector<std::size_t> pool(static_cast<std::size_t>(cfg.tournament_size));
    for (auto& idx : pool) idx = pick(rng);
    return pool;
}

} // namespace

std::size_t tournament_select(const Population& pop, std::mt19937_64& rng,
                              const GPConfig& cfg) {
    const auto pool = sample_pool(pop, rng, cfg);
    std::size_t best = pool[0];
    for (std::size_t t = 1; t < pool.size(); ++t) {
        if (beats(pop.members[pool[t]], pool[t], pop.members[best], best)) best = pool[t];
    }
    return best;
}

std::size_t pareto_tournament_select(
    const Population& pop, std::mt19937_64& rng, const GPConfig& cfg,
    const std::function<double(const ScoredModel&)>& complexity_of) {
    auto pool = sample_pool(pop, rng, cfg);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    std::vector<double> cx(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) cx[i] = complexity_of(pop.members[pool[i]]);

    std::vector<std::size_t> front;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double fi = pop.members[pool[i]].train_fitness;
        bool dominated = false;
        for (std::size_t j = 0; j < pool.size() && !dominated; ++j) {
            if (i == j) continue;
            const double fj = pop.members[pool[j]].train_fitness;
            dominated = fj <= fi && cx[j] <= cx[i] && (fj < fi || cx[j] < cx[i]);
        }
        if (!dominated) front.push_back(pool[i]);
    }
    if (front.size() == 1) return front[0];
    std::uniform_int_distribution<std::size_t> pick(0, front.size() - 1);
    return front[pick(rng)];
}

namespace {

void score_members(std::vector<ScoredModel>& members, const Dataset& d, int threads,
                   std::size_t begin) {
    parallel_for(members.size() - begin, threads, [&](std::size_t k) {
        auto& sm = members[begin + k];
        sm.train_fitness = fitness(sm.model, d);
        sm.size = size_complexity(sm.model);
    });
}

GenStats stats_of(const Population& pop) {
    std::vector<double> fits;
    fits.reserve(pop.members.size());
    for (const auto& m : pop.members) fits.push_back(m.train_fitness);
    std::sort(fits.begin(), fits.end());
    GenStats s;
    s.generation = pop.generation;
    s.best_fitness = fits.front();
    const std::size_t n = fits.size();
    s.median_fitness = n % 2 == 1 ? fits[n / 2] : 0.5 * (fits[n / 2 - 1] + fits[n / 2]);
    return s;
}

} // namespace

std::array<int, 3> offspring_quota(const GPConfig& cfg, int n_offspring) {
    const double total = cfg.mutation_rate + cfg.crossover_rate + cfg.spawn_rate;
    const std::array<double, 3> w = {cfg.mutation_rate / total, cfg.crossover_rate / total,
                                     cfg.spawn_rate / total};
    std::array<int, 3> counts{};
    std::array<double, 3> frac{};
    int assigned = 0;
    for (int t = 0; t < 3; ++t) {
        const double q = w[static_cast<std::size_t>(t)] * n_offspring;
        counts[static_cast<std::size_t>(t)] = static_cast<int>(std::floor(q));
        frac[static_cast<std::size_t>(t)] = q - std::floor(q);
        assigned += counts[static_cast<std::size_t>(t)];
    }
    while (assigned < n_offspring) {
        int best = 0;
        for (int t = 1; t < 3; ++t)
            if (frac[static_cast<std::size_t>(t)] > frac[static_cast<std::size_t>(best)]) best = t;
        ++counts[static_cast<std::size_t>(best)];
        frac[static_cast<std::size_t>(best)] = -1.0;
        ++assigned;
    }
    return counts;
}

EvolutionResult evolve(const Dataset& d, const GPConfig& cfg, EdCache* ed_cache) {
    cfg.validate();
    const int p = static_cast<int>(d.n_features());
    std::mt19937_64 rng(cfg.seed);

    EdCache local_cache;
    EdCache* cache = ed_cache ? ed_cache : &local_cache;
    std::function<double(const ScoredModel&)> complexity_of;
    if (cfg.complexity_metric == ComplexityMetric::EffectiveDim) {
        complexity_of = [&](const ScoredModel& sm) {
            return static_cast<double>(cache->ed_for(sm.model, d));
        };
    } else {
        complexity_of = [](const ScoredModel& sm) { return static_cast<double>(sm.size); };
    }

    auto select_parent = [&](const Population& pop) {
        return cfg.selection == SelectionScheme::Tournament
                   ? tournament_select(pop, rng, cfg)
                   : pareto_tournament_select(pop, rng, cfg, complexity_of);
    };

    EvolutionResult result;
    Population& pop = result.population;
    pop.members.resize(static_cast<std::size_t>(cfg.population_size));
    for (auto& sm : pop.members) sm.model = random_model(rng, p, cfg.max_init_size);
    score_members(pop.members, d, cfg.threads, 0);
    result.history.push_back(stats_of(pop));

    const int n_offspring = cfg.population_size - cfg.elitism_count;
    const auto quota = offspring_quota(cfg, n_offspring);

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<std::size_t> order(pop.members.size());
        std::iota(order.begin(), order.end(), 0);
        std::partial_sort(order.begin(), order.begin() + cfg.elitism_count, order.end(),
                          [&](std::size_t a, std::size_t b) {
                              return beats(pop.members[a], a, pop.members[b], b);
                          });

        std::vector<ScoredModel> next;
        next.reserve(pop.members.size());
        for (int e = 0; e < cfg.elitism_count; ++e)
            next.push_back(pop.members[order[static_cast<std::size_t>(e)]]);

        for (int k = 0; k < quota[0]; ++k) {
            const auto parent = select_parent(pop);
            next.push_back({mutate(pop.members[parent].model, rng, cfg, p), 1.0, 0, {}});
        }
        for (int k = 0; k < quota[1]; ++k) {
            const auto pa = select_parent(pop);
            const auto pb = select_parent(pop);
            next.push_back(
                {crossover(pop.members[pa].model, pop.members[pb].model, rng, cfg), 1.0, 0, {}});
        }
        for (int k = 0; k < quota[2]; ++k)
            next.push_back({random_model(rng, p, cfg.max_init_size), 1.0, 0, {}});

        pop.members = std::move(next);
        score_members(pop.members, d, cfg.threads, static_cast<std::size_t>(cfg.elitism_count));
        pop.generation = gen;
        result.history.push_back(stats_of(pop));
    }
    return result;
}

std::vector<ScoredModel> pareto_front(const Population& pop) {
    std::vector<std::size_t> order(pop.members.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ma = pop.members[a];
        const auto& mb = pop.members[b];
        if (ma.size != mb.size) return ma.size < mb.size;
        if (ma.train_fitness != mb.train_fitness) return ma.train_fitness < mb.train_fitness;
        return a < b;
    });
    std::vector<ScoredModel> front;
    double best_fitness = std::numeric_limits<double>::infinity();
    for (std::size_t idx : order) {
        const auto& m = pop.members[idx];
        if (m.train_fitness < best_fitness) {
            front.push_back(m);
            best_fitness = m.train_fitness;
        }
    }
    return front;
}

} // namespace dimgp
