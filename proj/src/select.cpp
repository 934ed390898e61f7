#include "dimgp/select.hpp"
#include "dimgp/common.hpp"
#include "dimgp/hessian_ed.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

namespace dimgp {

const char* band_name(Band b) {
    switch (b) {
    case Band::Ideal: return "Ideal";
    case Band::Close: return "Close";
    case Band::Far: return "Far";
    }
    return "?";
}

Band classify_band(int ed, const IDProfile& profile) {
    const double e = static_cast<double>(ed);
    const double dist = std::max({profile.id_min - e, e - profile.id_max, 0.0});
    if (dist == 0.0) return Band::Ideal;
    if (dist <= 1.0) return Band::Close;
    return Band::Far;
}

namespace {

/// Fill in missing EDs for the front against the train data.
std::vector<ScoredModel> with_eds(const std::vector<ScoredModel>& front, const Dataset& d,
                                  EdCache* cache, int threads) {
    std::vector<ScoredModel> out = front;
    if (cache) {
        for (auto& sm : out)
            if (!sm.ed) sm.ed = cache->ed_for(sm.model, d);
    } else {
        parallel_for(out.size(), threads, [&](std::size_t i) {
            if (!out[i].ed) out[i].ed = effective_dimensionality(out[i].model, d).ed;
        });
    }
    return out;
}

} // namespace

SelectionResult select_models(const std::vector<ScoredModel>& front, const IDProfile& profile,
                              const Dataset& d, EdCache* cache, int threads) {
    if (front.empty()) throw DataError("select_models requires a non-empty front");
    const auto scored = with_eds(front, d, cache, threads);

    SelectionResult result;
    for (Band want : {Band::Ideal, Band::Close}) {
        for (const auto& sm : scored)
            if (classify_band(*sm.ed, profile) == want) result.models.push_back(sm);
        if (!result.models.empty()) {
            result.band_used = want;
            result.fallback = want != Band::Ideal;
            return result;
        }
    }
    result.fallback = true;
    result.empty = true;
    return result;
}

// --- Mann-Whitney ----------------------------------------------------------

namespace {

/// U statistic for sample a against b using midranks for ties.
double u_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<std::pair<double, int>> pooled; // value, source (0=a, 1=b)
    pooled.reserve(a.size() + b.size());
    for (double v : a) pooled.emplace_back(v, 0);
    for (double v : b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    double rank_sum_a = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks are 1-based
        for (std::size_t t = i; t < j; ++t)
            if (pooled[t].second == 0) rank_sum_a += midrank;
        i = j;
    }
    return rank_sum_a - static_cast<double>(a.size() * (a.size() + 1)) / 2.0;
}

bool has_ties(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    return std::adjacent_find(pooled.begin(), pooled.end()) != pooled.end();
}

double normal_sf_two_sided(double z) {
    return std::erfc(z / std::sqrt(2.0)); // 2 * (1 - Phi(z))
}

} // namespace

double mann_whitney_exact_p(std::size_t n, std::size_t m, double u_a) {
    // Null distribution of U by the classic count recurrence
    // N(n, m, u) = N(n-1, m, u-m) + N(n, m-1, u).
    const std::size_t u_cap = n * m;
    std::vector<std::vector<std::vector<double>>> tab(
        n + 1, std::vector<std::vector<double>>(m + 1, std::vector<double>(u_cap + 1, 0.0)));
    for (std::size_t j = 0; j <= m; ++j) tab[0][j][0] = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
        tab[i][0][0] = 1.0;
        for (std::size_t j = 1; j <= m; ++j) {
            for (std::size_t u = 0; u <= i * j; ++u) {
                double c = tab[i][j - 1][u];
                if (u >= j) c += tab[i - 1][j][u - j];
                tab[i][j][u] = c;
            }
        }
    }
    const auto& counts = tab[n][m];
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    const double u_min = std::min(u_a, static_cast<double>(u_cap) - u_a);
    double below = 0.0;
    for (std::size_t u = 0; u <= u_cap; ++u)
        if (static_cast<double>(u) <= u_min + 1e-9) below += counts[u];
    return std::min(1.0, 2.0 * below / total);
}

double mann_whitney_normal_p(const std::vector<double>& a, const std::vector<double>& b,
                             double u_a) {
    const double n = static_cast<double>(a.size());
    const double m = static_cast<double>(b.size());
    const double big_n = n + m;
    const double mean_u = n * m / 2.0;

    std::vector<double> pooled;
    pooled.reserve(a.size() + b.size());
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double var_u =
        n * m / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if (var_u <= 0.0) return 1.0;
    const double z = std::max(0.0, std::abs(u_a - mean_u) - 0.5) / std::sqrt(var_u);
    return normal_sf_two_sided(z);
}

std::pair<double, double> mann_whitney_u(const std::vector<double>& a,
                                         const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw DataError("Mann-Whitney requires non-empty samples");
    const double u_a = u_statistic(a, b);
    if (a.size() + b.size() <= 20 && !has_ties(a, b))
        return {u_a, mann_whitney_exact_p(a.size(), b.size(), u_a)};
    return {u_a, mann_whitney_normal_p(a, b, u_a)};
}

// --- band report ------------------------------------------------------------

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double bootstrap_median_stderr(const std::vector<double>& v, std::uint64_t seed) {
    constexpr int kResamples = 1000;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    std::vector<double> medians(kResamples);
    std::vector<double> sample(v.size());
    for (int r = 0; r < kResamples; ++r) {
        for (auto& s : sample) s = v[pick(rng)];
        medians[static_cast<std::size_t>(r)] = median_of(sample);
    }
    const double mean = std::accumulate(medians.begin(), medians.end(), 0.0) / kResamples;
    double var = 0.0;
    for (double m : medians) var += (m - mean) * (m - mean);
    return std::sqrt(var / (kResamples - 1));
}

} // namespace

BandReport band_report(const std::vector<ScoredModel>& front, const IDProfile& profile,
                       const Dataset& train, const Dataset& test,
                       std::uint64_t bootstrap_seed, EdCache* cache, int threads) {
    if (front.empty()) throw DataError("band_report requires a non-empty front");
    if (test.n_rows() < 2) throw DataError("band_report requires a test set");

    const auto scored = with_eds(front, train, cache, threads);

    std::vector<double> test_fit(scored.size());
    parallel_for(scored.size(), threads,
                 [&](std::size_t i) { test_fit[i] = fitness(scored[i].model, test); });

    const double lo = *std::min_element(test_fit.begin(), test_fit.end());
    const double hi = *std::max_element(test_fit.begin(), test_fit.end());
    const double span = hi - lo;

    BandReport report;
    std::map<std::string, std::vector<double>> grouped;
    for (Band b : {Band::Ideal, Band::Close, Band::Far}) grouped[band_name(b)] = {};

    for (std::size_t i = 0; i < scored.size(); ++i) {
        ModelRow row;
        row.model_id = static_cast<int>(i);
        row.ed = *scored[i].ed;
        row.band = classify_band(row.ed, profile);
        row.train_fitness = scored[i].train_fitness;
        row.test_fitness = test_fit[i];
        row.normalized_test_fitness = span > 0.0 ? (test_fit[i] - lo) / span : 0.0;
        row.size = scored[i].size;
        row.infix = to_infix(scored[i].model);
        grouped[band_name(row.band)].push_back(row.normalized_test_fitness);
        report.rows.push_back(std::move(row));
    }

    std::uint64_t band_stream = 0;
    for (const auto& [name, values] : grouped) {
        BandAggregate agg;
        agg.count = static_cast<int>(values.size());
        if (!values.empty()) {
            agg.median_normalized_fitness = median_of(values);
            agg.median_stderr =
                bootstrap_median_stderr(values, mix_seed(bootstrap_seed, band_stream));
        }
        report.bands[name] = agg;
        ++band_stream;
    }

    const std::array<std::pair<Band, Band>, 3> pairs = {
        {{Band::Ideal, Band::Close}, {Band::Ideal, Band::Far}, {Band::Close, Band::Far}}};
    for (const auto& [x, y] : pairs) {
        PairTest t;
        const auto& gx = grouped[band_name(x)];
        const auto& gy = grouped[band_name(y)];
        if (!gx.empty() && !gy.empty()) {
            auto [u, p] = mann_whitney_u(gx, gy);
            t.u = u;
            t.p = p;
            t.significant = p < 0.05;
        }
        std::string key = std::string(band_name(x)) + "_vs_" + band_name(y);
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        report.pairwise_tests[key] = t;
    }
    return report;
}

} // namespace dimgp
