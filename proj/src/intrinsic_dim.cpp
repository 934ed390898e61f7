#include "dimgp/intrinsic_dim.hpp"
#include "dimgp/common.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <random>

namespace dimgp {

namespace {

/// Pairwise distances and per-point sorted neighbor distances, computed once
/// per dataset and shared read-only by all estimators.
struct NeighborContext {
    Eigen::MatrixXd dist;             // n x n, zero diagonal
    std::vector<double> sorted_pairs; // n(n-1)/2 ascending
    Eigen::MatrixXd knn;              // n x k_eff ascending neighbor distances
    int k_eff = 0;
};

NeighborContext build_context(const Dataset& d, const IdParams& params) {
    const auto n = d.n_rows();
    NeighborContext ctx;
    ctx.dist.resize(n, n);
    ctx.sorted_pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        ctx.dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dij = (d.features.row(i) - d.features.row(j)).norm();
            ctx.dist(i, j) = dij;
            ctx.dist(j, i) = dij;
            ctx.sorted_pairs.push_back(dij);
        }
    }
    std::sort(ctx.sorted_pairs.begin(), ctx.sorted_pairs.end());

    ctx.k_eff = std::min<int>(params.k, static_cast<int>(n) - 1);
    ctx.knn.resize(n, ctx.k_eff);
    std::vector<double> row(static_cast<std::size_t>(n - 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) row[m++] = ctx.dist(i, j);
        std::partial_sort(row.begin(), row.begin() + ctx.k_eff, row.end());
        for (int c = 0; c < ctx.k_eff; ++c) ctx.knn(i, c) = row[static_cast<std::size_t>(c)];
    }
    return ctx;
}

double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

/// Least-squares slope of y on x.
double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw EstimatorError("degenerate distances");
    return sxy / sxx;
}

// --- estimators -----------------------------------------------------------

// Correlation integral: slope of log C(r) vs log r, with C(r) the count of
// pairs within distance r, over radii spanning the 10th-50th percentiles.
double estimate_corrint(const Dataset&, const NeighborContext& ctx, const IdParams& params) {
    const auto& pairs = ctx.sorted_pairs;
    double r_lo = percentile(pairs, 0.10);
    const double r_hi = percentile(pairs, 0.50);
    if (r_lo <= 0.0) {
        auto it = std::upper_bound(pairs.begin(), pairs.end(), 0.0);
        if (it == pairs.end()) throw EstimatorError("degenerate distances");
        r_lo = *it;
    }
    if (!(r_hi > r_lo)) throw EstimatorError("degenerate distances");

    std::vector<double> log_r, log_c;
    const int scales = std::max(2, params.corrint_scales);
    for (int s = 0; s < scales; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(scales - 1);
        // endpoints stay exact percentile values; a pair can sit exactly on
        // them and must not flip in or out with rounding
        const double r = s == 0            ? r_lo
                         : s == scales - 1 ? r_hi
                                           : std::exp(std::log(r_lo) +
                                                      t * (std::log(r_hi) - std::log(r_lo)));
        const auto count =
            std::upper_bound(pairs.begin(), pairs.end(), r) - pairs.begin();
        if (count == 0) continue;
        log_r.push_back(std::log(r));
        log_c.push_back(std::log(static_cast<double>(count)));
    }
    if (log_r.size() < 2) throw EstimatorError("degenerate distances");
    const double slope = slope_fit(log_r, log_c);
    if (!(slope > 0.0)) throw EstimatorError("non-positive scaling slope");
    return slope;
}

// Graph-length scaling: total k-NN edge length L(s) over subsample sizes
// {n/4, n/2, 3n/4, n}; slope a of log L vs log s gives d = 1/(1-a).
double estimate_knn(const Dataset& d, const NeighborContext& ctx, const IdParams& params) {
    const auto n = d.n_rows();
    if (n < 16) throw EstimatorError("n below method minimum (16)");
    std::mt19937_64 rng(params.subsample_seed);

    std::vector<Eigen::Index> sizes = {n / 4, n / 2, 3 * n / 4, n};
    std::vector<double> log_s, log_l;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> neigh;

    // one k for every graph size: the length scaling L(s) ~ s^(1-1/d) holds
    // only for fixed k
    const int ks = std::min<int>(params.k, static_cast<int>(sizes.front()) - 1);
    if (ks < 1) throw EstimatorError("degenerate distances");

    for (Eigen::Index s : sizes) {
        const int reps = s == n ? 1 : std::max(1, params.knn_repeats);
        double total = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            // partial Fisher-Yates; first s entries form the subsample
            for (Eigen::Index i = 0; i < s; ++i) {
                std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                                idx.size() - 1);
                std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
            }
            double length = 0.0;
            for (Eigen::Index a = 0; a < s; ++a) {
                neigh.clear();
                for (Eigen::Index b = 0; b < s; ++b)
                    if (b != a)
                        neigh.push_back(ctx.dist(idx[static_cast<std::size_t>(a)],
                                                 idx[static_cast<std::size_t>(b)]));
                std::partial_sort(neigh.begin(), neigh.begin() + ks, neigh.end());
                for (int c = 0; c < ks; ++c) length += neigh[static_cast<std::size_t>(c)];
            }
            total += length;
        }
        const double mean_length = total / reps;
        if (!(mean_length > 0.0)) throw EstimatorError("degenerate distances");
        log_s.push_back(std::log(static_cast<double>(s)));
        log_l.push_back(std::log(mean_length));
    }
    const double a = slope_fit(log_s, log_l);
    const double p = static_cast<double>(d.n_features());
    const double est = a >= 1.0 ? p : 1.0 / (1.0 - a);
    return std::clamp(est, 1.0, p);
}

// Count of covariance eigenvalues above alpha * lambda_max.
double estimate_lpca(const Dataset& d, const NeighborContext&, const IdParams& params) {
    const Eigen::MatrixXd centered =
        d.features.rowwise() - d.features.colwise().mean();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(d.n_rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd lambda = eig.eigenvalues(); // ascending
    const double lmax = lambda(lambda.size() - 1);
    if (!(lmax > 0.0)) throw EstimatorError("degenerate distances");
    int count = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda(i) > params.lpca_alpha * lmax) ++count;
    return static_cast<double>(count);
}

double mean_of_local(const std::vector<double>& local) {
    if (local.size() < 10) throw EstimatorError("degenerate distances");
    return std::accumulate(local.begin(), local.end(), 0.0) /
           static_cast<double>(local.size());
}

// ln2 / ln(r_k / r_ceil(k/2)) per point, averaged.
double estimate_mada(const Dataset& d, const NeighborContext& ctx, const IdParams&) {
    const int k = ctx.k_eff;
    const int half = (k + 1) / 2;
    if (half >= k) throw EstimatorError("degenerate distances");
    std::vector<double> local;
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        const double rk = ctx.knn(i, k - 1);
        const double rh = ctx.knn(i, half - 1);
        if (!(rh > 0.0) || !(rk > rh)) continue;
        const double est = std::log(2.0) / std::log(rk / rh);
        if (std::isfinite(est) && est > 0.0) local.push_back(est);
    }
    return mean_of_local(local);
}

// Levina-Bickel: inverse mean log distance ratio per point, averaged.
double estimate_mle(const Dataset& d, const NeighborContext& ctx, const IdParams&) {
    const int k = ctx.k_eff;
    if (k < 2) throw EstimatorError("degenerate distances");
    std::vector<double> local;
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        const double rk = ctx.knn(i, k - 1);
        if (!(ctx.knn(i, 0) > 0.0)) continue;
        double sum = 0.0;
        for (int j = 0; j < k - 1; ++j) sum += std::log(rk / ctx.knn(i, j));
        if (!(sum > 0.0)) continue;
        const double est = static_cast<double>(k - 1) / sum;
        if (std::isfinite(est)) local.push_back(est);
    }
    return mean_of_local(local);
}

// Method of moments on neighbor distances: m1 / (w - m1) per point.
double estimate_mom(const Dataset& d, const NeighborContext& ctx, const IdParams&) {
    const int k = ctx.k_eff;
    std::vector<double> local;
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        if (!(ctx.knn(i, 0) > 0.0)) continue;
        const double w = ctx.knn(i, k - 1);
        const double m1 = ctx.knn.row(i).head(k).mean();
        if (!(w - m1 > 0.0)) continue;
        const double est = m1 / (w - m1);
        if (std::isfinite(est) && est > 0.0) local.push_back(est);
    }
    return mean_of_local(local);
}

// Ratio of second to first neighbor distances. ln mu is exponential with
// rate d, so after discarding the largest 10% of ratios the censored-sample
// MLE applies: the discarded tail enters as (N - M) copies of the retention
// boundary. Without that term the estimate inflates by a factor ~1.34.
double estimate_twonn(const Dataset& d, const NeighborContext& ctx, const IdParams&) {
    if (ctx.k_eff < 2) throw EstimatorError("degenerate distances");
    std::vector<double> mu;
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        const double r1 = ctx.knn(i, 0);
        const double r2 = ctx.knn(i, 1);
        if (!(r1 > 0.0)) continue;
        mu.push_back(r2 / r1);
    }
    if (mu.size() < 10) throw EstimatorError("degenerate distances");
    std::sort(mu.begin(), mu.end());
    const std::size_t keep = mu.size() - mu.size() / 10;
    double sum = 0.0;
    for (std::size_t i = 0; i < keep; ++i) sum += std::log(mu[i]);
    sum += static_cast<double>(mu.size() - keep) * std::log(mu[keep - 1]);
    if (!(sum > 0.0)) throw EstimatorError("degenerate distances");
    return static_cast<double>(keep) / sum;
}

using EstimatorFn = double (*)(const Dataset&, const NeighborContext&, const IdParams&);

const std::map<std::string, EstimatorFn>& registry() {
    static const std::map<std::string, EstimatorFn> reg = {
        {"CorrInt", estimate_corrint}, {"KNN", estimate_knn}, {"MADA", estimate_mada},
        {"MLE", estimate_mle},         {"MoM", estimate_mom}, {"TwoNN", estimate_twonn},
        {"lPCA", estimate_lpca},
    };
    return reg;
}

double run_estimator(const Dataset& d, const NeighborContext& ctx,
                     const std::string& method, const IdParams& params) {
    auto it = registry().find(method);
    if (it == registry().end()) throw ConfigError("unknown estimator '" + method + "'");
    // Shared degeneracy gate: points whose nearest neighbor coincides with
    // them carry no distance information.
    int usable = 0;
    for (Eigen::Index i = 0; i < ctx.knn.rows(); ++i)
        if (ctx.knn(i, 0) > 0.0) ++usable;
    if (usable < 10) throw EstimatorError("degenerate distances");
    return it->second(d, ctx, params);
}

} // namespace

const std::vector<std::string>& default_estimators() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [name, fn] : registry()) v.push_back(name);
        return v;
    }();
    return names;
}

double estimate_id(const Dataset& d, const std::string& method, const IdParams& params) {
    const NeighborContext ctx = build_context(d, params);
    return run_estimator(d, ctx, method, params);
}

IDProfile make_profile(std::map<std::string, double> estimates,
                       std::map<std::string, std::string> failures) {
    if (estimates.size() < 2)
        throw DataError("fewer than 2 estimators succeeded (" +
                        std::to_string(estimates.size()) + ")");
    IDProfile profile;
    profile.estimates = std::move(estimates);
    profile.failures = std::move(failures);

    double mean = 0.0;
    for (const auto& [name, v] : profile.estimates) mean += v;
    mean /= static_cast<double>(profile.estimates.size());
    double var = 0.0;
    for (const auto& [name, v] : profile.estimates) var += (v - mean) * (v - mean);
    var /= static_cast<double>(profile.estimates.size()); // population variance
    profile.id_mean = mean;
    profile.id_stdev = std::sqrt(var);
    profile.id_min = std::max(0.0, mean - profile.id_stdev);
    profile.id_max = mean + profile.id_stdev;
    return profile;
}

IDProfile id_profile(const Dataset& d, const std::vector<std::string>& methods,
                     const IdParams& params, int threads) {
    if (methods.size() < 2)
        throw DataError("id_profile requires at least 2 estimators, got " +
                        std::to_string(methods.size()));
    const NeighborContext ctx = build_context(d, params);

    std::vector<std::optional<double>> values(methods.size());
    std::vector<std::string> reasons(methods.size());
    parallel_for(methods.size(), threads, [&](std::size_t i) {
        try {
            values[i] = run_estimator(d, ctx, methods[i], params);
        } catch (const EstimatorError& e) {
            reasons[i] = e.what();
        }
    });

    std::map<std::string, double> estimates;
    std::map<std::string, std::string> failures;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (values[i]) estimates[methods[i]] = *values[i];
        else failures[methods[i]] = reasons[i];
    }
    return make_profile(std::move(estimates), std::move(failures));
}

} // namespace dimgp
