#include "dimgp/hessian_ed.hpp"
#include "dimgp/common.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <random>

namespace dimgp {

namespace {

inline double eval_at(const StackModel& m, const Eigen::VectorXd& x) {
    return evaluate(m, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

} // namespace

Eigen::MatrixXd numerical_hessian(const StackModel& m, const Eigen::VectorXd& x,
                                  int* entry_failures) {
    const auto p = x.size();
    // eps^(1/6): second differences divide by h^2, so cancellation noise is
    // ~eps*|f|/h^2. This step keeps that noise below the rank tolerance floor
    // (zero Hessians of linear models must not pick up noise rank) while
    // truncation error stays ~h^2, far inside the rank thresholds.
    const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0);
    Eigen::VectorXd h(p);
    for (Eigen::Index i = 0; i < p; ++i) h(i) = h0 * std::max(1.0, std::abs(x(i)));

    int failures = 0;
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(p, p);
    const double f0 = eval_at(m, x);

    Eigen::VectorXd fp(p), fm(p);
    Eigen::VectorXd xt = x;
    for (Eigen::Index i = 0; i < p; ++i) {
        xt(i) = x(i) + h(i);
        fp(i) = eval_at(m, xt);
        xt(i) = x(i) - h(i);
        fm(i) = eval_at(m, xt);
        xt(i) = x(i);
    }

    for (Eigen::Index i = 0; i < p; ++i) {
        const double v = (fp(i) - 2.0 * f0 + fm(i)) / (h(i) * h(i));
        if (std::isfinite(v)) hess(i, i) = v;
        else ++failures;
    }

    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            xt(i) = x(i) + h(i);
            xt(j) = x(j) + h(j);
            const double fpp = eval_at(m, xt);
            xt(j) = x(j) - h(j);
            const double fpm = eval_at(m, xt);
            xt(i) = x(i) - h(i);
            const double fmm = eval_at(m, xt);
            xt(j) = x(j) + h(j);
            const double fmp = eval_at(m, xt);
            xt(i) = x(i);
            xt(j) = x(j);
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h(i) * h(j));
            if (std::isfinite(v)) {
                hess(i, j) = v;
                hess(j, i) = v;
            } else {
                failures += 2;
            }
        }
    }

    hess = 0.5 * (hess + hess.transpose()).eval();
    if (entry_failures) *entry_failures = failures;
    return hess;
}

std::pair<int, Eigen::VectorXd> rank_with_tolerance(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    Eigen::VectorXd sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double tol = std::max(1e-6 * smax, 1e-8);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    return {rank, std::move(sv)};
}

namespace {

HessianEstimate ed_at_points(const StackModel& m, const std::vector<Eigen::VectorXd>& points) {
    const auto p = points.front().size();
    HessianEstimate est;
    est.h_bar = Eigen::MatrixXd::Zero(p, p);
    for (const auto& pt : points) {
        int fails = 0;
        Eigen::MatrixXd h = numerical_hessian(m, pt, &fails);
        est.entry_failures += fails;
        est.per_point_ranks.push_back(rank_with_tolerance(h).first);
        est.h_bar += h;
    }
    est.h_bar /= static_cast<double>(points.size());
    est.points_used = static_cast<int>(points.size());
    auto [rank, sv] = rank_with_tolerance(est.h_bar);
    est.ed = rank;
    est.singular_values = std::move(sv);
    return est;
}

} // namespace

HessianEstimate effective_dimensionality(const StackModel& m, const Dataset& d) {
    if (max_feature_index(m) >= d.n_features())
        throw DataError("model references features beyond the dataset width");
    const StrategicPoints sp = strategic_points(d);
    return ed_at_points(m, {sp.p_min, sp.p_mean, sp.p_max});
}

HessianEstimate effective_dimensionality_random(const StackModel& m, const Dataset& d,
                                                int n_points, std::uint64_t seed) {
    if (n_points < 1) throw DataError("n_points must be >= 1");
    if (max_feature_index(m) >= d.n_features())
        throw DataError("model references features beyond the dataset width");
    const auto n = d.n_rows();
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> points;
    points.reserve(static_cast<std::size_t>(n_points));
    if (n_points > n) {
        std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
        for (int i = 0; i < n_points; ++i) points.emplace_back(d.features.row(pick(rng)));
    } else {
        // partial Fisher-Yates: first n_points entries are the sample
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (int i = 0; i < n_points; ++i) {
            std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i),
                                                            idx.size() - 1);
            std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
            points.emplace_back(d.features.row(idx[static_cast<std::size_t>(i)]));
        }
    }
    return ed_at_points(m, points);
}

int EdCache::ed_for(const StackModel& m, const Dataset& d) {
    const std::string key = to_key(m);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const int ed = effective_dimensionality(m, d).ed;
    cache_.emplace(key, ed);
    return ed;
}

} // namespace dimgp
