#include "dimgp/common.hpp"
#include "dimgp/hessian_ed.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dimgp;
using namespace testsupport;

namespace {

struct AnalyticCase {
    const char* name;
    StackModel model;
    int p;
    int rank; // analytic Hessian rank at generic points with positive coords
};

// Closed-form library with known generic Hessian rank. Evaluation points are
// drawn from [0.5, 1.45]^p, where none of these Hessians degenerate (sin and
// cos both stay positive, so averaging cannot cancel curvature).
std::vector<AnalyticCase> analytic_library() {
    using O = Operand;
    std::vector<AnalyticCase> lib;
    lib.push_back({"const", constant_model(4.2), 1, 0});
    lib.push_back({"x0+x1+x2", sum_of_features({0, 1, 2}), 3, 0});
    lib.push_back({"sin(x0)", unary_model(OpCode::Sin), 1, 1});
    lib.push_back({"x0^2", {{OpCode::Square}, {O::make_feature(0)}}, 1, 1});
    lib.push_back({"x0*x1", binary_model(OpCode::Mul), 2, 2});
    lib.push_back({"x0^2+x1^2", sum_of_squares(2), 2, 2});
    lib.push_back({"x0^2+x1^2+x2^2", sum_of_squares(3), 3, 3});
    lib.push_back({"exp(x0)", unary_model(OpCode::Exp), 1, 1});
    lib.push_back({"sin(x0)+cos(x1)",
                   {{OpCode::Cos, OpCode::Sin, OpCode::Add},
                    {O::make_feature(0), O::make_feature(1)}},
                   2, 2});
    lib.push_back({"x0*x1+x2^2",
                   {{OpCode::Square, OpCode::Mul, OpCode::Add},
                    {O::make_feature(0), O::make_feature(1), O::make_feature(2)}},
                   3, 3});
    lib.push_back({"sqrt(x0)", unary_model(OpCode::Sqrt), 1, 1});
    lib.push_back({"log(x0)", unary_model(OpCode::Log), 1, 1});
    lib.push_back({"(x0+x1)^2",
                   {{OpCode::Add, OpCode::Square}, {O::make_feature(0), O::make_feature(1)}},
                   2, 1});
    lib.push_back({"x0^2-x1^2",
                   {{OpCode::Square, OpCode::Square, OpCode::Sub},
                    {O::make_feature(0), O::make_feature(1)}},
                   2, 2});
    lib.push_back({"x0*x1*x2",
                   {{OpCode::Mul, OpCode::Mul},
                    {O::make_feature(0), O::make_feature(1), O::make_feature(2)}},
                   3, 3});
    return lib;
}

Dataset generic_dataset(std::mt19937_64& rng, int n, int p) {
    return random_dataset(rng, n, p, 0.5, 1.45);
}

} // namespace

TEST_SUITE("unit") {

TEST_CASE("analytic second derivatives") {
    const StackModel sq{{OpCode::Square}, {Operand::make_feature(0)}};
    Eigen::VectorXd x1(1);
    x1 << 1.0;
    const Eigen::MatrixXd h1 = numerical_hessian(sq, x1);
    CHECK(std::abs(h1(0, 0) - 2.0) < 1e-4);

    const StackModel lin = sum_of_features({0, 1, 2});
    Eigen::VectorXd x3(3);
    x3 << 0.7, -1.3, 2.9;
    const Eigen::MatrixXd h3 = numerical_hessian(lin, x3);
    CHECK(h3.cwiseAbs().maxCoeff() < 1e-6);

    const StackModel prod = binary_model(OpCode::Mul);
    Eigen::VectorXd x2(2);
    x2 << 3.0, 5.0;
    const Eigen::MatrixXd h2 = numerical_hessian(prod, x2);
    CHECK(std::abs(h2(0, 0)) < 1e-4);
    CHECK(std::abs(h2(0, 1) - 1.0) < 1e-4);
    CHECK(std::abs(h2(1, 0) - 1.0) < 1e-4);
    CHECK(std::abs(h2(1, 1)) < 1e-4);
    CHECK(h2 == h2.transpose().eval());
}

TEST_CASE("rank_with_tolerance thresholds") {
    CHECK(rank_with_tolerance(Eigen::MatrixXd::Zero(4, 4)).first == 0);

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
    d(0, 0) = 5.0;
    d(1, 1) = 3e-7 * 5.0; // below the relative threshold
    CHECK(rank_with_tolerance(d).first == 1);

    Eigen::MatrixXd offdiag(2, 2);
    offdiag << 0, 1, 1, 0;
    const auto [rank, sv] = rank_with_tolerance(offdiag);
    CHECK(rank == 2);
    CHECK(sv(0) == doctest::Approx(1.0));
    CHECK(sv(1) == doctest::Approx(1.0));
}

TEST_CASE("effective dimensionality on the headline cases") {
    std::mt19937_64 rng(15);
    const Dataset d1 = generic_dataset(rng, 20, 1);
    CHECK(effective_dimensionality(unary_model(OpCode::Sin), d1).ed == 1);
    CHECK(effective_dimensionality(constant_model(4.2), d1).ed == 0);

    const Dataset d3 = generic_dataset(rng, 20, 3);
    CHECK(effective_dimensionality(sum_of_features({0, 1, 2}), d3).ed == 0);
    CHECK(effective_dimensionality(sum_of_squares(3), d3).ed == 3);

    const Dataset d2 = generic_dataset(rng, 20, 2);
    const HessianEstimate est = effective_dimensionality(binary_model(OpCode::Mul), d2);
    CHECK(est.ed == 2);
    CHECK(est.points_used == 3);
    CHECK(est.entry_failures == 0);
    CHECK(est.per_point_ranks == std::vector<int>{2, 2, 2});
    CHECK(est.singular_values.size() == 2);
}

TEST_CASE("random-point ED with a 3-row dataset coincides with strategic ED") {
    const Dataset d = dataset_from({{0.8, 1.2}, {1.6, 0.9}, {2.2, 1.9}}, {1, 2, 3});
    const StackModel m = binary_model(OpCode::Mul);
    const HessianEstimate strategic = effective_dimensionality(m, d);
    const HessianEstimate random3 = effective_dimensionality_random(m, d, 3, 99);
    CHECK(strategic.ed == random3.ed);
    CHECK(strategic.h_bar.isApprox(random3.h_bar, 1e-12));
}

TEST_CASE("random-point ED of a constant-Hessian model is stable") {
    std::mt19937_64 rng(31);
    const Dataset d = generic_dataset(rng, 40, 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        CHECK(effective_dimensionality_random(binary_model(OpCode::Mul), d, 5, seed).ed == 2);
}

TEST_CASE("EdCache memoizes by genotype") {
    std::mt19937_64 rng(32);
    const Dataset d = generic_dataset(rng, 20, 2);
    EdCache cache;
    CHECK(cache.ed_for(binary_model(OpCode::Mul), d) == 2);
    CHECK(cache.ed_for(binary_model(OpCode::Mul), d) == 2);
    CHECK(cache.size() == 1);
}

} // TEST_SUITE

TEST_SUITE("properties") {

TEST_CASE("ED equals the analytic rank across the closed-form library") {
    std::mt19937_64 rng(111);
    const auto lib = analytic_library();
    int cases = 0;
    for (int rep = 0; rep < 70; ++rep) {
        for (const auto& c : lib) {
            const Dataset d = generic_dataset(rng, 4 + static_cast<int>(rng() % 12), c.p);
            const HessianEstimate est = effective_dimensionality(c.model, d);
            CAPTURE(c.name);
            REQUIRE(est.ed == c.rank);
            ++cases;
        }
    }
    CHECK(cases == 70 * 15);
}

TEST_CASE("averaged rank is stable in N for constant-rank models and reaches the max "
          "local rank for varying-rank models") {
    std::mt19937_64 rng(222);
    // constant analytic rank everywhere on the sampled region
    const auto lib = analytic_library();
    for (const auto& c : lib) {
        if (std::string(c.name) == "sin(x0)" || std::string(c.name) == "sin(x0)+cos(x1)")
            continue; // trig ranks are constant only locally; points are generic anyway
        const Dataset d = generic_dataset(rng, 30, c.p);
        for (int n_pts : {1, 2, 5, 20}) {
            const HessianEstimate est =
                effective_dimensionality_random(c.model, d, n_pts, 7);
            CAPTURE(c.name);
            CAPTURE(n_pts);
            REQUIRE(est.ed == c.rank);
        }
    }

    // (x0*x1)^2 has local Hessian rank 0 at the origin, 1 on the axes, and 2
    // at generic points, with sign-consistent curvature; its finite
    // differences are exact at the degenerate points
    const StackModel prodsq{{OpCode::Mul, OpCode::Square},
                            {Operand::make_feature(0), Operand::make_feature(1)}};
    FeatureMatrix f(6, 2);
    f << 0.0, 0.0, // rank 0 here
        1.0, 0.0,  // rank 1
        0.0, 1.0,  // rank 1
        1.0, 1.0,  // rank 2
        2.0, 1.0,  // rank 2
        1.5, 2.0;  // rank 2
    Eigen::VectorXd y(6);
    y << 0, 1, 2, 3, 4, 5;
    const Dataset mixed = make_dataset(std::move(f), std::move(y), {"a", "b"}, "prodsq");

    Eigen::VectorXd pt(2);
    pt << 0.0, 0.0;
    CHECK(rank_with_tolerance(numerical_hessian(prodsq, pt)).first == 0);
    pt << 1.0, 0.0;
    CHECK(rank_with_tolerance(numerical_hessian(prodsq, pt)).first == 1);
    // full-sample average reaches the maximum local rank
    CHECK(effective_dimensionality_random(prodsq, mixed, 6, 3).ed == 2);
}

TEST_CASE("ED is equivariant under feature permutation") {
    std::mt19937_64 rng(333);
    for (int it = 0; it < 1000; ++it) {
        const int p = 2 + static_cast<int>(rng() % 3);
        const Dataset d = generic_dataset(rng, 6 + static_cast<int>(rng() % 8), p);
        const StackModel m = random_model(rng, p, 14);

        std::vector<int> perm(static_cast<std::size_t>(p));
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = perm.size() - 1; i > 0; --i)
            std::swap(perm[i], perm[rng() % (i + 1)]);

        // permuted dataset columns and relabeled model features
        FeatureMatrix f(d.n_rows(), p);
        for (int j = 0; j < p; ++j)
            f.col(perm[static_cast<std::size_t>(j)]) = d.features.col(j);
        std::vector<std::string> names(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j)
            names[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] =
                d.feature_names[static_cast<std::size_t>(j)];
        const Dataset dp = make_dataset(std::move(f), d.target, std::move(names), d.name);
        StackModel mp = m;
        for (auto& o : mp.operands)
            if (o.kind == Operand::Kind::Feature)
                o.feature = perm[static_cast<std::size_t>(o.feature)];

        const HessianEstimate a = effective_dimensionality(m, d);
        const HessianEstimate b = effective_dimensionality(mp, dp);
        REQUIRE(a.ed == b.ed);
        // cross-difference association order swaps with the triangle roles,
        // so entries agree to rounding, not bit-for-bit
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) {
                const double x = a.h_bar(i, j);
                const double y = b.h_bar(perm[static_cast<std::size_t>(i)],
                                         perm[static_cast<std::size_t>(j)]);
                REQUIRE(std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(x)));
            }
    }
}

TEST_CASE("ED ignores features the model never reads") {
    std::mt19937_64 rng(444);
    for (int it = 0; it < 1000; ++it) {
        const int p = 1 + static_cast<int>(rng() % 3);
        const int extra = 1 + static_cast<int>(rng() % 2);
        const Dataset d = generic_dataset(rng, 6 + static_cast<int>(rng() % 6), p);
        const StackModel m = random_model(rng, p, 12);

        FeatureMatrix wide(d.n_rows(), p + extra);
        wide.leftCols(p) = d.features;
        std::uniform_real_distribution<double> u(0.5, 2.5);
        for (int j = p; j < p + extra; ++j)
            for (Eigen::Index i = 0; i < d.n_rows(); ++i) wide(i, j) = u(rng);
        auto names = d.feature_names;
        for (int j = 0; j < extra; ++j) names.push_back("pad" + std::to_string(j));
        const Dataset dw = make_dataset(std::move(wide), d.target, std::move(names), d.name);

        const HessianEstimate a = effective_dimensionality(m, d);
        const HessianEstimate b = effective_dimensionality(m, dw);
        REQUIRE(a.ed == b.ed);
        REQUIRE(b.h_bar.bottomRows(extra).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(b.h_bar.rightCols(extra).cwiseAbs().maxCoeff() == 0.0);
    }
}

} // TEST_SUITE
