#include "dimgp/synth.hpp"
#include "dimgp/common.hpp"

#include <cmath>
#include <random>

namespace dimgp {

SynthKind synth_kind_from_name(const std::string& name) {
    if (name == "line") return SynthKind::Line;
    if (name == "plane") return SynthKind::Plane;
    if (name == "planted") return SynthKind::Planted;
    if (name == "embedded") return SynthKind::Embedded;
    throw ConfigError("unknown synthetic kind '" + name + "'");
}

const char* synth_kind_name(SynthKind k) {
    switch (k) {
    case SynthKind::Line: return "line";
    case SynthKind::Plane: return "plane";
    case SynthKind::Planted: return "planted";
    case SynthKind::Embedded: return "embedded";
    }
    return "?";
}

namespace {

double apply_formula(const std::string& formula, const Eigen::VectorXd& u) {
    const auto dim = u.size();
    auto need = [&](Eigen::Index k) {
        if (dim < k)
            throw ConfigError("formula '" + formula + "' needs at least " +
                              std::to_string(k) + " dimensions");
    };
    if (formula == "linear") return u.sum();
    if (formula == "product") {
        need(2);
        return u(0) * u(1);
    }
    if (formula == "product_sin") {
        need(3);
        return u(0) * u(1) + std::sin(u(2));
    }
    if (formula == "sum_squares") return u.squaredNorm();
    if (formula == "mixed") {
        need(5);
        return u(0) * u(1) + std::sin(u(2)) + u(3) * u(3) - u(4);
    }
    throw ConfigError("unknown formula '" + formula + "'");
}

std::vector<std::string> default_names(int p) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
    return names;
}

} // namespace

Dataset make_synthetic(const SynthConfig& cfg) {
    if (cfg.n < 2) throw ConfigError("synthetic dataset needs n >= 2");
    if (cfg.ambient_dim < 1) throw ConfigError("ambient_dim must be >= 1");
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> box(-cfg.box_half, cfg.box_half);

    const int p = cfg.ambient_dim;
    FeatureMatrix features(cfg.n, p);
    Eigen::VectorXd target(cfg.n);

    switch (cfg.kind) {
    case SynthKind::Line: {
        Eigen::VectorXd dir(p);
        for (int j = 0; j < p; ++j) dir(j) = gauss(rng);
        dir.normalize();
        for (int i = 0; i < cfg.n; ++i) {
            const double t = unit(rng);
            for (int j = 0; j < p; ++j)
                features(i, j) = t * dir(j) + cfg.jitter * gauss(rng);
            target(i) = t + cfg.noise * gauss(rng);
        }
        break;
    }
    case SynthKind::Plane: {
        if (p < 2) throw ConfigError("plane needs ambient_dim >= 2");
        Eigen::VectorXd d1(p), d2(p);
        for (int j = 0; j < p; ++j) d1(j) = gauss(rng);
        d1.normalize();
        for (int j = 0; j < p; ++j) d2(j) = gauss(rng);
        d2 -= d1 * d1.dot(d2); // orthogonalize
        d2.normalize();
        for (int i = 0; i < cfg.n; ++i) {
            const double t1 = unit(rng);
            const double t2 = unit(rng);
            for (int j = 0; j < p; ++j)
                features(i, j) = t1 * d1(j) + t2 * d2(j) + cfg.jitter * gauss(rng);
            target(i) = t1 + t2 + cfg.noise * gauss(rng);
        }
        break;
    }
    case SynthKind::Planted: {
        for (int i = 0; i < cfg.n; ++i) {
            Eigen::VectorXd x(p);
            for (int j = 0; j < p; ++j) x(j) = box(rng);
            features.row(i) = x;
            target(i) = apply_formula(cfg.formula, x) + cfg.noise * gauss(rng);
        }
        break;
    }
    case SynthKind::Embedded: {
        const int d = cfg.latent_dim;
        if (d < 1 || d > p) throw ConfigError("latent_dim must be in [1, ambient_dim]");
        // first d features are the latents; the rest are linear mixes so the
        // data spans a d-dimensional subspace of the ambient space
        Eigen::MatrixXd mix(p - d, d);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        for (int r = 0; r < p - d; ++r)
            for (int c = 0; c < d; ++c) mix(r, c) = coef(rng);
        for (int i = 0; i < cfg.n; ++i) {
            Eigen::VectorXd u(d);
            for (int j = 0; j < d; ++j) u(j) = box(rng);
            for (int j = 0; j < d; ++j) features(i, j) = u(j) + cfg.jitter * gauss(rng);
            const Eigen::VectorXd rest = mix * u;
            for (int j = d; j < p; ++j)
                features(i, j) = rest(j - d) + cfg.jitter * gauss(rng);
            target(i) = apply_formula(cfg.formula, u) + cfg.noise * gauss(rng);
        }
        break;
    }
    }

    return make_dataset(std::move(features), std::move(target), default_names(p),
                        std::string("synth_") + synth_kind_name(cfg.kind));
}

} // namespace dimgp
