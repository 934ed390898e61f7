#pragma once

#include "dimgp/dataset.hpp"
#include "dimgp/expr.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using namespace dimgp;

inline Dataset random_dataset(std::mt19937_64& rng, int n, int p, double lo = -3.0,
                              double hi = 3.0) {
    std::uniform_real_distribution<double> box(lo, hi);
    FeatureMatrix f(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) f(i, j) = box(rng);
        y(i) = box(rng);
    }
    std::vector<std::string> names;
    for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    return make_dataset(std::move(f), std::move(y), std::move(names), "fuzz");
}

inline Dataset dataset_from(const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& target) {
    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(rows.front().size());
    FeatureMatrix f(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) f(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        y(i) = target[static_cast<std::size_t>(i)];
    }
    std::vector<std::string> names;
    for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    return make_dataset(std::move(f), std::move(y), std::move(names), "inline");
}

/// Random model whose feature indices all fall below p.
inline StackModel random_bounded_model(std::mt19937_64& rng, int p, int max_init = 20) {
    return random_model(rng, p, max_init);
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("dimgp_test_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Convenience model builders for closed-form test functions.
inline StackModel constant_model(double v) { return {{}, {Operand::make_constant(v)}}; }

inline StackModel feature_model(int i) { return {{}, {Operand::make_feature(i)}}; }

/// x_{i0} op x_{i1} ... left-folded sum of the given feature indices.
inline StackModel sum_of_features(const std::vector<int>& idx) {
    StackModel m;
    for (int i : idx) m.operands.push_back(Operand::make_feature(i));
    for (std::size_t k = 1; k < idx.size(); ++k) m.ops.push_back(OpCode::Add);
    return m;
}

/// sum of squares of the first k features: k squares rotate each operand
/// through the top, then k-1 adds fold the squared values together
inline StackModel sum_of_squares(int k) {
    StackModel m;
    for (int i = 0; i < k; ++i) m.operands.push_back(Operand::make_feature(i));
    for (int i = 0; i < k; ++i) m.ops.push_back(OpCode::Square);
    for (int i = 1; i < k; ++i) m.ops.push_back(OpCode::Add);
    return m;
}

inline StackModel unary_model(OpCode op, int feature = 0) {
    return {{op}, {Operand::make_feature(feature)}};
}

inline StackModel binary_model(OpCode op, int f0 = 0, int f1 = 1) {
    return {{op}, {Operand::make_feature(f0), Operand::make_feature(f1)}};
}

} // namespace testsupport
