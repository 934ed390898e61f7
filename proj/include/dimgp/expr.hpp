#pragma once

#include "dimgp/dataset.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace dimgp {

enum class OpCode { Add, Sub, Mul, Div, Sin, Cos, Exp, Log, Sqrt, Square };

constexpr int kDefaultMaxComplexity = 300;

int arity(OpCode op);
const char* op_name(OpCode op);
OpCode op_from_name(const std::string& name);
const std::vector<OpCode>& all_ops();

/// Either a feature reference x<index> or a literal constant.
struct Operand {
    enum class Kind { Feature, Constant };
    Kind kind = Kind::Constant;
    int feature = 0;
    double value = 0.0;

    static Operand make_feature(int idx) { return {Kind::Feature, idx, 0.0}; }
    static Operand make_constant(double v) { return {Kind::Constant, 0, v}; }
    bool operator==(const Operand&) const = default;
};

/// Two-stack genotype: operators applied front-to-back over a value stack
/// seeded from the operand stack.
struct StackModel {
    std::vector<OpCode> ops;
    std::vector<Operand> operands;

    bool operator==(const StackModel&) const = default;
};

int size_complexity(const StackModel& m);

/// Highest feature index referenced, or -1 if the model uses none.
int max_feature_index(const StackModel& m);

/// Throws if the operand stack is empty or the model exceeds max_complexity.
void validate_model(const StackModel& m, int max_complexity = kDefaultMaxComplexity);

/// Evaluation over a two-ended value stack seeded with the operands in
/// order: each operator pops its arity of values from the top (or is
/// skipped when too few remain) and its result re-enters at the bottom;
/// the final value is the top. Protected operators make this total: the
/// result is finite for every valid model and finite input.
double evaluate(const StackModel& m, std::span<const double> x);

/// Row-wise evaluation over a dataset.
Eigen::VectorXd evaluate_batch(const StackModel& m, const Dataset& d);

/// Operand count uniform in [1, max_init_size/2], operator count in
/// [0, max_init_size/2]; features drawn with probability 0.7, otherwise
/// constants uniform on [-10, 10].
StackModel random_model(std::mt19937_64& rng, int p, int max_init_size);

/// Human-readable infix rendering (mirrors evaluation, including skips).
std::string to_infix(const StackModel& m);

/// Canonical one-line token form, usable as a cache key.
std::string to_key(const StackModel& m);

} // namespace dimgp
