#include "dimgp/expr.hpp"
#include "dimgp/common.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace dimgp {

namespace {

// Magnitude cap on every stack value. Together with the protected
// operators below this makes evaluation total: products and squares of
// capped values stay finite, so no NaN/inf can propagate.
constexpr double kValueCap = 1e150;
constexpr double kDivGuard = 1e-12;
constexpr double kExpClamp = 50.0;

inline double guard(double v) {
    if (std::isnan(v)) return 0.0;
    if (v > kValueCap) return kValueCap;
    if (v < -kValueCap) return -kValueCap;
    return v;
}

inline double apply_unary(OpCode op, double a) {
    switch (op) {
    case OpCode::Sin: return std::sin(a);
    case OpCode::Cos: return std::cos(a);
    case OpCode::Exp: return std::exp(std::min(a, kExpClamp));
    case OpCode::Log: return std::abs(a) > kDivGuard ? std::log(std::abs(a)) : 0.0;
    case OpCode::Sqrt: return std::sqrt(std::abs(a));
    case OpCode::Square: return a * a;
    default: return a;
    }
}

inline double apply_binary(OpCode op, double a, double b) {
    switch (op) {
    case OpCode::Add: return a + b;
    case OpCode::Sub: return a - b;
    case OpCode::Mul: return a * b;
    case OpCode::Div: return std::abs(b) > kDivGuard ? a / b : 1.0;
    default: return a;
    }
}

} // namespace

int arity(OpCode op) {
    switch (op) {
    case OpCode::Add:
    case OpCode::Sub:
    case OpCode::Mul:
    case OpCode::Div: return 2;
    default: return 1;
    }
}

const char* op_name(OpCode op) {
    switch (op) {
    case OpCode::Add: return "add";
    case OpCode::Sub: return "sub";
    case OpCode::Mul: return "mul";
    case OpCode::Div: return "div";
    case OpCode::Sin: return "sin";
    case OpCode::Cos: return "cos";
    case OpCode::Exp: return "exp";
    case OpCode::Log: return "log";
    case OpCode::Sqrt: return "sqrt";
    case OpCode::Square: return "square";
    }
    return "?";
}

const std::vector<OpCode>& all_ops() {
    static const std::vector<OpCode> ops = {
        OpCode::Add, OpCode::Sub, OpCode::Mul,  OpCode::Div,  OpCode::Sin,
        OpCode::Cos, OpCode::Exp, OpCode::Log,  OpCode::Sqrt, OpCode::Square};
    return ops;
}

OpCode op_from_name(const std::string& name) {
    for (OpCode op : all_ops())
        if (name == op_name(op)) return op;
    throw DataError("unknown operator '" + name + "'");
}

int size_complexity(const StackModel& m) {
    return static_cast<int>(m.ops.size() + m.operands.size());
}

int max_feature_index(const StackModel& m) {
    int mx = -1;
    for (const auto& o : m.operands)
        if (o.kind == Operand::Kind::Feature && o.feature > mx) mx = o.feature;
    return mx;
}

void validate_model(const StackModel& m, int max_complexity) {
    if (m.operands.empty()) throw DataError("model has an empty operand stack");
    if (size_complexity(m) > max_complexity)
        throw DataError("model complexity " + std::to_string(size_complexity(m)) +
                        " exceeds limit " + std::to_string(max_complexity));
    for (const auto& o : m.operands) {
        if (o.kind == Operand::Kind::Feature && o.feature < 0)
            throw DataError("negative feature index in model");
        if (o.kind == Operand::Kind::Constant && !std::isfinite(o.value))
            throw DataError("non-finite constant in model");
    }
}

double evaluate(const StackModel& m, std::span<const double> x) {
    // Two-ended value stack over a ring buffer: operands seed it in order,
    // operators pop their arity from the top and the result returns at the
    // bottom. The live value count never exceeds the operand count.
    thread_local std::vector<double> ring;
    const std::size_t n = m.operands.size();
    ring.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Operand& o = m.operands[i];
        if (o.kind == Operand::Kind::Feature) {
            if (o.feature >= static_cast<int>(x.size()))
                throw DataError("model references feature x" + std::to_string(o.feature) +
                                " but input has " + std::to_string(x.size()) + " dimensions");
            ring[i] = guard(x[static_cast<std::size_t>(o.feature)]);
        } else {
            ring[i] = guard(o.value);
        }
    }
    std::size_t head = 0;
    std::size_t count = n;
    auto pop_top = [&] {
        const double v = ring[(head + count - 1) % n];
        --count;
        return v;
    };
    auto push_bottom = [&](double v) {
        head = (head + n - 1) % n;
        ring[head] = v;
        ++count;
    };
    for (OpCode op : m.ops) {
        if (arity(op) == 2) {
            if (count < 2) continue; // skip on underflow
            const double b = pop_top();
            const double a = pop_top();
            push_bottom(guard(apply_binary(op, a, b)));
        } else {
            if (count < 1) continue;
            push_bottom(guard(apply_unary(op, pop_top())));
        }
    }
    return ring[(head + count - 1) % n];
}

Eigen::VectorXd evaluate_batch(const StackModel& m, const Dataset& d) {
    if (max_feature_index(m) >= d.n_features())
        throw DataError("model references feature x" + std::to_string(max_feature_index(m)) +
                        " but dataset has " + std::to_string(d.n_features()) + " features");
    Eigen::VectorXd out(d.n_rows());
    for (Eigen::Index i = 0; i < d.n_rows(); ++i) {
        const double* row = d.features.data() + i * d.n_features();
        out(i) = evaluate(m, std::span<const double>(row, static_cast<std::size_t>(d.n_features())));
    }
    return out;
}

StackModel random_model(std::mt19937_64& rng, int p, int max_init_size) {
    if (p < 1) throw DataError("random_model requires at least one feature");
    if (max_init_size < 1) throw DataError("max_init_size must be >= 1");
    const int half = std::max(1, max_init_size / 2);
    std::uniform_int_distribution<int> n_operands(1, half);
    std::uniform_int_distribution<int> n_ops(0, max_init_size / 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> constant(-10.0, 10.0);
    std::uniform_int_distribution<int> feature(0, p - 1);
    std::uniform_int_distribution<std::size_t> op_pick(0, all_ops().size() - 1);

    StackModel m;
    const int no = n_operands(rng);
    const int nop = n_ops(rng);
    m.operands.reserve(static_cast<std::size_t>(no));
    m.ops.reserve(static_cast<std::size_t>(nop));
    for (int i = 0; i < no; ++i) {
        if (unit(rng) < 0.7) m.operands.push_back(Operand::make_feature(feature(rng)));
        else m.operands.push_back(Operand::make_constant(constant(rng)));
    }
    for (int i = 0; i < nop; ++i) m.ops.push_back(all_ops()[op_pick(rng)]);
    return m;
}

std::string to_infix(const StackModel& m) {
    // mirrors evaluate: pop from the back, results re-enter at the front
    std::deque<std::string> values;
    for (const auto& o : m.operands) {
        if (o.kind == Operand::Kind::Feature) values.push_back("x" + std::to_string(o.feature));
        else values.push_back(format_double(o.value));
    }
    for (OpCode op : m.ops) {
        if (arity(op) == 2) {
            if (values.size() < 2) continue;
            const std::string b = values.back();
            values.pop_back();
            const std::string a = values.back();
            values.pop_back();
            const char* sym = op == OpCode::Add   ? " + "
                              : op == OpCode::Sub ? " - "
                              : op == OpCode::Mul ? " * "
                                                  : " / ";
            values.push_front("(" + a + sym + b + ")");
        } else {
            if (values.empty()) continue;
            const std::string a = values.back();
            values.pop_back();
            values.push_front(std::string(op_name(op)) + "(" + a + ")");
        }
    }
    return values.back();
}

std::string to_key(const StackModel& m) {
    std::string key;
    for (OpCode op : m.ops) {
        key += op_name(op);
        key += ',';
    }
    key += '|';
    for (const auto& o : m.operands) {
        if (o.kind == Operand::Kind::Feature) key += "x" + std::to_string(o.feature);
        else key += format_double(o.value);
        key += ',';
    }
    return key;
}

} // namespace dimgp
