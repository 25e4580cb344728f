#include "pinnsolve/autodiff.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pinnsolve/errors.hpp"

namespace pinnsolve::ad {

namespace {

bool is_commutative(Op op) { return op == Op::Add || op == Op::Mul; }

double apply_unary(Op op, double a) {
    switch (op) {
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tanh: return std::tanh(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    case Op::Sqrt: return std::sqrt(a);
    case Op::Abs: return std::fabs(a);
    default: throw std::logic_error("not a unary op");
    }
}

double apply_binary(Op op, double a, double b) {
    switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    default: throw std::logic_error("not a binary op");
    }
}

double ipow(double base, int exponent) {
    if (exponent < 0) return 1.0 / ipow(base, -exponent);
    double result = 1.0;
    double b = base;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
        if (e & 1U) result *= b;
        b *= b;
        e >>= 1U;
    }
    return result;
}

}  // namespace

std::vector<std::size_t> Tape::leaves_of(LeafKind kind) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < leaf_kinds_.size(); ++i)
        if (leaf_kinds_[i] == kind) out.push_back(i);
    return out;
}

std::size_t TapeBuilder::KeyHash::operator()(const Node& n) const noexcept {
    std::size_t h = static_cast<std::size_t>(n.op);
    h = h * 1000003U ^ static_cast<std::size_t>(n.lhs + 1);
    h = h * 1000003U ^ static_cast<std::size_t>(n.rhs + 1);
    h = h * 1000003U ^ std::bit_cast<std::uint64_t>(n.value);
    return h;
}

bool TapeBuilder::KeyEq::operator()(const Node& a, const Node& b) const noexcept {
    return a.op == b.op && a.lhs == b.lhs && a.rhs == b.rhs &&
           std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
}

Var TapeBuilder::push(const Node& n) {
    if (n.op != Op::Input && n.op != Op::Parameter) {
        if (auto it = interned_.find(n); it != interned_.end()) return {this, it->second};
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(n);
    if (n.op != Op::Input && n.op != Op::Parameter) interned_.emplace(n, id);
    return {this, id};
}

Var TapeBuilder::leaf(LeafKind kind) {
    Node n;
    n.op = kind == LeafKind::Input ? Op::Input : Op::Parameter;
    n.leaf = static_cast<std::int32_t>(leaf_nodes_.size());
    Var v = push(n);
    leaf_nodes_.push_back(static_cast<std::size_t>(v.id()));
    leaf_kinds_.push_back(kind);
    return v;
}

Var TapeBuilder::input() { return leaf(LeafKind::Input); }
Var TapeBuilder::parameter() { return leaf(LeafKind::Parameter); }

Var TapeBuilder::constant(double value) {
    Node n;
    n.op = Op::Constant;
    n.value = value;
    return push(n);
}

bool TapeBuilder::is_constant(Var v, double value) const {
    const Node& n = node(v);
    return n.op == Op::Constant && n.value == value;
}

std::vector<Var> TapeBuilder::leaves_like(const Tape& tape) {
    std::vector<Var> out;
    out.reserve(tape.num_leaves());
    for (std::size_t i = 0; i < tape.num_leaves(); ++i) out.push_back(leaf(tape.leaf_kind(i)));
    return out;
}

Var TapeBuilder::unary(Op op, Var a) {
    const Node& na = node(a);
    if (na.op == Op::Constant) {
        const double v = apply_unary(op, na.value);
        if (std::isfinite(v)) return constant(v);
    }
    if (op == Op::Neg && na.op == Op::Neg) return {this, na.lhs};
    Node n;
    n.op = op;
    n.lhs = a.id();
    return push(n);
}

Var TapeBuilder::binary(Op op, Var a, Var b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.op == Op::Constant && nb.op == Op::Constant) {
        const double v = apply_binary(op, na.value, nb.value);
        if (std::isfinite(v)) return constant(v);
    }
    switch (op) {
    case Op::Add:
        if (is_constant(a, 0.0)) return b;
        if (is_constant(b, 0.0)) return a;
        break;
    case Op::Sub:
        if (is_constant(b, 0.0)) return a;
        if (is_constant(a, 0.0)) return unary(Op::Neg, b);
        if (a.id() == b.id()) return constant(0.0);
        break;
    case Op::Mul:
        if (is_constant(a, 0.0) || is_constant(b, 0.0)) return constant(0.0);
        if (is_constant(a, 1.0)) return b;
        if (is_constant(b, 1.0)) return a;
        if (is_constant(a, -1.0)) return unary(Op::Neg, b);
        if (is_constant(b, -1.0)) return unary(Op::Neg, a);
        break;
    case Op::Div:
        if (is_constant(b, 1.0)) return a;
        break;
    default: break;
    }
    Node n;
    n.op = op;
    n.lhs = a.id();
    n.rhs = b.id();
    if (is_commutative(op) && n.lhs > n.rhs) std::swap(n.lhs, n.rhs);
    return push(n);
}

Var TapeBuilder::pow(Var a, int exponent) {
    if (exponent == 0) return constant(1.0);
    if (exponent == 1) return a;
    const Node& na = node(a);
    if (na.op == Op::Constant) {
        const double v = ipow(na.value, exponent);
        if (std::isfinite(v)) return constant(v);
    }
    Node n;
    n.op = Op::Pow;
    n.lhs = a.id();
    n.value = exponent;
    return push(n);
}

Var TapeBuilder::splice(const Tape& tape, std::span<const Var> leaves) {
    if (leaves.size() != tape.num_leaves())
        throw std::invalid_argument("splice: leaf count mismatch");
    std::vector<Var> map(tape.size());
    const auto nodes = tape.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        switch (n.op) {
        case Op::Constant: map[i] = constant(n.value); break;
        case Op::Input:
        case Op::Parameter: map[i] = leaves[static_cast<std::size_t>(n.leaf)]; break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
            map[i] = binary(n.op, map[static_cast<std::size_t>(n.lhs)],
                            map[static_cast<std::size_t>(n.rhs)]);
            break;
        case Op::Pow:
            map[i] = pow(map[static_cast<std::size_t>(n.lhs)], static_cast<int>(n.value));
            break;
        default: map[i] = unary(n.op, map[static_cast<std::size_t>(n.lhs)]); break;
        }
    }
    return map[tape.root()];
}

Tape TapeBuilder::build(Var root) const {
    if (root.builder() != this) throw std::invalid_argument("build: foreign root");
    const std::size_t n = nodes_.size();
    std::vector<char> live(n, 0);
    live[static_cast<std::size_t>(root.id())] = 1;
    for (std::size_t i = n; i-- > 0;) {
        const Node& nd = nodes_[i];
        if (nd.op == Op::Input || nd.op == Op::Parameter) live[i] = 1;
        if (!live[i]) continue;
        if (nd.lhs >= 0) live[static_cast<std::size_t>(nd.lhs)] = 1;
        if (nd.rhs >= 0) live[static_cast<std::size_t>(nd.rhs)] = 1;
    }
    std::vector<std::int32_t> remap(n, -1);
    Tape tape;
    tape.leaf_nodes_.resize(leaf_nodes_.size());
    tape.leaf_kinds_ = leaf_kinds_;
    for (std::size_t i = 0; i < n; ++i) {
        if (!live[i]) continue;
        Node nd = nodes_[i];
        if (nd.lhs >= 0) nd.lhs = remap[static_cast<std::size_t>(nd.lhs)];
        if (nd.rhs >= 0) nd.rhs = remap[static_cast<std::size_t>(nd.rhs)];
        remap[i] = static_cast<std::int32_t>(tape.nodes_.size());
        if (nd.leaf >= 0) tape.leaf_nodes_[static_cast<std::size_t>(nd.leaf)] = tape.nodes_.size();
        tape.nodes_.push_back(nd);
    }
    tape.root_ = static_cast<std::size_t>(remap[static_cast<std::size_t>(root.id())]);
    return tape;
}

namespace {
TapeBuilder& owner(Var a, Var b) {
    if (a.builder() == nullptr || a.builder() != b.builder())
        throw std::invalid_argument("vars belong to different tapes");
    return *a.builder();
}
}  // namespace

Var operator+(Var a, Var b) { return owner(a, b).binary(Op::Add, a, b); }
Var operator-(Var a, Var b) { return owner(a, b).binary(Op::Sub, a, b); }
Var operator*(Var a, Var b) { return owner(a, b).binary(Op::Mul, a, b); }
Var operator/(Var a, Var b) { return owner(a, b).binary(Op::Div, a, b); }
Var operator-(Var a) { return a.builder()->unary(Op::Neg, a); }
Var operator+(Var a, double b) { return a + a.builder()->constant(b); }
Var operator+(double a, Var b) { return b.builder()->constant(a) + b; }
Var operator-(Var a, double b) { return a - a.builder()->constant(b); }
Var operator-(double a, Var b) { return b.builder()->constant(a) - b; }
Var operator*(Var a, double b) { return a * a.builder()->constant(b); }
Var operator*(double a, Var b) { return b.builder()->constant(a) * b; }
Var operator/(Var a, double b) { return a / a.builder()->constant(b); }
Var operator/(double a, Var b) { return b.builder()->constant(a) / b; }
Var sin(Var a) { return a.builder()->unary(Op::Sin, a); }
Var cos(Var a) { return a.builder()->unary(Op::Cos, a); }
Var tan(Var a) { return sin(a) / cos(a); }
Var tanh(Var a) { return a.builder()->unary(Op::Tanh, a); }
Var exp(Var a) { return a.builder()->unary(Op::Exp, a); }
Var log(Var a) { return a.builder()->unary(Op::Log, a); }
Var sqrt(Var a) { return a.builder()->unary(Op::Sqrt, a); }
Var abs(Var a) { return a.builder()->unary(Op::Abs, a); }
Var pow(Var a, int exponent) { return a.builder()->pow(a, exponent); }

Evaluation forward(const Tape& tape, std::span<const double> leaf_values) {
    if (leaf_values.size() != tape.num_leaves())
        throw Error(ErrorCategory::Argument,
                    "forward: expected " + std::to_string(tape.num_leaves()) + " leaf values, got " +
                        std::to_string(leaf_values.size()));
    Evaluation ev;
    ev.root = tape.root();
    ev.values.resize(tape.size());
    auto& v = ev.values;
    const auto nodes = tape.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        const double a = n.lhs >= 0 ? v[static_cast<std::size_t>(n.lhs)] : 0.0;
        const double b = n.rhs >= 0 ? v[static_cast<std::size_t>(n.rhs)] : 0.0;
        switch (n.op) {
        case Op::Constant: v[i] = n.value; break;
        case Op::Input:
        case Op::Parameter: v[i] = leaf_values[static_cast<std::size_t>(n.leaf)]; break;
        case Op::Add: v[i] = a + b; break;
        case Op::Sub: v[i] = a - b; break;
        case Op::Mul: v[i] = a * b; break;
        case Op::Div:
            if (b == 0.0) throw DomainError("division by zero", i);
            v[i] = a / b;
            break;
        case Op::Pow:
            if (a == 0.0 && n.value < 0) throw DomainError("negative power of zero", i);
            v[i] = ipow(a, static_cast<int>(n.value));
            break;
        case Op::Log:
            if (!(a > 0.0)) throw DomainError("log of non-positive value", i);
            v[i] = std::log(a);
            break;
        case Op::Sqrt:
            if (a < 0.0) throw DomainError("sqrt of negative value", i);
            v[i] = std::sqrt(a);
            break;
        default: v[i] = apply_unary(n.op, a); break;
        }
    }
    return ev;
}

double evaluate(const Tape& tape, std::span<const double> leaf_values) {
    return forward(tape, leaf_values).result();
}

Tape derive(const Tape& tape, std::size_t wrt) {
    if (wrt >= tape.num_leaves())
        throw Error(ErrorCategory::Argument, "derive: leaf " + std::to_string(wrt) + " out of range");
    TapeBuilder b;
    const std::vector<Var> leaves = b.leaves_like(tape);
    const auto nodes = tape.nodes();
    std::vector<Var> primal(nodes.size());
    std::vector<Var> dot(nodes.size());
    const Var zero = b.constant(0.0);
    const Var one = b.constant(1.0);
    auto P = [&](std::int32_t i) { return primal[static_cast<std::size_t>(i)]; };
    auto D = [&](std::int32_t i) { return dot[static_cast<std::size_t>(i)]; };

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        switch (n.op) {
        case Op::Constant:
            primal[i] = b.constant(n.value);
            dot[i] = zero;
            continue;
        case Op::Input:
        case Op::Parameter:
            primal[i] = leaves[static_cast<std::size_t>(n.leaf)];
            dot[i] = static_cast<std::size_t>(n.leaf) == wrt ? one : zero;
            continue;
        default: break;
        }
        const Var a = P(n.lhs);
        const Var da = D(n.lhs);
        if (n.rhs >= 0) {
            const Var c = P(n.rhs);
            const Var dc = D(n.rhs);
            primal[i] = b.binary(n.op, a, c);
            switch (n.op) {
            case Op::Add: dot[i] = da + dc; break;
            case Op::Sub: dot[i] = da - dc; break;
            case Op::Mul: dot[i] = da * c + a * dc; break;
            case Op::Div:
                if (b.is_constant(dc, 0.0))
                    dot[i] = da / c;
                else
                    dot[i] = (da - primal[i] * dc) / c;
                break;
            default: throw std::logic_error("derive: bad binary op");
            }
            continue;
        }
        if (n.op == Op::Pow) {
            const int e = static_cast<int>(n.value);
            primal[i] = b.pow(a, e);
            dot[i] = b.is_constant(da, 0.0) ? zero : static_cast<double>(e) * b.pow(a, e - 1) * da;
            continue;
        }
        primal[i] = b.unary(n.op, a);
        if (b.is_constant(da, 0.0)) {
            dot[i] = zero;
            continue;
        }
        const Var out = primal[i];
        switch (n.op) {
        case Op::Neg: dot[i] = -da; break;
        case Op::Sin: dot[i] = cos(a) * da; break;
        case Op::Cos: dot[i] = -(sin(a) * da); break;
        case Op::Tanh: dot[i] = (1.0 - out * out) * da; break;
        case Op::Exp: dot[i] = out * da; break;
        case Op::Log: dot[i] = da / a; break;
        case Op::Sqrt: dot[i] = da / (2.0 * out); break;
        case Op::Abs: dot[i] = (a / out) * da; break;
        default: throw std::logic_error("derive: bad unary op");
        }
    }
    return b.build(dot[tape.root()]);
}

Tape derive(const Tape& tape, std::span<const std::size_t> wrt) {
    Tape out = tape;
    for (std::size_t leaf : wrt) out = derive(out, leaf);
    return out;
}

std::vector<double> gradient(const Tape& tape, const Evaluation& eval,
                             std::span<const std::size_t> wrt) {
    const auto nodes = tape.nodes();
    if (eval.values.size() != nodes.size())
        throw Error(ErrorCategory::Argument, "gradient: evaluation does not match tape");
    std::vector<double> adj(nodes.size(), 0.0);
    adj[tape.root()] = 1.0;
    const auto& v = eval.values;
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const double g = adj[i];
        if (g == 0.0) continue;
        const Node& n = nodes[i];
        if (n.lhs < 0) continue;
        const auto l = static_cast<std::size_t>(n.lhs);
        const double a = v[l];
        switch (n.op) {
        case Op::Add:
            adj[l] += g;
            adj[static_cast<std::size_t>(n.rhs)] += g;
            break;
        case Op::Sub:
            adj[l] += g;
            adj[static_cast<std::size_t>(n.rhs)] -= g;
            break;
        case Op::Mul:
            adj[l] += g * v[static_cast<std::size_t>(n.rhs)];
            adj[static_cast<std::size_t>(n.rhs)] += g * a;
            break;
        case Op::Div: {
            const double c = v[static_cast<std::size_t>(n.rhs)];
            adj[l] += g / c;
            adj[static_cast<std::size_t>(n.rhs)] -= g * v[i] / c;
            break;
        }
        case Op::Pow: {
            const int e = static_cast<int>(n.value);
            adj[l] += g * e * ipow(a, e - 1);
            break;
        }
        case Op::Neg: adj[l] -= g; break;
        case Op::Sin: adj[l] += g * std::cos(a); break;
        case Op::Cos: adj[l] -= g * std::sin(a); break;
        case Op::Tanh: adj[l] += g * (1.0 - v[i] * v[i]); break;
        case Op::Exp: adj[l] += g * v[i]; break;
        case Op::Log: adj[l] += g / a; break;
        case Op::Sqrt: adj[l] += g / (2.0 * v[i]); break;
        case Op::Abs: adj[l] += g * (a / v[i]); break;
        default: break;
        }
    }
    std::vector<double> out;
    out.reserve(wrt.size());
    for (std::size_t leaf : wrt) out.push_back(adj[tape.leaf_node(leaf)]);
    return out;
}

}  // namespace pinnsolve::ad
