#include "pinnsolve/batch_tape.hpp"

#include <stdexcept>

#include "pinnsolve/errors.hpp"

namespace pinnsolve::ad {

namespace {

Eigen::Index first_index(const Eigen::Array<bool, Eigen::Dynamic, 1>& mask) {
    for (Eigen::Index i = 0; i < mask.size(); ++i)
        if (mask[i]) return i;
    return 0;
}

}  // namespace

BatchTape::Id BatchTape::push(Node node) {
    if (node.value.size() != width_) throw std::invalid_argument("BatchTape: width mismatch");
    nodes_.push_back(std::move(node));
    return static_cast<Id>(nodes_.size() - 1);
}

BatchTape::Id BatchTape::leaf(Array value) {
    Node n;
    n.kind = Kind::Leaf;
    n.tracked = true;
    n.value = std::move(value);
    return push(std::move(n));
}

BatchTape::Id BatchTape::constant(Array value) {
    Node n;
    n.kind = Kind::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

BatchTape::Id BatchTape::constant(double value) { return constant(Array::Constant(width_, value)); }

BatchTape::Id BatchTape::unary(Kind kind, Id a, Array value) {
    Node n;
    n.kind = kind;
    n.lhs = a;
    n.tracked = tracked(a);
    n.value = std::move(value);
    return push(std::move(n));
}

BatchTape::Id BatchTape::binary(Kind kind, Id a, Id b, Array value) {
    Node n;
    n.kind = kind;
    n.lhs = a;
    n.rhs = b;
    n.tracked = tracked(a) || tracked(b);
    n.value = std::move(value);
    return push(std::move(n));
}

BatchTape::Id BatchTape::add(Id a, Id b) { return binary(Kind::Add, a, b, value(a) + value(b)); }
BatchTape::Id BatchTape::sub(Id a, Id b) { return binary(Kind::Sub, a, b, value(a) - value(b)); }
BatchTape::Id BatchTape::mul(Id a, Id b) { return binary(Kind::Mul, a, b, value(a) * value(b)); }

BatchTape::Id BatchTape::div(Id a, Id b) {
    const Array& d = value(b);
    const auto zero = (d == 0.0).eval();
    if (zero.any()) throw DomainError("division by zero", static_cast<std::size_t>(first_index(zero)));
    return binary(Kind::Div, a, b, value(a) / d);
}

BatchTape::Id BatchTape::neg(Id a) { return unary(Kind::Neg, a, -value(a)); }

BatchTape::Id BatchTape::pow(Id a, int exponent) {
    const Array& x = value(a);
    if (exponent < 0) {
        const auto zero = (x == 0.0).eval();
        if (zero.any())
            throw DomainError("negative power of zero", static_cast<std::size_t>(first_index(zero)));
    }
    Array out = Array::Ones(width_);
    if (exponent >= 0) {
        for (int i = 0; i < exponent; ++i) out *= x;
    } else {
        for (int i = 0; i < -exponent; ++i) out /= x;
    }
    Node n;
    n.kind = Kind::Pow;
    n.lhs = a;
    n.exponent = exponent;
    n.tracked = tracked(a);
    n.value = std::move(out);
    return push(std::move(n));
}

BatchTape::Id BatchTape::sin(Id a) { return unary(Kind::Sin, a, value(a).sin()); }
BatchTape::Id BatchTape::cos(Id a) { return unary(Kind::Cos, a, value(a).cos()); }

BatchTape::Id BatchTape::tan(Id a) {
    const auto c = value(a).cos().eval();
    const auto zero = (c == 0.0).eval();
    if (zero.any()) throw DomainError("tan pole", static_cast<std::size_t>(first_index(zero)));
    return unary(Kind::Tan, a, value(a).sin() / c);
}

BatchTape::Id BatchTape::tanh(Id a) {
    return unary(Kind::Tanh, a, 1.0 - 2.0 / ((2.0 * value(a)).exp() + 1.0));
}

BatchTape::Id BatchTape::exp(Id a) { return unary(Kind::Exp, a, value(a).exp()); }

BatchTape::Id BatchTape::log(Id a) {
    const auto bad = (value(a) <= 0.0).eval();
    if (bad.any()) throw DomainError("log of non-positive value", static_cast<std::size_t>(first_index(bad)));
    return unary(Kind::Log, a, value(a).log());
}

BatchTape::Id BatchTape::sqrt(Id a) {
    const auto bad = (value(a) < 0.0).eval();
    if (bad.any()) throw DomainError("sqrt of negative value", static_cast<std::size_t>(first_index(bad)));
    return unary(Kind::Sqrt, a, value(a).sqrt());
}

BatchTape::Id BatchTape::abs(Id a) { return unary(Kind::Abs, a, value(a).abs()); }

BatchTape::Id BatchTape::affine(Array offset, std::vector<Term> terms) {
    Node n;
    n.kind = Kind::Affine;
    n.value = std::move(offset);
    for (const Term& t : terms) {
        n.value += t.coef * value(t.var);
        n.tracked = n.tracked || tracked(t.var);
    }
    n.terms = std::move(terms);
    return push(std::move(n));
}

std::vector<BatchTape::Array> BatchTape::backward(std::span<const std::pair<Id, Array>> seeds) const {
    std::vector<Array> adj(nodes_.size());
    auto accumulate = [&](Id id, const auto& g) {
        auto& slot = adj[static_cast<std::size_t>(id)];
        if (!nodes_[static_cast<std::size_t>(id)].tracked) return;
        if (slot.size() == 0)
            slot = g;
        else
            slot += g;
    };
    for (const auto& [id, g] : seeds) accumulate(id, g);

    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const Node& n = nodes_[i];
        if (!n.tracked || adj[i].size() == 0) continue;
        const Array& g = adj[i];
        const Array& out = n.value;
        switch (n.kind) {
        case Kind::Leaf:
        case Kind::Constant: break;
        case Kind::Add:
            accumulate(n.lhs, g);
            accumulate(n.rhs, g);
            break;
        case Kind::Sub:
            accumulate(n.lhs, g);
            accumulate(n.rhs, (-g).eval());
            break;
        case Kind::Mul:
            accumulate(n.lhs, (g * value(n.rhs)).eval());
            accumulate(n.rhs, (g * value(n.lhs)).eval());
            break;
        case Kind::Div:
            accumulate(n.lhs, (g / value(n.rhs)).eval());
            accumulate(n.rhs, (-g * out / value(n.rhs)).eval());
            break;
        case Kind::Neg: accumulate(n.lhs, (-g).eval()); break;
        case Kind::Pow: {
            const Array& x = value(n.lhs);
            Array d = Array::Constant(width_, static_cast<double>(n.exponent));
            const int e = n.exponent - 1;
            if (e >= 0) {
                for (int k = 0; k < e; ++k) d *= x;
            } else {
                for (int k = 0; k < -e; ++k) d /= x;
            }
            accumulate(n.lhs, (g * d).eval());
            break;
        }
        case Kind::Sin: accumulate(n.lhs, (g * value(n.lhs).cos()).eval()); break;
        case Kind::Cos: accumulate(n.lhs, (-g * value(n.lhs).sin()).eval()); break;
        case Kind::Tan: accumulate(n.lhs, (g * (1.0 + out * out)).eval()); break;
        case Kind::Tanh: accumulate(n.lhs, (g * (1.0 - out * out)).eval()); break;
        case Kind::Exp: accumulate(n.lhs, (g * out).eval()); break;
        case Kind::Log: accumulate(n.lhs, (g / value(n.lhs)).eval()); break;
        case Kind::Sqrt: accumulate(n.lhs, (g / (2.0 * out)).eval()); break;
        case Kind::Abs: accumulate(n.lhs, (g * value(n.lhs).sign()).eval()); break;
        case Kind::Affine:
            for (const Term& t : n.terms) accumulate(t.var, (g * t.coef).eval());
            break;
        }
    }
    return adj;
}

}  // namespace pinnsolve::ad
