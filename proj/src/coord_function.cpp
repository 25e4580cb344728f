#include "pinnsolve/coord_function.hpp"

#include <cmath>

#include "pinnsolve/errors.hpp"

namespace pinnsolve {

namespace {

struct TapeBackend {
    std::span<const ad::Var> coords;
    ad::TapeBuilder& b;

    ad::Var number(double v) { return b.constant(v); }
    ad::Var coordinate(int k) {
        if (k < 0 || static_cast<std::size_t>(k) >= coords.size())
            throw Error(ErrorCategory::Parse, "coordinate index out of range");
        return coords[static_cast<std::size_t>(k)];
    }
    ad::Var derivative(const expr::DerivRef&) {
        throw Error(ErrorCategory::Parse, "a coordinate function cannot reference dependent variables");
    }
    ad::Var symbol(int) { throw Error(ErrorCategory::Parse, "a coordinate function cannot reference symbols"); }
    ad::Var call(expr::Func f, ad::Var a) {
        switch (f) {
        case expr::Func::Sin: return ad::sin(a);
        case expr::Func::Cos: return ad::cos(a);
        case expr::Func::Tan: return ad::tan(a);
        case expr::Func::Tanh: return ad::tanh(a);
        case expr::Func::Exp: return ad::exp(a);
        case expr::Func::Log: return ad::log(a);
        case expr::Func::Sqrt: return ad::sqrt(a);
        case expr::Func::Abs: return ad::abs(a);
        }
        return a;
    }
    ad::Var negate(ad::Var a) { return -a; }
    ad::Var add(ad::Var a, ad::Var c) { return a + c; }
    ad::Var sub(ad::Var a, ad::Var c) { return a - c; }
    ad::Var mul(ad::Var a, ad::Var c) { return a * c; }
    ad::Var div(ad::Var a, ad::Var c) { return a / c; }
    ad::Var pow_int(ad::Var a, int e) { return ad::pow(a, e); }
    ad::Var exp(ad::Var a) { return ad::exp(a); }
    ad::Var log(ad::Var a) { return ad::log(a); }
};

ad::Tape zero_tape(std::size_t dims) {
    ad::TapeBuilder b;
    for (std::size_t i = 0; i < dims; ++i) b.input();
    return b.build(b.constant(0.0));
}

}  // namespace

ad::Var compile(const expr::Node& node, std::span<const ad::Var> coords) {
    if (coords.empty()) throw Error(ErrorCategory::Argument, "compile: no coordinates");
    TapeBackend be{coords, *coords[0].builder()};
    return expr::fold(node, be);
}

CoordFunction::CoordFunction(std::size_t dims) : CoordFunction(zero_tape(dims)) {}

CoordFunction::CoordFunction(ad::Tape tape) : dims_(tape.num_leaves()), cache_(std::make_shared<Cache>()) {
    for (std::size_t i = 0; i < dims_; ++i)
        if (tape.leaf_kind(i) != ad::LeafKind::Input)
            throw Error(ErrorCategory::Argument, "coordinate function leaves must all be inputs");
    cache_->tapes.emplace(DerivKey{}, std::make_shared<const ad::Tape>(std::move(tape)));
}

CoordFunction CoordFunction::parse(std::string_view source, const std::vector<std::string>& axes) {
    expr::VarConfig cfg;
    cfg.dependent.clear();
    cfg.independent = axes;
    const auto ast = expr::parse(expr::normalize_source(source), cfg);
    ad::TapeBuilder b;
    std::vector<ad::Var> coords;
    for (std::size_t i = 0; i < axes.size(); ++i) coords.push_back(b.input());
    return CoordFunction(b.build(compile(ast.root(), coords)));
}

CoordFunction CoordFunction::constant(double value, std::size_t dims) {
    ad::TapeBuilder b;
    for (std::size_t i = 0; i < dims; ++i) b.input();
    return CoordFunction(b.build(b.constant(value)));
}

bool CoordFunction::is_zero() const {
    const ad::Tape& t = tape({});
    const auto& n = t.nodes()[t.root()];
    return n.op == ad::Op::Constant && n.value == 0.0;
}

const ad::Tape& CoordFunction::tape(const DerivKey& key) const {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->tapes.find(key);
    if (it != cache_->tapes.end()) return *it->second;
    // Build from the longest cached prefix of the key.
    DerivKey prefix = key;
    std::shared_ptr<const ad::Tape> base;
    while (!prefix.empty()) {
        prefix.pop_back();
        if (auto p = cache_->tapes.find(prefix); p != cache_->tapes.end()) {
            base = p->second;
            break;
        }
    }
    for (std::size_t i = prefix.size(); i < key.size(); ++i) {
        if (key[i] < 0 || static_cast<std::size_t>(key[i]) >= dims_)
            throw Error(ErrorCategory::Argument, "derivative axis out of range");
        prefix.push_back(key[i]);
        base = std::make_shared<const ad::Tape>(ad::derive(*base, static_cast<std::size_t>(key[i])));
        cache_->tapes.emplace(prefix, base);
    }
    return *base;
}

double CoordFunction::value(std::span<const double> point) const { return ad::evaluate(tape({}), point); }

double CoordFunction::derivative(const DerivKey& key, std::span<const double> point) const {
    return ad::evaluate(tape(canonical(key)), point);
}

Eigen::ArrayXd CoordFunction::evaluate(const DerivKey& key, const Eigen::MatrixXd& points) const {
    if (static_cast<std::size_t>(points.rows()) != dims_)
        throw Error(ErrorCategory::Argument, "coordinate function: point width mismatch");
    const ad::Tape& t = tape(canonical(key));
    Eigen::ArrayXd out(points.cols());
    if (t.is_constant()) {
        out.setConstant(t.nodes()[t.root()].value);
        return out;
    }
    std::vector<double> leaf(dims_);
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        for (std::size_t d = 0; d < dims_; ++d) leaf[d] = points(static_cast<Eigen::Index>(d), j);
        out[j] = ad::evaluate(t, leaf);
    }
    return out;
}

}  // namespace pinnsolve
