#pragma once

// Residual-expression language.
//
// Grammar (EBNF), whitespace-insensitive:
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = "-" unary | power ;
//   power   = primary [ ("^" | "**") unary ] ;        (right-associative)
//   primary = number | name | name "(" expr ")" | "(" expr ")" ;
//   number  = digits [ "." digits ] [ ("e"|"E") ["+"|"-"] digits ]
//           | "." digits [ exponent ] ;
//
// A name resolves, in order, to: a function (sin cos tan tanh exp log sqrt
// abs, only when followed by "("), an independent variable, an auxiliary
// pointwise symbol, a derivative reference (longest dependent-variable prefix
// followed only by independent-variable letters: "uxx", "utt", "uxy"), or a
// constant (pi, e). Mixed partials are canonicalised, so "uyx" == "uxy".
//
// Real exponents are evaluated as exp(b*log(a)); integer-valued constant
// exponents use repeated multiplication and are defined for any base.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pinnsolve/deriv_key.hpp"

namespace pinnsolve::expr {

struct VarConfig {
    std::vector<std::string> dependent{"u"};
    std::vector<std::string> independent{"t", "x"};
    /// Maximum derivative order per dependent variable; empty means
    /// `default_cap` for every variable.
    std::vector<int> order_caps;
    int default_cap = 4;
    /// Extra pointwise inputs that may appear in an expression (e.g. a forcing
    /// function "f" sampled by an operator network).
    std::vector<std::string> symbols;

    /// Throws Error(Config) when names collide, are empty, or are not
    /// lowercase alphabetic; independent names must be single letters.
    void validate() const;
    int cap(std::size_t variable) const;
    int independent_index(std::string_view name) const;
    int dependent_index(std::string_view name) const;
    int symbol_index(std::string_view name) const;
};

struct DerivRef {
    int variable = 0;
    DerivKey key;

    auto operator<=>(const DerivRef&) const = default;
};

enum class Func { Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs };

struct Node {
    enum class Kind { Number, Constant, Coordinate, Derivative, Symbol, Call, Negate, Binary };

    Kind kind = Kind::Number;
    double number = 0.0;  // Number and Constant
    std::string name;     // Constant, Coordinate, Symbol spelling
    int index = -1;       // Coordinate or Symbol index
    DerivRef deriv;       // Derivative
    Func func = Func::Sin;
    char op = '+';        // Binary: + - * / ^
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    std::size_t position = 0;
};

using NodePtr = std::shared_ptr<const Node>;

/// Immutable parsed expression with the configuration it was resolved against.
class ResidualAst {
public:
    ResidualAst() = default;
    ResidualAst(NodePtr root, VarConfig config, std::string source)
        : root_(std::move(root)), config_(std::move(config)), source_(std::move(source)) {}

    const Node& root() const { return *root_; }
    NodePtr root_ptr() const { return root_; }
    const VarConfig& config() const noexcept { return config_; }
    const std::string& source() const noexcept { return source_; }

private:
    NodePtr root_;
    VarConfig config_;
    std::string source_;
};

/// Strips framework prefixes used in Python-flavoured inputs ("tf.cos",
/// "np.pi", "math.exp", "torch.sin") so they parse in this grammar.
std::string normalize_source(std::string_view source);

/// Throws ParseError (syntax and lexical problems, with position) or
/// Error(Parse) for order-cap and undeclared-axis violations.
ResidualAst parse(std::string_view source, const VarConfig& config);

/// Distinct derivative references in the tree, including 0th-order ones.
std::set<DerivRef> derivative_requirements(const ResidualAst& ast);

/// Largest derivative order referenced (0 if none).
int max_order(const ResidualAst& ast);

/// Largest order along one axis for a dependent variable.
int max_axis_order(const ResidualAst& ast, int variable, int axis);

/// Fully parenthesised rendering; parse(to_string(a)) is structurally equal to a.
std::string to_string(const ResidualAst& ast);
std::string suffix(const DerivRef& ref, const VarConfig& config);

bool structurally_equal(const Node& a, const Node& b);

/// Value of a subtree that references no coordinates, derivatives or symbols.
std::optional<double> constant_value(const Node& node);

struct PointValues {
    std::map<std::string, double> coords;
    std::map<DerivRef, double> derivs;
    std::map<std::string, double> symbols;
};

/// Evaluates at one point. Throws Error(Argument) for a missing entry and
/// DomainError for division by zero and similar.
double eval_residual(const ResidualAst& ast, const PointValues& values);

/// Folds the tree with a user backend. The backend supplies
///   T number(double); T coordinate(int); T derivative(const DerivRef&);
///   T symbol(int); T call(Func, T); T negate(T);
///   T add(T,T); T sub(T,T); T mul(T,T); T div(T,T); T pow_int(T,int);
///   T exp(T); T log(T);
template <class Backend>
auto fold(const Node& n, Backend& be) -> decltype(be.number(0.0)) {
    using K = Node::Kind;
    switch (n.kind) {
    case K::Number:
    case K::Constant: return be.number(n.number);
    case K::Coordinate: return be.coordinate(n.index);
    case K::Derivative: return be.derivative(n.deriv);
    case K::Symbol: return be.symbol(n.index);
    case K::Call: return be.call(n.func, fold(*n.lhs, be));
    case K::Negate: return be.negate(fold(*n.lhs, be));
    case K::Binary: break;
    }
    if (n.op == '^') {
        const auto exponent = constant_value(*n.rhs);
        if (exponent && *exponent == static_cast<double>(static_cast<int>(*exponent)))
            return be.pow_int(fold(*n.lhs, be), static_cast<int>(*exponent));
        auto base = fold(*n.lhs, be);
        auto e = fold(*n.rhs, be);
        return be.exp(be.mul(e, be.log(base)));
    }
    auto a = fold(*n.lhs, be);
    auto b = fold(*n.rhs, be);
    switch (n.op) {
    case '+': return be.add(a, b);
    case '-': return be.sub(a, b);
    case '*': return be.mul(a, b);
    default: return be.div(a, b);
    }
}

}  // namespace pinnsolve::expr
