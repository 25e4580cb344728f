#pragma once

// Scalar computation graphs with source-transformation differentiation.
//
// A Tape is an immutable, topologically ordered list of scalar nodes. Leaves
// are numbered 0..num_leaves()-1 in creation order and are tagged either as
// inputs (coordinates) or parameters (trainable weights). derive() returns a
// brand-new Tape computing the partial derivative of the root, over the same
// leaves, so derivatives nest to any order.

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace pinnsolve::ad {

enum class Op : std::uint8_t {
    Constant,
    Input,
    Parameter,
    Add,
    Sub,
    Mul,
    Div,
    Pow,  // integer exponent stored in Node::value
    Neg,
    Sin,
    Cos,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
};

enum class LeafKind : std::uint8_t { Input, Parameter };

struct Node {
    Op op = Op::Constant;
    std::int32_t lhs = -1;
    std::int32_t rhs = -1;
    double value = 0.0;      // constant value or integer exponent
    std::int32_t leaf = -1;  // leaf ordinal for Input / Parameter
};

class Tape {
public:
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t num_leaves() const noexcept { return leaf_nodes_.size(); }
    std::size_t root() const noexcept { return root_; }
    std::span<const Node> nodes() const noexcept { return nodes_; }

    LeafKind leaf_kind(std::size_t leaf) const { return leaf_kinds_.at(leaf); }
    std::size_t leaf_node(std::size_t leaf) const { return leaf_nodes_.at(leaf); }

    /// Leaf ordinals of the given kind, ascending.
    std::vector<std::size_t> leaves_of(LeafKind kind) const;

    /// True when the root is a constant node (derivatives of it are 0).
    bool is_constant() const noexcept { return nodes_[root_].op == Op::Constant; }

private:
    friend class TapeBuilder;
    std::vector<Node> nodes_;
    std::vector<std::size_t> leaf_nodes_;
    std::vector<LeafKind> leaf_kinds_;
    std::size_t root_ = 0;
};

class TapeBuilder;

/// Handle to a node under construction.
class Var {
public:
    Var() = default;
    Var(TapeBuilder* builder, std::int32_t id) : builder_(builder), id_(id) {}

    TapeBuilder* builder() const noexcept { return builder_; }
    std::int32_t id() const noexcept { return id_; }

private:
    TapeBuilder* builder_ = nullptr;
    std::int32_t id_ = -1;
};

/// Builds tapes with hash-consing and light constant folding (x*0, x+0, x*1,
/// constant subexpressions), which keeps nested derivative tapes compact.
class TapeBuilder {
public:
    Var input();
    Var parameter();
    Var constant(double value);

    /// Adds leaves matching `tape`'s leaf kinds and returns them in order.
    std::vector<Var> leaves_like(const Tape& tape);

    /// Splices `tape` into this builder, binding its leaves to `leaves`.
    Var splice(const Tape& tape, std::span<const Var> leaves);

    /// Freezes the graph rooted at `root`. Every leaf is kept; other nodes
    /// not reachable from the root are dropped.
    Tape build(Var root) const;

    Var unary(Op op, Var a);
    Var binary(Op op, Var a, Var b);
    Var pow(Var a, int exponent);

    const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.id())]; }
    bool is_constant(Var v, double value) const;
    bool is_constant(Var v) const { return node(v).op == Op::Constant; }

private:
    Var push(const Node& n);
    Var leaf(LeafKind kind);

    struct KeyHash {
        std::size_t operator()(const Node& n) const noexcept;
    };
    struct KeyEq {
        bool operator()(const Node& a, const Node& b) const noexcept;
    };

    std::vector<Node> nodes_;
    std::vector<std::size_t> leaf_nodes_;
    std::vector<LeafKind> leaf_kinds_;
    std::unordered_map<Node, std::int32_t, KeyHash, KeyEq> interned_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, double b);
Var operator/(double a, Var b);
Var sin(Var a);
Var cos(Var a);
Var tan(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var abs(Var a);
Var pow(Var a, int exponent);

/// Cached node values from one forward pass. Independent per evaluation, so a
/// Tape can be evaluated concurrently from many threads.
struct Evaluation {
    std::vector<double> values;
    std::size_t root = 0;

    double result() const { return values[root]; }
};

/// Evaluates every node. Throws DomainError (carrying the node index) for
/// division by zero, log of a non-positive value, or sqrt of a negative value.
Evaluation forward(const Tape& tape, std::span<const double> leaf_values);

/// Shorthand for forward(...).result().
double evaluate(const Tape& tape, std::span<const double> leaf_values);

/// Tape for d(root)/d(leaf `wrt`), over the same leaves.
Tape derive(const Tape& tape, std::size_t wrt);

/// Repeated derive() over a multiset of leaves, in the given order.
Tape derive(const Tape& tape, std::span<const std::size_t> wrt);

/// One reverse sweep over an evaluated tape; returns d(root)/d(leaf) for each
/// requested leaf, in request order.
std::vector<double> gradient(const Tape& tape, const Evaluation& eval,
                             std::span<const std::size_t> wrt);

}  // namespace pinnsolve::ad
