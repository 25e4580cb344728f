#pragma once

// Reverse-mode tape whose node values are arrays over a batch of collocation
// points. Operations are elementwise, so each array slot is an independent
// scalar graph; this is the vectorised counterpart of ad::Tape used on the
// training hot path.

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pinnsolve::ad {

class BatchTape {
public:
    using Array = Eigen::ArrayXd;
    using Id = std::int32_t;

    struct Term {
        Array coef;
        Id var;
    };

    explicit BatchTape(Eigen::Index width) : width_(width) {}

    Eigen::Index width() const noexcept { return width_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Gradient-tracked input.
    Id leaf(Array value);
    Id constant(Array value);
    Id constant(double value);

    Id add(Id a, Id b);
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);
    Id div(Id a, Id b);
    Id neg(Id a);
    Id pow(Id a, int exponent);
    Id sin(Id a);
    Id cos(Id a);
    Id tan(Id a);
    Id tanh(Id a);
    Id exp(Id a);
    Id log(Id a);
    Id sqrt(Id a);
    Id abs(Id a);

    /// offset + sum_i coef_i * x_i with constant coefficient arrays.
    Id affine(Array offset, std::vector<Term> terms);

    const Array& value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    bool tracked(Id id) const { return nodes_[static_cast<std::size_t>(id)].tracked; }

    /// Seeds the given adjoints and sweeps backwards. The result holds one
    /// adjoint per node; untracked nodes get an empty array.
    std::vector<Array> backward(std::span<const std::pair<Id, Array>> seeds) const;

private:
    enum class Kind : std::uint8_t {
        Leaf, Constant, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs, Affine
    };
    struct Node {
        Kind kind = Kind::Constant;
        Id lhs = -1;
        Id rhs = -1;
        int exponent = 0;
        bool tracked = false;
        Array value;
        std::vector<Term> terms;
    };

    Id push(Node node);
    Id unary(Kind kind, Id a, Array value);
    Id binary(Kind kind, Id a, Id b, Array value);

    Eigen::Index width_;
    std::vector<Node> nodes_;
};

}  // namespace pinnsolve::ad
