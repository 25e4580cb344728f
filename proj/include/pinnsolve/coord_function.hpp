#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinnsolve/autodiff.hpp"
#include "pinnsolve/deriv_key.hpp"
#include "pinnsolve/expression.hpp"

namespace pinnsolve {

/// A known scalar function of the problem coordinates (an initial or boundary
/// condition, an ansatz factor, an analytic reference). It is held as an
/// ad::Tape whose inputs are the coordinates, so any partial derivative is
/// available through derive().
class CoordFunction {
public:
    /// The zero function of `dims` coordinates.
    explicit CoordFunction(std::size_t dims = 1);
    /// Wraps a tape whose leaves are exactly the coordinates (all inputs).
    explicit CoordFunction(ad::Tape tape);

    /// Parses an expression over the named axes (e.g. {"t","x"}).
    static CoordFunction parse(std::string_view source, const std::vector<std::string>& axes);
    static CoordFunction constant(double value, std::size_t dims);

    std::size_t dims() const noexcept { return dims_; }
    bool is_zero() const;

    double value(std::span<const double> point) const;
    double derivative(const DerivKey& key, std::span<const double> point) const;

    /// Values of the `key` derivative at each column of `points` (dims x n).
    Eigen::ArrayXd evaluate(const DerivKey& key, const Eigen::MatrixXd& points) const;

    const ad::Tape& tape(const DerivKey& key) const;

private:
    struct Cache {
        std::mutex mutex;
        std::map<DerivKey, std::shared_ptr<const ad::Tape>> tapes;
    };

    std::size_t dims_;
    std::shared_ptr<Cache> cache_;
};

/// Compiles an expression that references only coordinates into a tape
/// expression over `coords`. Throws Error(Parse) if the tree references
/// dependent variables or symbols.
ad::Var compile(const expr::Node& node, std::span<const ad::Var> coords);

}  // namespace pinnsolve
