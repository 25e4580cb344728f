#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinnsolve/coord_function.hpp"
#include "pinnsolve/rng.hpp"

namespace pinnsolve {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double length() const noexcept { return hi - lo; }
};

enum class DomainKind { OdeTime, EvolutionTx, SpatialXy };

/// Rectangular domain. Axis order: (t) for ODEs, (t, x) for evolution
/// problems and (x, y) for spatial problems; points are stored as columns.
class Domain {
public:
    static Domain ode(double t0, double tf);
    static Domain evolution(double t0, double tf, double xl, double xr);
    static Domain spatial(double xl, double xr, double yl, double yu);

    DomainKind kind() const noexcept { return kind_; }
    std::size_t dims() const noexcept { return axes_.size(); }
    const std::vector<Interval>& axes() const noexcept { return axes_; }
    const Interval& axis(std::size_t i) const { return axes_.at(i); }
    const std::vector<std::string>& axis_names() const noexcept { return names_; }
    bool has_time() const noexcept { return kind_ != DomainKind::SpatialXy; }

    bool contains(std::span<const double> point, double tol = 0.0) const;

private:
    Domain(DomainKind kind, std::vector<Interval> axes, std::vector<std::string> names);

    DomainKind kind_;
    std::vector<Interval> axes_;
    std::vector<std::string> names_;
};

enum class Edge { T0, TF, XL, XR, YL, YU };

struct EdgeInfo {
    std::size_t axis;  // coordinate held fixed on this edge
    bool upper;        // fixed at the upper end of the axis
    double normal;     // outward normal sign along `axis`
};

/// Edges that carry boundary data for the domain kind: (T0, TF) for ODEs,
/// (XL, XR) for evolution problems, (XL, XR, YL, YU) for spatial problems.
std::vector<Edge> boundary_edges(const Domain& domain);
EdgeInfo edge_info(const Domain& domain, Edge edge);
std::string edge_name(Edge edge);

enum class BoundaryKind { Periodic, Dirichlet, Neumann };
std::string to_string(BoundaryKind kind);

/// Boundary data. Conditions are expressions over the domain coordinates;
/// Dirichlet edges give u, Neumann edges the outward normal derivative.
struct BoundarySpec {
    BoundaryKind kind = BoundaryKind::Periodic;
    std::map<Edge, std::string> edges;
    std::optional<std::string> all_edges;
    int points = 100;  // per edge

    /// Condition source for an edge; throws Error(Config) when absent.
    const std::string& condition(Edge edge) const;
    /// Throws Error(Config) when the spec is inconsistent with the domain.
    void validate(const Domain& domain) const;
};

/// Initial data. conditions[v][k] is the k-th time derivative of dependent
/// variable v at t0, as an expression over the domain coordinates (constants
/// for ODEs).
struct InitialSpec {
    std::vector<std::vector<std::string>> conditions;
    int points = 100;

    std::size_t order(std::size_t variable) const { return conditions.at(variable).size(); }
};

enum class SensorFamily { ScalarTuple, TruncatedFourier };

struct SensorConfig {
    int sensors = 32;     // N_s; tuple width for scalar-tuple families
    int samples = 1000;   // number of sampled input functions
    double lo = -1.0;
    double hi = 1.0;
    SensorFamily family = SensorFamily::TruncatedFourier;
    std::uint64_t seed = 0;
    int modes = 4;        // highest Fourier mode
    int channels = 1;     // independent functions per sample (u0, u_t0, ...)

    void validate() const;
};

/// Truncated series on [xl, xr] used as the operator-input distribution.
/// Fourier: 1, cos(2 pi k s), sin(2 pi k s); Sine: 1, sin(pi k s);
/// Cosine: 1, cos(pi k s); with s = (x - xl) / (xr - xl), k = 1..modes.
/// The Sine family is sampled with a zero constant term, so samples vanish at
/// both ends; the constant is kept in the basis so fits of arbitrary data
/// (time-stepped states) stay unbiased.
class FunctionFamily {
public:
    enum class Basis { Fourier, Sine, Cosine };

    FunctionFamily(Basis basis, double xl, double xr, int modes);

    Basis basis() const noexcept { return basis_; }
    std::size_t dim() const noexcept;
    double basis_value(std::size_t j, double x) const;
    double value(const Eigen::VectorXd& coeffs, double x) const;
    /// Tape expression of the series at coordinate `x`.
    ad::Var build(const Eigen::VectorXd& coeffs, ad::Var x) const;
    /// Least-squares coefficients from samples at `locations`.
    Eigen::VectorXd fit(std::span<const double> locations, std::span<const double> values) const;
    /// Gaussian coefficients with standard deviation 1/k for mode k (1 for the constant).
    Eigen::VectorXd draw(Rng& rng) const;

private:
    Basis basis_;
    double xl_;
    double xr_;
    int modes_;
};

/// Sampled operator inputs: one column per sample, channel-major rows
/// (channel c occupies rows [c*N_s, (c+1)*N_s)).
struct SensorSet {
    std::vector<double> locations;
    Eigen::MatrixXd values;
    /// Series coefficients per sample and channel (empty for scalar tuples).
    std::vector<std::vector<Eigen::VectorXd>> coefficients;
    std::optional<FunctionFamily> family;
};

/// Latin hypercube sample, one column per point. Along every axis exactly one
/// point lands in each of the n equal strata floor(n*(v-lo)/(hi-lo)).
Eigen::MatrixXd latin_hypercube(std::size_t n, std::span<const Interval> bounds, std::uint64_t seed,
                                std::uint64_t stream = streams::kResidual);

/// Stratum of `v` among n equal strata of `iv` (upper end in the last one).
std::size_t stratum(double v, const Interval& iv, std::size_t n);

/// Interior collocation points.
Eigen::MatrixXd sample_residual_points(const Domain& domain, std::size_t n, std::uint64_t seed,
                                       std::uint64_t stream = streams::kResidual);

/// Points on t = t0 (the single point t0 for ODEs).
Eigen::MatrixXd sample_initial_points(const Domain& domain, const InitialSpec& spec, std::uint64_t seed,
                                      std::uint64_t stream = streams::kInitial);

struct BoundaryPoints {
    Eigen::MatrixXd points;     // dims x n
    std::vector<Edge> edges;    // edge of each column
    Eigen::ArrayXd targets;     // Dirichlet value or outward normal derivative
};

/// N_b points per edge (one per edge for ODEs), each labelled with its edge and
/// target. Periodic specs have no boundary points and are rejected.
BoundaryPoints sample_boundary_points(const Domain& domain, const BoundarySpec& spec, std::uint64_t seed,
                                      std::uint64_t stream = streams::kBoundary);

/// Equispaced sensor locations on [xl, xr]; periodic grids omit xr.
std::vector<double> sensor_locations(double xl, double xr, int n, bool periodic);

/// Operator-input samples. Scalar tuples are i.i.d. uniform on [lo, hi]; series
/// samples are drawn from `family` and rescaled by a random factor in (0, 1]
/// of the largest scale keeping their sensor values inside [lo, hi] (affinely
/// mapped onto [lo, hi] when the range excludes 0).
SensorSet sample_sensors(const SensorConfig& config, const std::optional<FunctionFamily>& family,
                         const std::vector<double>& locations);

/// Family matching the x-boundary structure of a problem.
FunctionFamily family_for(BoundaryKind kind, double xl, double xr, int modes);

}  // namespace pinnsolve
