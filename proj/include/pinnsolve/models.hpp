#pragma once

// Network surrogates.
//
// Every network exists in two forms over the same flat parameter vector:
//   * scalar ad::Tape builders (mlp_forward, deeponet_forward), used for
//     oracle checks and anywhere a single point is differentiated freely;
//   * batched "jet" evaluation (JetMlp), which propagates a fixed set of
//     coordinate derivatives through the layers for a whole batch at once
//     and back-propagates parameter gradients by hand. Training uses this.
//
// Parameter layout per layer: W (fan_out x fan_in, column-major) then b.
// DeepONets store the branch parameters first, then the trunk parameters.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pinnsolve/autodiff.hpp"
#include "pinnsolve/coord_function.hpp"
#include "pinnsolve/deriv_key.hpp"
#include "pinnsolve/geometry.hpp"

namespace pinnsolve {

struct MlpArchitecture {
    std::size_t inputs = 1;
    std::size_t layers = 1;  // hidden layers
    std::size_t units = 1;   // per hidden layer
    std::size_t outputs = 1;

    /// inputs, units (layers times), outputs.
    std::vector<std::size_t> widths() const;
    std::size_t param_count() const;
    void validate() const;
};

struct DeepOnetArchitecture {
    MlpArchitecture branch;
    MlpArchitecture trunk;
    std::size_t p = 1;        // dot-product width per output
    std::size_t outputs = 1;  // dependent variables; sub-net widths are p * outputs

    std::size_t param_count() const { return branch.param_count() + trunk.param_count(); }
    void validate() const;
};

enum class ModelKind { Pinn, DeepOnet };

struct NetworkParams {
    ModelKind kind = ModelKind::Pinn;
    MlpArchitecture mlp;
    DeepOnetArchitecture onet;
    Eigen::VectorXd values;

    std::size_t expected_size() const;
    std::size_t outputs() const { return kind == ModelKind::Pinn ? mlp.outputs : onet.outputs; }
};

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
Eigen::VectorXd glorot_init(const MlpArchitecture& arch, Rng& rng);
NetworkParams init_params(const MlpArchitecture& arch, std::uint64_t seed);
NetworkParams init_params(const DeepOnetArchitecture& arch, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Scalar tapes

/// Builds the network on `inputs`, reading weights from `params` (layout above).
std::vector<ad::Var> mlp_forward(const MlpArchitecture& arch, std::span<const ad::Var> params,
                                 std::span<const ad::Var> inputs);

/// Tape of one output; leaves are the inputs followed by the parameters.
ad::Tape mlp_tape(const MlpArchitecture& arch, std::size_t output = 0);

/// Plain evaluation of all outputs at one point.
std::vector<double> mlp_forward(const MlpArchitecture& arch, const Eigen::VectorXd& params,
                                std::span<const double> point);

/// Outputs sum_k B[l*p+k] * T[l*p+k] for l < outputs.
std::vector<ad::Var> deeponet_forward(const DeepOnetArchitecture& arch, std::span<const ad::Var> params,
                                      std::span<const ad::Var> sensors, std::span<const ad::Var> inputs);

/// Tape of one output; leaves are sensors, then inputs, then parameters.
ad::Tape deeponet_tape(const DeepOnetArchitecture& arch, std::size_t output = 0);

std::vector<double> deeponet_forward(const DeepOnetArchitecture& arch, const Eigen::VectorXd& params,
                                     std::span<const double> sensors, std::span<const double> point);

// ---------------------------------------------------------------------------
// Input features

/// (cos theta, sin theta) with theta = 2 pi x / (xr - xl). No phase shift is
/// applied, so x = xl and x = xr differ by exactly one period.
std::pair<double, double> periodic_embed(double x, double xl, double xr);
std::pair<ad::Var, ad::Var> periodic_embed(ad::Var x, double xl, double xr);

/// Maps raw coordinates to network inputs. Each feature depends on a single
/// coordinate: the coordinate itself, or one half of its periodic embedding.
class Featurizer {
public:
    struct Feature {
        enum class Kind { Identity, Cos, Sin };
        std::size_t axis = 0;
        Kind kind = Kind::Identity;
        double omega = 0.0;
    };

    Featurizer() = default;
    /// Identity on every axis except the flagged periodic ones.
    Featurizer(const Domain& domain, const std::vector<bool>& periodic);

    std::size_t dims() const noexcept { return dims_; }
    std::size_t width() const noexcept { return features_.size(); }
    const std::vector<Feature>& features() const noexcept { return features_; }

    std::vector<ad::Var> build(std::span<const ad::Var> coords) const;
    /// Jet of the features for `points` (dims x n): width x (keys * n).
    Eigen::MatrixXd jet(const KeySet& keys, const Eigen::MatrixXd& points) const;

private:
    std::size_t dims_ = 0;
    std::vector<Feature> features_;
};

// ---------------------------------------------------------------------------
// Batched jets

/// Forward/backward of an MLP on derivative jets. A jet is a matrix with one
/// row per channel and KeySet::size() column blocks of n points each; block k
/// holds the derivative of every channel along key k.
class JetMlp {
public:
    struct Cache {
        std::vector<Eigen::MatrixXd> inputs;              // per layer
        std::vector<Eigen::MatrixXd> pre;                 // per hidden layer
        std::vector<Eigen::MatrixXd> poly;                // per hidden layer: d^m tanh stacked, (orders*fan_out) x n
    };

    JetMlp(const MlpArchitecture& arch, const KeySet& keys);

    /// `params` points at this network's slice of the flat vector.
    Eigen::MatrixXd forward(const double* params, Eigen::MatrixXd input, Eigen::Index n, Cache* cache) const;
    /// Accumulates parameter gradients into `grad` (same slice layout).
    void backward(const double* params, const Cache& cache, Eigen::MatrixXd d_out, Eigen::Index n,
                  double* grad) const;

private:
    MlpArchitecture arch_;
    KeySet keys_;
    std::vector<std::vector<double>> tanh_poly_;  // coefficients of d^m tanh / dz^m in powers of tanh
};

// ---------------------------------------------------------------------------
// Hard constraints

/// u = g + h * N, with g and h known functions of the coordinates.
struct AnsatzFactors {
    CoordFunction g;
    CoordFunction h;
};

/// Splices g + h * raw onto `raw`'s builder.
ad::Var apply_ansatz(const AnsatzFactors& a, ad::Var raw, std::span<const ad::Var> coords);

/// Evolution problems of order 1 or 2 in t: u0 + [u1 (t - t0)] + N s^n with
/// s = (t - t0)/(tf - t0). `initial` holds u0 (and u1) over (t, x); they are
/// read at t = t0.
AnsatzFactors time_ansatz(const Domain& domain, const std::vector<CoordFunction>& initial);

/// ODE initial values: sum_k u_k (t - t0)^k / k! + N s^n, n = values.size().
AnsatzFactors ode_ivp_ansatz(const Domain& domain, std::span<const double> values);

/// ODE boundary values: (1 - s) ua + s ub + s (1 - s) N.
AnsatzFactors ode_bvp_ansatz(const Domain& domain, double ua, double ub);

/// A(x,y) + x*(1-x*) y*(1-y*) N with edge functions {xl, xr, yl, yu}, each
/// over (x, y). Throws Error(Config) when the edges disagree at a corner by
/// more than `tol`.
AnsatzFactors dirichlet_xy_ansatz(const Domain& domain, const std::array<CoordFunction, 4>& edges,
                                  double tol = 1e-9);

/// Scalar wrappers over a raw network output.
ad::Var apply_time_ansatz(ad::Var raw, std::span<const ad::Var> coords, const Domain& domain,
                          const std::vector<CoordFunction>& initial);
ad::Var apply_dirichlet_xy_ansatz(ad::Var raw, std::span<const ad::Var> coords, const Domain& domain,
                                  const std::array<CoordFunction, 4>& edges);
ad::Var apply_ode_ivp_ansatz(ad::Var raw, ad::Var t, const Domain& domain, std::span<const double> values);
ad::Var apply_ode_bvp_ansatz(ad::Var raw, ad::Var t, const Domain& domain, double ua, double ub);

/// Jets of u = g + h * N by the Leibniz rule. g, h, raw: outputs x (keys * n).
Eigen::MatrixXd ansatz_jet(const KeySet& keys, Eigen::Index n, const Eigen::MatrixXd& g,
                           const Eigen::MatrixXd& h, const Eigen::MatrixXd& raw);
/// Adjoint of ansatz_jet with respect to raw.
Eigen::MatrixXd ansatz_jet_adjoint(const KeySet& keys, Eigen::Index n, const Eigen::MatrixXd& h,
                                   const Eigen::MatrixXd& d_u);

// ---------------------------------------------------------------------------
// Availability of hard constraints

enum class ProblemKind { OdeIvp, OdeBvp, OdeSystemIvp, PdeTx, PdeXy };
enum class ConstraintMode { Soft, Hard };

std::string to_string(ProblemKind kind);
std::string to_string(ModelKind kind);
std::string to_string(ConstraintMode mode);

/// True when the combination is offered. `boundary` is ignored for ODEs.
bool admissible(ProblemKind problem, ModelKind model, BoundaryKind boundary, ConstraintMode mode);

/// Throws Error(Admissibility) naming the combination when not offered.
void require_admissible(ProblemKind problem, ModelKind model, BoundaryKind boundary, ConstraintMode mode);

}  // namespace pinnsolve
