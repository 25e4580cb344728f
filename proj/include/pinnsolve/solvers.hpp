#pragma once

// Problem assembly: one solve() entry point for every (problem, model) pair,
// plus evaluation, error fields and DeepONet time-stepping.

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pinnsolve/errors.hpp"
#include "pinnsolve/geometry.hpp"
#include "pinnsolve/models.hpp"
#include "pinnsolve/training.hpp"

namespace pinnsolve {

struct NetworkShape {
    std::size_t layers = 4;
    std::size_t units = 60;
    // DeepONet only; 0 means "same as layers/units" and p = units.
    std::size_t branch_layers = 0;
    std::size_t branch_units = 0;
    std::size_t p = 0;
};

struct ProblemSpec {
    ProblemKind problem = ProblemKind::PdeTx;
    ModelKind model = ModelKind::Pinn;
    std::vector<std::string> equations;
    /// Dependent variable names, one per equation. Empty: u (and v, w, ... for systems).
    std::vector<std::string> variables;
    Domain domain = Domain::evolution(0, 1, -1, 1);
    std::optional<InitialSpec> initial;
    std::optional<BoundarySpec> boundary;
    std::optional<SensorConfig> sensors;
    /// (x,y) DeepONets learn the map from a forcing f(x), referenced as the
    /// symbol "f" in the equation; this is the configured one, over x.
    std::string forcing = "0";
    ConstraintMode constraint = ConstraintMode::Soft;
    std::size_t residual_points = 10000;  // N_residual (total)
    /// DeepONet: residual points drawn per function sample; 0 derives it from the total.
    std::size_t points_per_function = 0;
    NetworkShape network;
    TrainConfig training;

    std::vector<std::string> variable_names() const;
    expr::VarConfig var_config() const;
    /// Dependent-variable orders in t: from the initial conditions for
    /// initial-value problems, otherwise 0 (BVP, xy).
    std::vector<int> orders() const;
    /// Throws Error for the first problem found; problems() lists all of them.
    void validate() const;
    /// Every structural problem found, without parsing expressions.
    std::vector<Issue> problems() const;
};

/// Evaluated solution on a set of points, optionally with a reference.
struct SolutionField {
    std::vector<std::string> axes;
    std::vector<std::string> variables;
    Eigen::MatrixXd points;                 // dims x n
    Eigen::MatrixXd values;                 // variables x n
    std::optional<Eigen::MatrixXd> analytic;
    std::vector<int> window;                // time-stepping window of each point (optional)
    std::vector<std::string> warnings;

    Eigen::Index size() const { return points.cols(); }
    /// Mean of squared differences over every point and variable (0 without a reference).
    double mse() const;
    double max_abs_error() const;
    /// Header: axes, variables, then <var>_exact and <var>_sqerr per variable
    /// when a reference is present, then window when present.
    void write_csv(std::ostream& out) const;
};

/// Tensor grid including the interval ends; the first axis varies slowest.
Eigen::MatrixXd grid(const Domain& domain, const std::vector<int>& resolution);

struct SolutionHandle {
    ProblemSpec spec;
    Model model;                        // training-time model (all sensor samples)
    Eigen::VectorXd params;
    TrainReport report;
    std::vector<expr::ResidualAst> residuals;
    std::vector<double> sensor_locations;
    std::optional<FunctionFamily> family;
    std::size_t tuple_width = 0;        // ODE DeepONet branch tuple width
};

SolutionHandle solve(const ProblemSpec& spec);

/// Builds the model and point sets without training (epochs are ignored).
SolutionHandle prepare(const ProblemSpec& spec);

/// Surrogate values (outputs x n) at `points`. DeepONet handles need the
/// branch input for one function sample.
Eigen::MatrixXd evaluate(const SolutionHandle& handle, const Eigen::MatrixXd& points,
                         const std::optional<Eigen::VectorXd>& sensor_values = std::nullopt);

/// Derivative jets (outputs x keys*n) at `points`.
Eigen::MatrixXd evaluate_jets(const SolutionHandle& handle, const KeySet& keys, const Eigen::MatrixXd& points,
                              const std::optional<Eigen::VectorXd>& sensor_values = std::nullopt);

/// Branch input of the configured problem data (initial tuple or the initial
/// condition sampled at the sensors). Only meaningful for DeepONet handles.
Eigen::VectorXd default_sensor_values(const SolutionHandle& handle);

/// Prediction on `points` with per-variable analytic expressions over the axes.
SolutionField evaluate_error(const SolutionHandle& handle, const std::vector<std::string>& analytic,
                             const Eigen::MatrixXd& points,
                             const std::optional<Eigen::VectorXd>& sensor_values = std::nullopt);

/// Layout of a time-stepping state: one block per (variable, t-order) row,
/// each holding the values at `probes` (x positions; a single block entry for ODEs).
struct StateLayout {
    std::vector<std::pair<int, int>> rows;
    std::vector<double> probes;

    Eigen::Index size() const {
        return static_cast<Eigen::Index>(rows.size() * std::max<std::size_t>(probes.size(), 1));
    }
};

/// A learned (or substituted) solution operator over one window: given a
/// state and local points, returns jets (outputs x keys*n).
using WindowOperator =
    std::function<Eigen::MatrixXd(const Eigen::VectorXd& state, const KeySet& keys, const Eigen::MatrixXd& points)>;

struct RolloutOptions {
    std::vector<int> resolution;  // per-window grid
    double lo = -std::numeric_limits<double>::infinity();  // trained state range
    double hi = std::numeric_limits<double>::infinity();
};

/// Applies `op` window after window, feeding each window-end state back.
/// Windows after the first drop their t = t0 slice, so time is strictly
/// increasing along the first axis.
SolutionField rollout(const Domain& window, const WindowOperator& op, const StateLayout& layout,
                      Eigen::VectorXd state, int n_steps, const RolloutOptions& options,
                      const std::vector<std::string>& variables);

/// DeepONet time-stepping from the given (or configured) initial state.
SolutionField time_step(const SolutionHandle& handle, int n_steps, const std::vector<int>& resolution,
                        const std::optional<Eigen::VectorXd>& initial_state = std::nullopt);

/// Adds the analytic reference (expressions over global coordinates).
void attach_analytic(SolutionField& field, const std::vector<std::string>& analytic);

StateLayout state_layout(const SolutionHandle& handle);

}  // namespace pinnsolve
