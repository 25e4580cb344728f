#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "pinnsolve/expression.hpp"
#include "pinnsolve/geometry.hpp"
#include "pinnsolve/models.hpp"

namespace pinnsolve {

struct LossWeights {
    double initial = 1.0;   // gamma_i
    double boundary = 1.0;  // gamma_b

    void validate() const;
};

struct TrainConfig {
    std::size_t epochs = 1000;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    LossWeights weights;
    /// Points per evaluation chunk. Changes memory use and summation order.
    std::size_t chunk = 2048;
    /// Worker threads; 0 reads PINNSOLVE_THREADS (default 1).
    std::size_t threads = 0;

    void validate() const;
};

struct LossComponents {
    double residual = 0.0;
    double initial = 0.0;
    double boundary = 0.0;
};

/// residual + gamma_i * initial + gamma_b * boundary.
double composite_loss(const LossComponents& c, const LossWeights& w);

/// Number of times each component was evaluated.
struct LossCounters {
    std::size_t residual = 0;
    std::size_t initial = 0;
    std::size_t boundary = 0;
};

struct TrainReport {
    std::vector<double> composite;
    std::vector<double> residual;
    std::vector<double> initial;
    std::vector<double> boundary;
    Eigen::VectorXd params;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    LossCounters counters;

    double final_loss() const { return composite.empty() ? 0.0 : composite.back(); }
    /// Columns: epoch, L_residual, L_initial, L_boundary, composite.
    void write_csv(std::ostream& out) const;
};

/// A surrogate ready for batched evaluation.
struct Model {
    NetworkParams net;
    Featurizer features;
    /// DeepONet branch inputs, one column per function sample.
    Eigen::MatrixXd sensors;
    /// Hard-constraint factors indexed [sample][output]; a single entry is
    /// shared by every sample. Empty means no ansatz.
    std::vector<std::vector<AnsatzFactors>> ansatz;

    std::size_t outputs() const { return net.outputs(); }
    bool hard() const { return !ansatz.empty(); }
    const std::vector<AnsatzFactors>& factors(int sample) const {
        return ansatz.size() == 1 ? ansatz[0] : ansatz.at(static_cast<std::size_t>(sample));
    }
};

/// Collocation points with whatever per-column data the losses need.
struct PointSet {
    Eigen::MatrixXd points;    // dims x n
    std::vector<int> sample;   // DeepONet function sample per column (empty: all 0)
    Eigen::MatrixXd symbols;   // auxiliary symbol values, one row per symbol

    // Initial sets: target rows, each a (variable, t-derivative order) pair.
    std::vector<std::pair<int, int>> target_rows;
    // Initial or boundary targets: one row per target row (boundary: 1 row).
    Eigen::MatrixXd targets;

    // Boundary sets.
    std::vector<Edge> edges;
    std::vector<int> normal_axis;
    Eigen::ArrayXd normal_sign;

    Eigen::Index size() const { return points.cols(); }
    int sample_of(Eigen::Index j) const { return sample.empty() ? 0 : sample[static_cast<std::size_t>(j)]; }
};

/// Initial set from condition expressions over the domain coordinates.
PointSet initial_point_set(const Domain& domain, const InitialSpec& spec, const Eigen::MatrixXd& points);
/// Boundary set with edge labels, outward normals and targets.
PointSet boundary_point_set(const Domain& domain, const BoundaryPoints& b);

/// Jets u (outputs x keys*n) of the constrained surrogate at `set`.
Eigen::MatrixXd evaluate_jets(const Model& model, const Eigen::VectorXd& params, const KeySet& keys,
                              const PointSet& set, std::size_t chunk = 2048);

/// Composite-loss evaluator over fixed collocation sets. Hard modes pass no
/// initial/boundary set and those components are never evaluated.
class LossEvaluator {
public:
    LossEvaluator(const Model& model, std::vector<expr::ResidualAst> residuals,
                  std::optional<PointSet> residual, std::optional<PointSet> initial,
                  std::optional<PointSet> boundary, BoundaryKind boundary_kind, TrainConfig config);
    ~LossEvaluator();
    LossEvaluator(LossEvaluator&&) noexcept;
    LossEvaluator& operator=(LossEvaluator&&) noexcept;

    /// Components at `params`; when `grad` is given it receives the gradient
    /// of the composite loss.
    LossComponents evaluate(const Eigen::VectorXd& params, Eigen::VectorXd* grad = nullptr);

    const LossCounters& counters() const noexcept;
    bool has_initial() const noexcept;
    bool has_boundary() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// L = (1/N) sum_points sum_l r_l^2.
double residual_loss(const Model& model, const Eigen::VectorXd& params,
                     const std::vector<expr::ResidualAst>& residuals, const PointSet& points);
/// Mean over points of the summed squared mismatch of every target row.
double initial_loss(const Model& model, const Eigen::VectorXd& params, const PointSet& points);
/// Dirichlet: mean (u - target)^2; Neumann: mean (du/dn - target)^2.
double boundary_loss(const Model& model, const Eigen::VectorXd& params, BoundaryKind kind,
                     const PointSet& points);

struct AdamState {
    Eigen::VectorXd m;
    Eigen::VectorXd v;
    std::size_t step = 0;
};

/// One bias-corrected Adam update. Throws Error(Divergence) on a non-finite gradient.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, const TrainConfig& config);

/// Full-batch Adam for config.epochs steps. Losses are recorded before each
/// update; throws DivergenceError (with the epoch) on a non-finite loss.
TrainReport train(LossEvaluator& evaluator, Eigen::VectorXd params, const TrainConfig& config);

}  // namespace pinnsolve
