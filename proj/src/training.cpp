#include "pinnsolve/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "pinnsolve/batch_tape.hpp"
#include "pinnsolve/coord_function.hpp"
#include "pinnsolve/errors.hpp"

namespace pinnsolve {

void LossWeights::validate() const {
    if (!(initial >= 0.0) || !(boundary >= 0.0) || !std::isfinite(initial) || !std::isfinite(boundary))
        throw Error(ErrorCategory::Config, "loss weights must be finite and non-negative");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw Error(ErrorCategory::Config, "training.learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw Error(ErrorCategory::Config, "Adam betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw Error(ErrorCategory::Config, "Adam epsilon must be positive");
    if (chunk == 0) throw Error(ErrorCategory::Config, "chunk size must be positive");
    weights.validate();
}

double composite_loss(const LossComponents& c, const LossWeights& w) {
    return c.residual + w.initial * c.initial + w.boundary * c.boundary;
}

void TrainReport::write_csv(std::ostream& out) const {
    out << "epoch,residual,initial,boundary,composite\n";
    char buf[160];
    for (std::size_t e = 0; e < composite.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", e + 1, residual[e], initial[e], boundary[e],
                      composite[e]);
        out << buf;
    }
}

PointSet initial_point_set(const Domain& domain, const InitialSpec& spec, const Eigen::MatrixXd& points) {
    PointSet set;
    set.points = points;
    std::vector<Eigen::ArrayXd> rows;
    for (std::size_t l = 0; l < spec.conditions.size(); ++l)
        for (std::size_t k = 0; k < spec.conditions[l].size(); ++k) {
            set.target_rows.emplace_back(static_cast<int>(l), static_cast<int>(k));
            rows.push_back(CoordFunction::parse(spec.conditions[l][k], domain.axis_names()).evaluate({}, points));
        }
    set.targets.resize(static_cast<Eigen::Index>(rows.size()), points.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) set.targets.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    return set;
}

PointSet boundary_point_set(const Domain& domain, const BoundaryPoints& b) {
    PointSet set;
    set.points = b.points;
    set.edges = b.edges;
    set.targets = b.targets.transpose().matrix();
    set.normal_sign.resize(static_cast<Eigen::Index>(b.edges.size()));
    for (std::size_t j = 0; j < b.edges.size(); ++j) {
        const EdgeInfo info = edge_info(domain, b.edges[j]);
        set.normal_axis.push_back(static_cast<int>(info.axis));
        set.normal_sign[static_cast<Eigen::Index>(j)] = info.normal;
    }
    return set;
}

namespace {

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("PINNSOLVE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& f) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(threads, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < n;) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

enum class Role { Residual, Initial, Boundary, Plain };

struct Chunk {
    Eigen::Index begin = 0;
    Eigen::Index n = 0;
    Eigen::MatrixXd features;  // width x K*n
    Eigen::MatrixXd g, h;      // outputs x K*n
    std::vector<int> sample;
};

struct Prepared {
    Role role = Role::Plain;
    const PointSet* set = nullptr;
    KeySet keys;
    std::unique_ptr<JetMlp> net;  // PINN network or DeepONet trunk
    std::vector<Chunk> chunks;
};

KeySet keys_for(Role role, const PointSet& set, const std::vector<expr::ResidualAst>& residuals,
                BoundaryKind boundary_kind) {
    std::vector<DerivKey> req;
    switch (role) {
    case Role::Residual:
        for (const auto& ast : residuals)
            for (const auto& ref : expr::derivative_requirements(ast)) req.push_back(ref.key);
        break;
    case Role::Initial:
        for (const auto& [l, k] : set.target_rows) req.push_back(repeated(0, k));
        break;
    case Role::Boundary:
        if (boundary_kind == BoundaryKind::Neumann)
            for (int a : set.normal_axis) req.push_back({a});
        break;
    case Role::Plain: break;
    }
    return KeySet(req);
}

Prepared prepare(const Model& model, Role role, const PointSet& set, KeySet keys, std::size_t chunk) {
    Prepared p;
    p.role = role;
    p.set = &set;
    p.keys = std::move(keys);
    const MlpArchitecture& arch = model.net.kind == ModelKind::Pinn ? model.net.mlp : model.net.onet.trunk;
    p.net = std::make_unique<JetMlp>(arch, p.keys);
    const Eigen::Index total = set.size();
    const auto nk = static_cast<Eigen::Index>(p.keys.size());
    const auto outputs = static_cast<Eigen::Index>(model.outputs());
    for (Eigen::Index begin = 0; begin < total; begin += static_cast<Eigen::Index>(chunk)) {
        Chunk c;
        c.begin = begin;
        c.n = std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk), total - begin);
        const Eigen::MatrixXd pts = set.points.middleCols(begin, c.n);
        c.features = model.features.jet(p.keys, pts);
        c.sample.resize(static_cast<std::size_t>(c.n));
        for (Eigen::Index j = 0; j < c.n; ++j) c.sample[static_cast<std::size_t>(j)] = set.sample_of(begin + j);
        if (model.hard()) {
            c.g.resize(outputs, nk * c.n);
            c.h.resize(outputs, nk * c.n);
            // Group columns by sample so each factor pair is evaluated once per group.
            std::map<int, std::vector<Eigen::Index>> groups;
            if (model.ansatz.size() == 1) {
                auto& all = groups[0];
                for (Eigen::Index j = 0; j < c.n; ++j) all.push_back(j);
            } else {
                for (Eigen::Index j = 0; j < c.n; ++j) groups[c.sample[static_cast<std::size_t>(j)]].push_back(j);
            }
            for (const auto& [s, cols] : groups) {
                Eigen::MatrixXd sub(pts.rows(), static_cast<Eigen::Index>(cols.size()));
                for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = pts.col(cols[i]);
                const auto& factors = model.factors(s);
                for (Eigen::Index l = 0; l < outputs; ++l)
                    for (Eigen::Index k = 0; k < nk; ++k) {
                        const DerivKey& key = p.keys.key(static_cast<std::size_t>(k));
                        const Eigen::ArrayXd gv = factors[static_cast<std::size_t>(l)].g.evaluate(key, sub);
                        const Eigen::ArrayXd hv = factors[static_cast<std::size_t>(l)].h.evaluate(key, sub);
                        for (std::size_t i = 0; i < cols.size(); ++i) {
                            c.g(l, k * c.n + cols[i]) = gv[static_cast<Eigen::Index>(i)];
                            c.h(l, k * c.n + cols[i]) = hv[static_cast<Eigen::Index>(i)];
                        }
                    }
            }
        }
        p.chunks.push_back(std::move(c));
    }
    return p;
}

/// Branch outputs for every function sample (p*L x F).
struct BranchState {
    Eigen::MatrixXd out;
    JetMlp::Cache cache;
};

struct ChunkForward {
    Eigen::MatrixXd u;      // outputs x K*n
    Eigen::MatrixXd trunk;  // DeepONet trunk jet
    Eigen::MatrixXd gathered;
    JetMlp::Cache cache;
};

void forward_chunk(const Model& model, const Prepared& p, const Chunk& c, const Eigen::VectorXd& params,
                   const BranchState* branch, ChunkForward& f, bool keep_cache) {
    const auto nk = static_cast<Eigen::Index>(p.keys.size());
    const auto outputs = static_cast<Eigen::Index>(model.outputs());
    Eigen::MatrixXd raw;
    if (model.net.kind == ModelKind::Pinn) {
        raw = p.net->forward(params.data(), c.features, c.n, keep_cache ? &f.cache : nullptr);
    } else {
        const auto& onet = model.net.onet;
        const auto pw = static_cast<Eigen::Index>(onet.p);
        const double* trunk_params = params.data() + onet.branch.param_count();
        f.trunk = p.net->forward(trunk_params, c.features, c.n, keep_cache ? &f.cache : nullptr);
        f.gathered.resize(branch->out.rows(), c.n);
        for (Eigen::Index j = 0; j < c.n; ++j) f.gathered.col(j) = branch->out.col(c.sample[static_cast<std::size_t>(j)]);
        raw.resize(outputs, nk * c.n);
        for (Eigen::Index l = 0; l < outputs; ++l)
            for (Eigen::Index k = 0; k < nk; ++k)
                raw.block(l, k * c.n, 1, c.n) =
                    (f.gathered.middleRows(l * pw, pw).array() * f.trunk.block(l * pw, k * c.n, pw, c.n).array())
                        .colwise()
                        .sum();
    }
    f.u = model.hard() ? ansatz_jet(p.keys, c.n, c.g, c.h, raw) : std::move(raw);
}

/// Accumulates parameter gradients (and branch-output adjoints) for d_u.
void backward_chunk(const Model& model, const Prepared& p, const Chunk& c, const Eigen::VectorXd& params,
                    const ChunkForward& f, const Eigen::MatrixXd& d_u, double* grad, Eigen::MatrixXd* d_branch) {
    const auto nk = static_cast<Eigen::Index>(p.keys.size());
    const auto outputs = static_cast<Eigen::Index>(model.outputs());
    Eigen::MatrixXd d_raw = model.hard() ? ansatz_jet_adjoint(p.keys, c.n, c.h, d_u) : d_u;
    if (model.net.kind == ModelKind::Pinn) {
        p.net->backward(params.data(), f.cache, std::move(d_raw), c.n, grad);
        return;
    }
    const auto& onet = model.net.onet;
    const auto pw = static_cast<Eigen::Index>(onet.p);
    Eigen::MatrixXd d_trunk(f.trunk.rows(), f.trunk.cols());
    Eigen::MatrixXd d_gathered = Eigen::MatrixXd::Zero(f.gathered.rows(), c.n);
    for (Eigen::Index l = 0; l < outputs; ++l)
        for (Eigen::Index k = 0; k < nk; ++k) {
            const Eigen::RowVectorXd dr = d_raw.block(l, k * c.n, 1, c.n);
            d_trunk.block(l * pw, k * c.n, pw, c.n) = f.gathered.middleRows(l * pw, pw).array().rowwise() * dr.array();
            d_gathered.middleRows(l * pw, pw).array() +=
                f.trunk.block(l * pw, k * c.n, pw, c.n).array().rowwise() * dr.array();
        }
    const auto offset = static_cast<Eigen::Index>(onet.branch.param_count());
    p.net->backward(params.data() + offset, f.cache, std::move(d_trunk), c.n, grad + offset);
    for (Eigen::Index j = 0; j < c.n; ++j) d_branch->col(c.sample[static_cast<std::size_t>(j)]) += d_gathered.col(j);
}

/// Folds a residual tree onto a BatchTape whose leaves are jet rows.
struct ResidualBackend {
    using Id = ad::BatchTape::Id;
    ad::BatchTape& tape;
    const Eigen::MatrixXd& u;
    const KeySet& keys;
    const Eigen::MatrixXd& points;  // chunk coordinates
    const Eigen::MatrixXd& symbols; // chunk symbol values
    Eigen::Index n;
    std::map<expr::DerivRef, Id>& leaves;

    Id number(double v) { return tape.constant(v); }
    Id coordinate(int i) { return tape.constant(points.row(i).transpose().array()); }
    Id symbol(int i) {
        if (i >= symbols.rows()) throw Error(ErrorCategory::Argument, "missing values for a residual symbol");
        return tape.constant(symbols.row(i).transpose().array());
    }
    Id derivative(const expr::DerivRef& r) {
        auto it = leaves.find(r);
        if (it != leaves.end()) return it->second;
        const int k = keys.index_of(r.key);
        const Id id = tape.leaf(u.block(r.variable, k * n, 1, n).transpose().array());
        leaves.emplace(r, id);
        return id;
    }
    Id call(expr::Func f, Id a) {
        using F = expr::Func;
        switch (f) {
        case F::Sin: return tape.sin(a);
        case F::Cos: return tape.cos(a);
        case F::Tan: return tape.tan(a);
        case F::Tanh: return tape.tanh(a);
        case F::Exp: return tape.exp(a);
        case F::Log: return tape.log(a);
        case F::Sqrt: return tape.sqrt(a);
        case F::Abs: return tape.abs(a);
        }
        return a;
    }
    Id negate(Id a) { return tape.neg(a); }
    Id add(Id a, Id b) { return tape.add(a, b); }
    Id sub(Id a, Id b) { return tape.sub(a, b); }
    Id mul(Id a, Id b) { return tape.mul(a, b); }
    Id div(Id a, Id b) { return tape.div(a, b); }
    Id pow_int(Id a, int e) { return tape.pow(a, e); }
    Id exp(Id a) { return tape.exp(a); }
    Id log(Id a) { return tape.log(a); }
};

/// Sum of squared pointwise terms for one chunk; fills d_u (already scaled)
/// when requested.
double chunk_loss(Role role, const std::vector<expr::ResidualAst>& residuals, BoundaryKind boundary_kind,
                  const Prepared& p, const Chunk& c, const Eigen::MatrixXd& u, double scale, Eigen::MatrixXd* d_u) {
    const PointSet& set = *p.set;
    const Eigen::Index n = c.n;
    double sum = 0.0;
    if (d_u) d_u->setZero(u.rows(), u.cols());
    switch (role) {
    case Role::Residual: {
        ad::BatchTape tape(n);
        std::map<expr::DerivRef, ad::BatchTape::Id> leaves;
        const Eigen::MatrixXd pts = set.points.middleCols(c.begin, n);
        const Eigen::MatrixXd sym =
            set.symbols.rows() > 0 ? Eigen::MatrixXd(set.symbols.middleCols(c.begin, n)) : Eigen::MatrixXd();
        ResidualBackend be{tape, u, p.keys, pts, sym, n, leaves};
        std::vector<std::pair<ad::BatchTape::Id, ad::BatchTape::Array>> seeds;
        for (const auto& ast : residuals) {
            const auto id = expr::fold(ast.root(), be);
            ad::BatchTape::Array r = tape.value(id);
            if (r.size() == 1 && n != 1) r = ad::BatchTape::Array::Constant(n, r[0]);
            sum += r.square().sum();
            if (d_u && tape.tracked(id)) seeds.emplace_back(id, 2.0 * scale * r);
        }
        if (d_u && !seeds.empty()) {
            const auto adj = tape.backward(seeds);
            for (const auto& [ref, id] : leaves) {
                const auto& a = adj[static_cast<std::size_t>(id)];
                if (a.size() == 0) continue;
                const int k = p.keys.index_of(ref.key);
                d_u->block(ref.variable, k * n, 1, n) += a.transpose().matrix();
            }
        }
        break;
    }
    case Role::Initial:
        for (std::size_t r = 0; r < set.target_rows.size(); ++r) {
            const auto [l, order] = set.target_rows[r];
            const int k = p.keys.index_of(repeated(0, order));
            const Eigen::ArrayXd diff = u.block(l, k * n, 1, n).transpose().array() -
                                        set.targets.block(static_cast<Eigen::Index>(r), c.begin, 1, n).transpose().array();
            sum += diff.square().sum();
            if (d_u) d_u->block(l, k * n, 1, n) += (2.0 * scale * diff).transpose().matrix();
        }
        break;
    case Role::Boundary:
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index col = c.begin + j;
            int k = 0;
            double sign = 1.0;
            if (boundary_kind == BoundaryKind::Neumann) {
                k = p.keys.index_of({set.normal_axis[static_cast<std::size_t>(col)]});
                sign = set.normal_sign[col];
            }
            const double diff = sign * u(0, k * n + j) - set.targets(0, col);
            sum += diff * diff;
            if (d_u) (*d_u)(0, k * n + j) += 2.0 * scale * diff * sign;
        }
        break;
    case Role::Plain: break;
    }
    return sum;
}

}  // namespace

// ---------------------------------------------------------------------------

Eigen::MatrixXd evaluate_jets(const Model& model, const Eigen::VectorXd& params, const KeySet& keys,
                              const PointSet& set, std::size_t chunk) {
    Prepared p = prepare(model, Role::Plain, set, keys, std::max<std::size_t>(chunk, 1));
    BranchState branch;
    if (model.net.kind == ModelKind::DeepOnet) {
        JetMlp net(model.net.onet.branch, KeySet());
        branch.out = net.forward(params.data(), model.sensors, model.sensors.cols(), nullptr);
    }
    const auto nk = static_cast<Eigen::Index>(keys.size());
    const Eigen::Index total = set.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(model.outputs()), nk * total);
    for (const Chunk& c : p.chunks) {
        ChunkForward f;
        forward_chunk(model, p, c, params, &branch, f, false);
        for (Eigen::Index k = 0; k < nk; ++k) out.middleCols(k * total + c.begin, c.n) = f.u.middleCols(k * c.n, c.n);
    }
    return out;
}

struct LossEvaluator::Impl {
    Model model;
    std::vector<expr::ResidualAst> residuals;
    BoundaryKind boundary_kind;
    TrainConfig config;
    std::size_t threads = 1;
    std::vector<std::unique_ptr<PointSet>> sets;
    std::vector<Prepared> prepared;
    std::unique_ptr<JetMlp> branch_net;
    LossCounters counters;
    bool initial = false;
    bool boundary = false;
};

LossEvaluator::LossEvaluator(const Model& model, std::vector<expr::ResidualAst> residuals,
                             std::optional<PointSet> residual, std::optional<PointSet> initial,
                             std::optional<PointSet> boundary, BoundaryKind boundary_kind, TrainConfig config)
    : impl_(std::make_unique<Impl>()) {
    Impl& m = *impl_;
    m.model = model;
    m.residuals = std::move(residuals);
    m.boundary_kind = boundary_kind;
    m.config = config;
    m.threads = resolve_threads(config.threads);
    if (model.net.values.size() != static_cast<Eigen::Index>(model.net.expected_size()))
        throw Error(ErrorCategory::Argument, "model parameter vector has the wrong size");
    auto add = [&](Role role, std::optional<PointSet>& s) {
        if (!s || s->size() == 0) return false;
        m.sets.push_back(std::make_unique<PointSet>(std::move(*s)));
        const PointSet& set = *m.sets.back();
        m.prepared.push_back(
            prepare(m.model, role, set, keys_for(role, set, m.residuals, boundary_kind), config.chunk));
        return true;
    };
    add(Role::Residual, residual);
    m.initial = add(Role::Initial, initial);
    m.boundary = add(Role::Boundary, boundary);
    if (model.net.kind == ModelKind::DeepOnet) {
        if (model.sensors.rows() != static_cast<Eigen::Index>(model.net.onet.branch.inputs))
            throw Error(ErrorCategory::Argument, "sensor matrix does not match the branch width");
        m.branch_net = std::make_unique<JetMlp>(model.net.onet.branch, KeySet());
    }
}

LossEvaluator::~LossEvaluator() = default;
LossEvaluator::LossEvaluator(LossEvaluator&&) noexcept = default;
LossEvaluator& LossEvaluator::operator=(LossEvaluator&&) noexcept = default;

const LossCounters& LossEvaluator::counters() const noexcept { return impl_->counters; }
bool LossEvaluator::has_initial() const noexcept { return impl_->initial; }
bool LossEvaluator::has_boundary() const noexcept { return impl_->boundary; }

LossComponents LossEvaluator::evaluate(const Eigen::VectorXd& params, Eigen::VectorXd* grad) {
    Impl& m = *impl_;
    const Model& model = m.model;
    const bool onet = model.net.kind == ModelKind::DeepOnet;
    if (params.size() != static_cast<Eigen::Index>(model.net.expected_size()))
        throw Error(ErrorCategory::Argument, "parameter vector has the wrong size");
    if (grad) grad->setZero(params.size());

    BranchState branch;
    Eigen::MatrixXd d_branch;
    if (onet) {
        branch.out = m.branch_net->forward(params.data(), model.sensors, model.sensors.cols(),
                                           grad ? &branch.cache : nullptr);
        if (grad) d_branch.setZero(branch.out.rows(), branch.out.cols());
    }

    LossComponents out;
    for (const Prepared& p : m.prepared) {
        double weight = 1.0;
        double* component = &out.residual;
        if (p.role == Role::Initial) {
            weight = m.config.weights.initial;
            component = &out.initial;
            ++m.counters.initial;
        } else if (p.role == Role::Boundary) {
            weight = m.config.weights.boundary;
            component = &out.boundary;
            ++m.counters.boundary;
        } else {
            ++m.counters.residual;
        }
        const double inv_n = 1.0 / static_cast<double>(p.set->size());
        const double scale = weight * inv_n;

        // Chunks run in waves of `threads`; partial results are reduced in
        // chunk order so the outcome does not depend on the thread count.
        const std::size_t wave = std::max<std::size_t>(m.threads, 1);
        for (std::size_t w0 = 0; w0 < p.chunks.size(); w0 += wave) {
            const std::size_t w1 = std::min(p.chunks.size(), w0 + wave);
            std::vector<double> sums(w1 - w0, 0.0);
            std::vector<Eigen::VectorXd> grads(grad ? w1 - w0 : 0);
            std::vector<Eigen::MatrixXd> dbs(grad && onet ? w1 - w0 : 0);
            parallel_for(w1 - w0, m.threads, [&](std::size_t i) {
                const Chunk& c = p.chunks[w0 + i];
                ChunkForward f;
                forward_chunk(model, p, c, params, onet ? &branch : nullptr, f, grad != nullptr);
                Eigen::MatrixXd d_u;
                sums[i] = chunk_loss(p.role, m.residuals, m.boundary_kind, p, c, f.u, scale, grad ? &d_u : nullptr);
                if (!grad) return;
                grads[i] = Eigen::VectorXd::Zero(params.size());
                Eigen::MatrixXd* db = nullptr;
                if (onet) {
                    dbs[i] = Eigen::MatrixXd::Zero(branch.out.rows(), branch.out.cols());
                    db = &dbs[i];
                }
                backward_chunk(model, p, c, params, f, d_u, grads[i].data(), db);
            });
            for (std::size_t i = 0; i < sums.size(); ++i) {
                *component += sums[i];
                if (grad) *grad += grads[i];
                if (grad && onet) d_branch += dbs[i];
            }
        }
        *component *= inv_n;
    }
    if (grad && onet) m.branch_net->backward(params.data(), branch.cache, d_branch, branch.out.cols(), grad->data());
    return out;
}

// ---------------------------------------------------------------------------

double residual_loss(const Model& model, const Eigen::VectorXd& params,
                     const std::vector<expr::ResidualAst>& residuals, const PointSet& points) {
    LossEvaluator ev(model, residuals, points, std::nullopt, std::nullopt, BoundaryKind::Dirichlet, TrainConfig{});
    return ev.evaluate(params).residual;
}

double initial_loss(const Model& model, const Eigen::VectorXd& params, const PointSet& points) {
    LossEvaluator ev(model, {}, std::nullopt, points, std::nullopt, BoundaryKind::Dirichlet, TrainConfig{});
    return ev.evaluate(params).initial;
}

double boundary_loss(const Model& model, const Eigen::VectorXd& params, BoundaryKind kind, const PointSet& points) {
    LossEvaluator ev(model, {}, std::nullopt, std::nullopt, points, kind, TrainConfig{});
    return ev.evaluate(params).boundary;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, const TrainConfig& config) {
    if (!grads.allFinite()) throw Error(ErrorCategory::Divergence, "non-finite gradient");
    if (state.m.size() != params.size()) {
        state.m = Eigen::VectorXd::Zero(params.size());
        state.v = Eigen::VectorXd::Zero(params.size());
        state.step = 0;
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    state.m = config.beta1 * state.m + (1.0 - config.beta1) * grads;
    state.v = config.beta2 * state.v + (1.0 - config.beta2) * grads.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    params.array() -= config.learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + config.epsilon);
}

TrainReport train(LossEvaluator& evaluator, Eigen::VectorXd params, const TrainConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    TrainReport report;
    report.seed = config.seed;
    AdamState adam;
    Eigen::VectorXd grad;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const LossComponents c = evaluator.evaluate(params, &grad);
        const double total = composite_loss(c, config.weights);
        if (!std::isfinite(total)) throw DivergenceError("non-finite loss", epoch);
        if (!grad.allFinite()) throw DivergenceError("non-finite gradient", epoch);
        report.residual.push_back(c.residual);
        report.initial.push_back(c.initial);
        report.boundary.push_back(c.boundary);
        report.composite.push_back(total);
        adam_step(params, grad, adam, config);
    }
    report.params = std::move(params);
    report.counters = evaluator.counters();
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace pinnsolve
