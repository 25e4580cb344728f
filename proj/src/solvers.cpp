#include "pinnsolve/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "pinnsolve/coord_function.hpp"
#include "pinnsolve/errors.hpp"

namespace pinnsolve {

namespace {

bool is_ode(ProblemKind k) {
    return k == ProblemKind::OdeIvp || k == ProblemKind::OdeBvp || k == ProblemKind::OdeSystemIvp;
}
bool has_initial_data(ProblemKind k) {
    return k == ProblemKind::OdeIvp || k == ProblemKind::OdeSystemIvp || k == ProblemKind::PdeTx;
}
DomainKind domain_kind_for(ProblemKind k) {
    if (is_ode(k)) return DomainKind::OdeTime;
    return k == ProblemKind::PdeTx ? DomainKind::EvolutionTx : DomainKind::SpatialXy;
}
BoundaryKind boundary_kind(const ProblemSpec& s) {
    if (is_ode(s.problem)) return BoundaryKind::Dirichlet;
    return s.boundary ? s.boundary->kind : BoundaryKind::Periodic;
}
std::size_t per_function(std::size_t total, std::size_t samples) {
    return std::max<std::size_t>(1, (total + samples - 1) / samples);
}

std::vector<Issue> collect_issues(const ProblemSpec& s) {
    std::vector<Issue> out;
    auto config = [&](std::string m) { out.push_back({ErrorCategory::Config, std::move(m)}); };
    auto guard = [&](const char* prefix, auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            config(std::string(prefix) + e.what());
        }
    };

    const std::size_t neq = s.equations.size();
    if (neq == 0) config("problem.equations: at least one equation is required");
    if (!s.variables.empty() && s.variables.size() != neq)
        config("problem.variables: " + std::to_string(s.variables.size()) + " names for " + std::to_string(neq) +
               " equations");
    if (neq > 1 && s.problem != ProblemKind::OdeSystemIvp)
        config("problem.equations: only ode-system-ivp accepts more than one equation");
    if (s.domain.kind() != domain_kind_for(s.problem))
        config("domain: axes do not match problem kind " + to_string(s.problem));
    guard("problem.variables: ", [&] { s.var_config().validate(); });

    if (s.residual_points == 0) config("domain.residual_points: must be positive (got 0)");
    if (s.network.layers == 0) config("network.layers: must be positive (got 0)");
    if (s.network.units == 0) config("network.units: must be positive (got 0)");
    guard("training: ", [&] { s.training.validate(); });

    if (has_initial_data(s.problem)) {
        if (!s.initial) {
            config("initial: required for " + to_string(s.problem));
        } else {
            if (s.initial->conditions.size() != neq)
                config("initial: " + std::to_string(s.initial->conditions.size()) + " condition lists for " +
                       std::to_string(neq) + " equations");
            for (std::size_t l = 0; l < s.initial->conditions.size(); ++l) {
                const std::size_t order = s.initial->conditions[l].size();
                const std::size_t cap = s.problem == ProblemKind::PdeTx ? 2 : 4;
                if (order == 0 || order > cap)
                    config("initial: order of variable " + std::to_string(l + 1) + " must be 1.." +
                           std::to_string(cap) + " (got " + std::to_string(order) + ")");
                if (s.constraint == ConstraintMode::Hard && is_ode(s.problem) && order > 2)
                    config("initial: hard-constrained ODEs support order <= 2");
            }
            if (s.problem == ProblemKind::PdeTx && s.initial->points < 1)
                config("initial.points: must be positive (got " + std::to_string(s.initial->points) + ")");
        }
    } else if (s.initial) {
        config("initial: not allowed for " + to_string(s.problem));
    }

    const bool needs_boundary = s.problem == ProblemKind::OdeBvp || !is_ode(s.problem);
    if (needs_boundary) {
        if (!s.boundary)
            config("boundary: required for " + to_string(s.problem));
        else
            guard("boundary: ", [&] { s.boundary->validate(s.domain); });
    } else if (s.boundary) {
        config("boundary: not allowed for " + to_string(s.problem));
    }

    if (s.model == ModelKind::DeepOnet) {
        if (!s.sensors) {
            config("sensors: required for deeponet models");
        } else {
            guard("sensors: ", [&] { s.sensors->validate(); });
            const bool series = s.problem == ProblemKind::PdeTx || s.problem == ProblemKind::PdeXy;
            if (series && s.sensors->family != SensorFamily::TruncatedFourier)
                config("sensors.family: " + to_string(s.problem) + " needs truncated-fourier sensors");
            if (!series && s.sensors->family != SensorFamily::ScalarTuple)
                config("sensors.family: ODE operators take scalar-tuple sensors");
        }
    } else if (s.sensors) {
        config("sensors: only used by deeponet models");
    }

    if (!admissible(s.problem, s.model, boundary_kind(s), s.constraint)) {
        try {
            require_admissible(s.problem, s.model, boundary_kind(s), s.constraint);
        } catch (const Error& e) {
            out.push_back({ErrorCategory::Admissibility, e.what()});
        }
    }
    return out;
}

CoordFunction family_function(const FunctionFamily& fam, const Eigen::VectorXd& coeffs, std::size_t x_axis,
                              std::size_t dims) {
    ad::TapeBuilder b;
    std::vector<ad::Var> in;
    for (std::size_t i = 0; i < dims; ++i) in.push_back(b.input());
    return CoordFunction(b.build(fam.build(coeffs, in[x_axis])));
}

double constant_at(const std::string& src, const Domain& domain, std::span<const double> point) {
    return CoordFunction::parse(expr::normalize_source(src), domain.axis_names()).value(point);
}

/// Hard-constraint factors for one branch input (or the PINN problem data).
std::vector<AnsatzFactors> ansatz_for(const SolutionHandle& h, const std::optional<Eigen::VectorXd>& sensors) {
    const ProblemSpec& s = h.spec;
    const Domain& d = s.domain;
    const bool onet = s.model == ModelKind::DeepOnet;
    const double t0[] = {d.axis(0).lo};
    switch (s.problem) {
    case ProblemKind::OdeIvp: {
        std::vector<double> values;
        if (onet) {
            values.assign(sensors->data(), sensors->data() + sensors->size());
        } else {
            for (const auto& c : s.initial->conditions[0]) values.push_back(constant_at(c, d, t0));
        }
        return {ode_ivp_ansatz(d, values)};
    }
    case ProblemKind::OdeBvp: {
        if (onet) return {ode_bvp_ansatz(d, (*sensors)[0], (*sensors)[1])};
        const double tf[] = {d.axis(0).hi};
        return {ode_bvp_ansatz(d, constant_at(s.boundary->condition(Edge::T0), d, t0),
                               constant_at(s.boundary->condition(Edge::TF), d, tf))};
    }
    case ProblemKind::PdeTx: {
        std::vector<CoordFunction> init;
        if (onet) {
            const auto ns = static_cast<Eigen::Index>(h.sensor_locations.size());
            for (Eigen::Index k = 0; k * ns < sensors->size(); ++k) {
                const Eigen::VectorXd vals = sensors->segment(k * ns, ns);
                const auto coeffs = h.family->fit(h.sensor_locations, std::span<const double>(vals.data(), vals.size()));
                init.push_back(family_function(*h.family, coeffs, 1, 2));
            }
        } else {
            for (const auto& c : s.initial->conditions[0])
                init.push_back(CoordFunction::parse(expr::normalize_source(c), d.axis_names()));
        }
        return {time_ansatz(d, init)};
    }
    case ProblemKind::PdeXy: {
        if (s.boundary->kind != BoundaryKind::Dirichlet) return {};
        std::array<CoordFunction, 4> edges;
        const Edge order[] = {Edge::XL, Edge::XR, Edge::YL, Edge::YU};
        for (int i = 0; i < 4; ++i)
            edges[static_cast<std::size_t>(i)] =
                CoordFunction::parse(expr::normalize_source(s.boundary->condition(order[i])), d.axis_names());
        return {dirichlet_xy_ansatz(d, edges)};
    }
    case ProblemKind::OdeSystemIvp: break;
    }
    return {};
}

struct Assembly {
    SolutionHandle handle;
    std::optional<PointSet> residual, initial, boundary;
};

Assembly assemble(const ProblemSpec& spec) {
    spec.validate();
    Assembly a;
    SolutionHandle& h = a.handle;
    h.spec = spec;
    const Domain& d = spec.domain;
    const bool onet = spec.model == ModelKind::DeepOnet;
    const bool hard = spec.constraint == ConstraintMode::Hard;
    const std::uint64_t seed = spec.training.seed;
    const auto names = spec.variable_names();
    const auto L = names.size();
    const auto orders = spec.orders();
    const BoundaryKind bkind = boundary_kind(spec);

    const auto vc = spec.var_config();
    for (const auto& src : spec.equations) h.residuals.push_back(expr::parse(expr::normalize_source(src), vc));

    // inputs
    std::vector<bool> periodic(d.dims(), false);
    if (!is_ode(spec.problem) && bkind == BoundaryKind::Periodic) {
        if (spec.problem == ProblemKind::PdeTx)
            periodic[1] = true;
        else
            periodic.assign(2, true);
    }
    h.model.features = Featurizer(d, periodic);

    // sensors
    SensorSet sensors;
    std::size_t F = 1;
    if (onet) {
        SensorConfig sc = *spec.sensors;
        if (is_ode(spec.problem)) {
            std::size_t width = 2;
            if (spec.problem != ProblemKind::OdeBvp) {
                width = 0;
                for (int o : orders) width += static_cast<std::size_t>(o);
            }
            sc.sensors = static_cast<int>(width);
            sc.channels = 1;
            h.tuple_width = width;
            sensors = sample_sensors(sc, std::nullopt, {});
        } else {
            const Interval& xi = d.axis(spec.problem == ProblemKind::PdeTx ? 1 : 0);
            h.family = family_for(bkind, xi.lo, xi.hi, sc.modes);
            h.sensor_locations = sensor_locations(xi.lo, xi.hi, sc.sensors, bkind == BoundaryKind::Periodic);
            sc.channels = spec.problem == ProblemKind::PdeTx ? orders[0] : 1;
            sensors = sample_sensors(sc, h.family, h.sensor_locations);
        }
        h.model.sensors = sensors.values;
        F = static_cast<std::size_t>(sc.samples);
    }

    // network
    const auto& ns = spec.network;
    if (onet) {
        DeepOnetArchitecture arch;
        arch.p = ns.p ? ns.p : ns.units;
        arch.outputs = L;
        arch.branch = {static_cast<std::size_t>(h.model.sensors.rows()), ns.branch_layers ? ns.branch_layers : ns.layers,
                       ns.branch_units ? ns.branch_units : ns.units, arch.p * L};
        arch.trunk = {h.model.features.width(), ns.layers, ns.units, arch.p * L};
        h.model.net = init_params(arch, seed);
    } else {
        h.model.net = init_params(MlpArchitecture{h.model.features.width(), ns.layers, ns.units, L}, seed);
    }
    h.params = h.model.net.values;

    // hard constraints
    if (hard) {
        if (onet && spec.problem != ProblemKind::PdeXy) {
            for (std::size_t s = 0; s < F; ++s) {
                const Eigen::VectorXd col = h.model.sensors.col(static_cast<Eigen::Index>(s));
                h.model.ansatz.push_back(ansatz_for(h, col));
            }
        } else {
            auto f = ansatz_for(h, std::nullopt);
            if (!f.empty()) h.model.ansatz.push_back(std::move(f));
        }
    }

    auto assign_samples = [&](PointSet& set) {
        if (!onet) return;
        set.sample.resize(static_cast<std::size_t>(set.size()));
        for (std::size_t j = 0; j < set.sample.size(); ++j) set.sample[j] = static_cast<int>(j % F);
    };

    // residual points
    {
        PointSet set;
        const std::size_t n =
            onet ? (spec.points_per_function ? spec.points_per_function : per_function(spec.residual_points, F)) * F
                 : spec.residual_points;
        set.points = sample_residual_points(d, n, seed);
        assign_samples(set);
        if (onet && spec.problem == ProblemKind::PdeXy) {
            set.symbols.resize(1, set.size());
            for (Eigen::Index j = 0; j < set.size(); ++j)
                set.symbols(0, j) = h.family->value(sensors.coefficients[static_cast<std::size_t>(set.sample_of(j))][0],
                                                    set.points(0, j));
        }
        a.residual = std::move(set);
    }

    // initial points (soft only)
    if (has_initial_data(spec.problem) && !hard) {
        if (!onet) {
            a.initial = initial_point_set(d, *spec.initial, sample_initial_points(d, *spec.initial, seed));
        } else if (is_ode(spec.problem)) {
            PointSet set;
            set.points = Eigen::MatrixXd::Constant(1, static_cast<Eigen::Index>(F), d.axis(0).lo);
            for (std::size_t l = 0; l < L; ++l)
                for (int k = 0; k < orders[l]; ++k) set.target_rows.emplace_back(static_cast<int>(l), k);
            set.targets = h.model.sensors;  // tuple rows are already in target-row order
            assign_samples(set);
            a.initial = std::move(set);
        } else {
            InitialSpec is = *spec.initial;
            is.points = static_cast<int>(per_function(static_cast<std::size_t>(is.points), F) * F);
            PointSet set;
            set.points = sample_initial_points(d, is, seed);
            assign_samples(set);
            set.targets.resize(orders[0], set.size());
            for (int k = 0; k < orders[0]; ++k) {
                set.target_rows.emplace_back(0, k);
                for (Eigen::Index j = 0; j < set.size(); ++j)
                    set.targets(k, j) = h.family->value(
                        sensors.coefficients[static_cast<std::size_t>(set.sample_of(j))][static_cast<std::size_t>(k)],
                        set.points(1, j));
            }
            a.initial = std::move(set);
        }
    }

    // boundary points (soft, non-periodic)
    const bool boundary_loss = (spec.problem == ProblemKind::OdeBvp || !is_ode(spec.problem)) &&
                               bkind != BoundaryKind::Periodic && !(hard && (spec.problem == ProblemKind::OdeBvp ||
                                                                             spec.problem == ProblemKind::PdeXy));
    if (boundary_loss) {
        if (onet && spec.problem == ProblemKind::OdeBvp) {
            PointSet set;
            set.points.resize(1, static_cast<Eigen::Index>(2 * F));
            set.targets.resize(1, set.points.cols());
            for (std::size_t s = 0; s < F; ++s)
                for (int e = 0; e < 2; ++e) {
                    const auto col = static_cast<Eigen::Index>(2 * s) + e;
                    set.points(0, col) = e == 0 ? d.axis(0).lo : d.axis(0).hi;
                    set.targets(0, col) = h.model.sensors(e, static_cast<Eigen::Index>(s));
                    set.sample.push_back(static_cast<int>(s));
                    set.edges.push_back(e == 0 ? Edge::T0 : Edge::TF);
                    set.normal_axis.push_back(0);
                }
            set.normal_sign = Eigen::ArrayXd::Ones(set.points.cols());
            set.normal_sign(Eigen::seq(0, Eigen::last, 2)) = -1.0;
            a.boundary = std::move(set);
        } else {
            BoundarySpec bs = *spec.boundary;
            if (onet) bs.points = static_cast<int>(per_function(static_cast<std::size_t>(bs.points), F) * F);
            PointSet set = boundary_point_set(d, sample_boundary_points(d, bs, seed));
            assign_samples(set);
            a.boundary = std::move(set);
        }
    }
    return a;
}

Model evaluation_model(const SolutionHandle& h, const std::optional<Eigen::VectorXd>& sensors) {
    if (h.spec.model == ModelKind::Pinn) return h.model;
    if (!sensors) throw Error(ErrorCategory::Argument, "DeepONet evaluation needs sensor values");
    if (sensors->size() != h.model.sensors.rows())
        throw Error(ErrorCategory::Argument, "expected " + std::to_string(h.model.sensors.rows()) +
                                                 " sensor values, got " + std::to_string(sensors->size()));
    Model m;
    m.net = h.model.net;
    m.features = h.model.features;
    m.sensors = *sensors;
    if (h.model.hard()) {
        if (h.spec.problem == ProblemKind::PdeXy)
            m.ansatz = {h.model.ansatz[0]};
        else
            m.ansatz.push_back(ansatz_for(h, sensors));
    }
    return m;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> ProblemSpec::variable_names() const {
    if (!variables.empty()) return variables;
    static const char* defaults[] = {"u", "v", "w", "p", "q", "r"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < equations.size(); ++i) {
        if (i >= std::size(defaults)) throw Error(ErrorCategory::Config, "too many equations for default names");
        out.emplace_back(defaults[i]);
    }
    if (out.empty()) out.emplace_back("u");
    return out;
}

expr::VarConfig ProblemSpec::var_config() const {
    expr::VarConfig c;
    c.dependent = variable_names();
    c.independent = domain.axis_names();
    if (model == ModelKind::DeepOnet && problem == ProblemKind::PdeXy) c.symbols = {"f"};
    return c;
}

std::vector<int> ProblemSpec::orders() const {
    std::vector<int> out(variable_names().size(), 0);
    if (has_initial_data(problem) && initial)
        for (std::size_t l = 0; l < out.size() && l < initial->conditions.size(); ++l)
            out[l] = static_cast<int>(initial->conditions[l].size());
    return out;
}

std::vector<Issue> ProblemSpec::problems() const { return collect_issues(*this); }

void ProblemSpec::validate() const {
    const auto issues = collect_issues(*this);
    for (const auto& i : issues)
        if (i.category != ErrorCategory::Admissibility) throw Error(i.category, i.message);
    if (!issues.empty()) throw Error(issues.front().category, issues.front().message);
}

double SolutionField::mse() const {
    if (!analytic || values.size() == 0) return 0.0;
    return (values - *analytic).array().square().mean();
}

double SolutionField::max_abs_error() const {
    if (!analytic || values.size() == 0) return 0.0;
    return (values - *analytic).cwiseAbs().maxCoeff();
}

void SolutionField::write_csv(std::ostream& out) const {
    std::vector<std::string> header(axes);
    header.insert(header.end(), variables.begin(), variables.end());
    if (analytic)
        for (const auto& v : variables) {
            header.push_back(v + "_exact");
            header.push_back(v + "_sqerr");
        }
    if (!window.empty()) header.emplace_back("window");
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (Eigen::Index j = 0; j < size(); ++j) {
        std::string row;
        for (Eigen::Index r = 0; r < points.rows(); ++r) row += (r ? "," : "") + format_double(points(r, j));
        for (Eigen::Index l = 0; l < values.rows(); ++l) row += "," + format_double(values(l, j));
        if (analytic)
            for (Eigen::Index l = 0; l < values.rows(); ++l) {
                const double e = (*analytic)(l, j);
                row += "," + format_double(e) + "," + format_double((values(l, j) - e) * (values(l, j) - e));
            }
        if (!window.empty()) row += "," + std::to_string(window[static_cast<std::size_t>(j)]);
        out << row << '\n';
    }
}

Eigen::MatrixXd grid(const Domain& domain, const std::vector<int>& resolution) {
    if (resolution.size() != domain.dims())
        throw Error(ErrorCategory::Argument, "grid resolution needs one entry per axis");
    Eigen::Index total = 1;
    for (int r : resolution) {
        if (r < 1) throw Error(ErrorCategory::Argument, "grid resolution must be positive");
        total *= r;
    }
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(domain.dims()), total);
    for (Eigen::Index j = 0; j < total; ++j) {
        Eigen::Index rem = j;
        for (std::size_t a = domain.dims(); a-- > 0;) {
            const int r = resolution[a];
            const Eigen::Index i = rem % r;
            rem /= r;
            const Interval& iv = domain.axis(a);
            pts(static_cast<Eigen::Index>(a), j) =
                r == 1 ? iv.lo : (i == r - 1 ? iv.hi : iv.lo + iv.length() * static_cast<double>(i) / (r - 1));
        }
    }
    return pts;
}

SolutionHandle prepare(const ProblemSpec& spec) { return assemble(spec).handle; }

SolutionHandle solve(const ProblemSpec& spec) {
    Assembly a = assemble(spec);
    SolutionHandle& h = a.handle;
    h.report.seed = spec.training.seed;
    h.report.params = h.params;
    if (spec.training.epochs == 0) return std::move(h);
    LossEvaluator ev(h.model, h.residuals, std::move(a.residual), std::move(a.initial), std::move(a.boundary),
                     boundary_kind(spec), spec.training);
    h.report = train(ev, h.params, spec.training);
    h.params = h.report.params;
    return std::move(h);
}

Eigen::MatrixXd evaluate_jets(const SolutionHandle& handle, const KeySet& keys, const Eigen::MatrixXd& points,
                              const std::optional<Eigen::VectorXd>& sensor_values) {
    if (static_cast<std::size_t>(points.rows()) != handle.spec.domain.dims())
        throw Error(ErrorCategory::Argument, "evaluation points have the wrong dimension");
    const Model m = evaluation_model(handle, sensor_values);
    PointSet set;
    set.points = points;
    return evaluate_jets(m, handle.params, keys, set);
}

Eigen::MatrixXd evaluate(const SolutionHandle& handle, const Eigen::MatrixXd& points,
                         const std::optional<Eigen::VectorXd>& sensor_values) {
    return evaluate_jets(handle, KeySet(), points, sensor_values);
}

Eigen::VectorXd default_sensor_values(const SolutionHandle& h) {
    const ProblemSpec& s = h.spec;
    const Domain& d = s.domain;
    if (s.model != ModelKind::DeepOnet) throw Error(ErrorCategory::Argument, "PINN handles take no sensor values");
    const double t0[] = {d.axis(0).lo};
    std::vector<double> v;
    switch (s.problem) {
    case ProblemKind::OdeIvp:
    case ProblemKind::OdeSystemIvp:
        for (const auto& var : s.initial->conditions)
            for (const auto& c : var) v.push_back(constant_at(c, d, t0));
        break;
    case ProblemKind::OdeBvp: {
        const double tf[] = {d.axis(0).hi};
        v = {constant_at(s.boundary->condition(Edge::T0), d, t0), constant_at(s.boundary->condition(Edge::TF), d, tf)};
        break;
    }
    case ProblemKind::PdeTx:
        for (const auto& c : s.initial->conditions[0]) {
            const auto f = CoordFunction::parse(expr::normalize_source(c), d.axis_names());
            for (double x : h.sensor_locations) {
                const double pt[] = {t0[0], x};
                v.push_back(f.value(pt));
            }
        }
        break;
    case ProblemKind::PdeXy: {
        const auto f = CoordFunction::parse(expr::normalize_source(s.forcing), {"x"});
        for (double x : h.sensor_locations) {
            const double pt[] = {x};
            v.push_back(f.value(pt));
        }
        break;
    }
    }
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void attach_analytic(SolutionField& field, const std::vector<std::string>& analytic) {
    if (analytic.size() != field.variables.size())
        throw Error(ErrorCategory::Argument, "need one analytic expression per variable (got " +
                                                 std::to_string(analytic.size()) + ")");
    Eigen::MatrixXd ref(static_cast<Eigen::Index>(analytic.size()), field.size());
    for (std::size_t l = 0; l < analytic.size(); ++l)
        ref.row(static_cast<Eigen::Index>(l)) =
            CoordFunction::parse(expr::normalize_source(analytic[l]), field.axes).evaluate({}, field.points).transpose();
    field.analytic = std::move(ref);
}

SolutionField evaluate_error(const SolutionHandle& handle, const std::vector<std::string>& analytic,
                             const Eigen::MatrixXd& points, const std::optional<Eigen::VectorXd>& sensor_values) {
    SolutionField f;
    f.axes = handle.spec.domain.axis_names();
    f.variables = handle.spec.variable_names();
    f.points = points;
    f.values = evaluate(handle, points, sensor_values);
    if (!analytic.empty()) attach_analytic(f, analytic);
    return f;
}

StateLayout state_layout(const SolutionHandle& h) {
    StateLayout layout;
    const auto orders = h.spec.orders();
    for (std::size_t l = 0; l < orders.size(); ++l)
        for (int k = 0; k < orders[l]; ++k) layout.rows.emplace_back(static_cast<int>(l), k);
    if (h.spec.problem == ProblemKind::PdeTx) layout.probes = h.sensor_locations;
    return layout;
}

SolutionField rollout(const Domain& window, const WindowOperator& op, const StateLayout& layout, Eigen::VectorXd state,
                      int n_steps, const RolloutOptions& options, const std::vector<std::string>& variables) {
    if (n_steps < 1) throw Error(ErrorCategory::Argument, "time-stepping needs at least one step");
    if (!window.has_time()) throw Error(ErrorCategory::Argument, "time-stepping needs a time axis");
    if (state.size() != layout.size()) throw Error(ErrorCategory::Argument, "state does not match its layout");
    const Eigen::MatrixXd local = grid(window, options.resolution);
    const double t0 = window.axis(0).lo;
    const double T = window.axis(0).length();

    // window-end probes and the keys needed to read the state there
    const bool spatial = !layout.probes.empty();
    const auto np = static_cast<Eigen::Index>(spatial ? layout.probes.size() : 1);
    Eigen::MatrixXd probes(static_cast<Eigen::Index>(window.dims()), np);
    probes.row(0).setConstant(window.axis(0).hi);
    if (spatial)
        for (Eigen::Index i = 0; i < np; ++i) probes(1, i) = layout.probes[static_cast<std::size_t>(i)];
    std::vector<DerivKey> req;
    for (const auto& [l, k] : layout.rows) req.push_back(repeated(0, k));
    const KeySet state_keys(req);

    std::vector<Eigen::Index> later;  // columns kept for windows after the first
    for (Eigen::Index j = 0; j < local.cols(); ++j)
        if (local(0, j) != t0) later.push_back(j);

    SolutionField field;
    field.axes = window.axis_names();
    field.variables = variables;
    const Eigen::Index total = local.cols() + static_cast<Eigen::Index>(later.size()) * (n_steps - 1);
    field.points.resize(local.rows(), total);
    field.values.resize(static_cast<Eigen::Index>(variables.size()), total);
    field.window.reserve(static_cast<std::size_t>(total));

    Eigen::Index col = 0;
    for (int w = 0; w < n_steps; ++w) {
        const Eigen::MatrixXd u = op(state, KeySet(), local);
        auto put = [&](Eigen::Index j) {
            field.points.col(col) = local.col(j);
            field.points(0, col) += static_cast<double>(w) * T;
            field.values.col(col) = u.col(j);
            field.window.push_back(w);
            ++col;
        };
        if (w == 0)
            for (Eigen::Index j = 0; j < local.cols(); ++j) put(j);
        else
            for (Eigen::Index j : later) put(j);
        if (w + 1 == n_steps) break;

        const Eigen::MatrixXd jets = op(state, state_keys, probes);
        Eigen::VectorXd next(state.size());
        for (std::size_t r = 0; r < layout.rows.size(); ++r) {
            const auto [l, k] = layout.rows[r];
            const int key = state_keys.index_of(repeated(0, k));
            next.segment(static_cast<Eigen::Index>(r) * np, np) = jets.block(l, key * np, 1, np).transpose();
        }
        state = std::move(next);
        const double lo = state.minCoeff(), hi = state.maxCoeff();
        if (lo < options.lo || hi > options.hi)
            field.warnings.push_back("window " + std::to_string(w + 1) + ": state range [" + format_double(lo) + ", " +
                                     format_double(hi) + "] leaves the trained sensor range [" +
                                     format_double(options.lo) + ", " + format_double(options.hi) + "]");
    }
    return field;
}

SolutionField time_step(const SolutionHandle& handle, int n_steps, const std::vector<int>& resolution,
                        const std::optional<Eigen::VectorXd>& initial_state) {
    const ProblemSpec& s = handle.spec;
    if (s.model != ModelKind::DeepOnet || !has_initial_data(s.problem))
        throw Error(ErrorCategory::Admissibility,
                    "time-stepping needs a DeepONet trained on an initial-value problem (got " + to_string(s.model) +
                        ", " + to_string(s.problem) + ")");
    if (n_steps < 1) throw Error(ErrorCategory::Argument, "time-stepping needs at least one step");
    RolloutOptions opt;
    opt.resolution = resolution;
    opt.lo = s.sensors->lo;
    opt.hi = s.sensors->hi;
    const WindowOperator op = [&](const Eigen::VectorXd& state, const KeySet& keys, const Eigen::MatrixXd& pts) {
        return evaluate_jets(handle, keys, pts, state);
    };
    return rollout(s.domain, op, state_layout(handle), initial_state ? *initial_state : default_sensor_values(handle),
                   n_steps, opt, s.variable_names());
}

}  // namespace pinnsolve
