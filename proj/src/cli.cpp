#include "pinnsolve/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <bit>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "pinnsolve/coord_function.hpp"
#include "pinnsolve/expression.hpp"

namespace pinnsolve::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string_view s) {
    std::string t = trim(s);
    if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front())
        t = t.substr(1, t.size() - 2);
    return t;
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(unquote(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

struct ProblemAlias {
    const char* name;
    ProblemKind problem;
    ModelKind model;
};

constexpr ProblemAlias kAliases[] = {
    {"solveODE_IVP", ProblemKind::OdeIvp, ModelKind::Pinn},
    {"solveODE_DeepONet_IVP", ProblemKind::OdeIvp, ModelKind::DeepOnet},
    {"solveODE_BVP", ProblemKind::OdeBvp, ModelKind::Pinn},
    {"solveODE_DeepONet_BVP", ProblemKind::OdeBvp, ModelKind::DeepOnet},
    {"solveODE_System_IVP", ProblemKind::OdeSystemIvp, ModelKind::Pinn},
    {"solveODE_DeepONetSystem_IVP", ProblemKind::OdeSystemIvp, ModelKind::DeepOnet},
    {"solvePDE_tx", ProblemKind::PdeTx, ModelKind::Pinn},
    {"solvePDE_DeepONet_tx", ProblemKind::PdeTx, ModelKind::DeepOnet},
    {"solvePDE_xy", ProblemKind::PdeXy, ModelKind::Pinn},
    {"solvePDE_DeepONet_xy", ProblemKind::PdeXy, ModelKind::DeepOnet},
};

// One INI section. Remembers which keys were read so leftovers can be reported.
class Section {
public:
    Section(std::string name, const pt::ptree* tree, std::vector<Issue>& issues)
        : name_(std::move(name)), tree_(tree), issues_(issues) {}

    bool present() const { return tree_ != nullptr; }
    bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        const auto it = tree_->find(key);
        if (it == tree_->not_found()) return std::nullopt;
        return it->second.data();
    }

    std::optional<std::string> text(const std::string& key) {
        auto r = raw(key);
        if (!r) return r;
        return unquote(*r);
    }

    template <class T>
    void number(const std::string& key, T& dst) {
        auto r = text(key);
        if (!r) return;
        if (auto v = to_number<T>(key, *r)) dst = *v;
    }

    template <class T>
    std::vector<T> numbers(const std::string& key) {
        std::vector<T> out;
        auto r = raw(key);
        if (!r) return out;
        for (const auto& item : split(*r, ',')) {
            auto v = to_number<T>(key, item);
            if (!v) return {};
            out.push_back(*v);
        }
        return out;
    }

    void error(const std::string& key, const std::string& what, ErrorCategory c = ErrorCategory::Config) {
        issues_.push_back({c, name_ + "." + key + ": " + what});
    }

    std::size_t issue_count() const { return issues_.size(); }

    void report_unknown() {
        if (!tree_) return;
        for (const auto& [key, value] : *tree_)
            if (!used_.contains(key)) error(key, "unknown key");
    }

private:
    template <class T>
    std::optional<T> to_number(const std::string& key, const std::string& s) {
        std::istringstream in(s);
        in.imbue(std::locale::classic());
        T v{};
        if constexpr (std::is_unsigned_v<T>) {
            if (!s.empty() && s[0] == '-') {
                error(key, "expected a nonnegative integer (got '" + s + "')");
                return std::nullopt;
            }
        }
        in >> v;
        if (s.empty() || in.fail() || !(in >> std::ws).eof()) {
            error(key, std::string("expected ") + (std::is_integral_v<T> ? "an integer" : "a number") + " (got '" +
                           s + "')");
            return std::nullopt;
        }
        return v;
    }

    std::string name_;
    const pt::ptree* tree_;
    std::vector<Issue>& issues_;
    std::set<std::string> used_;
};

const std::set<std::string> kSections = {"problem", "domain",   "initial", "boundary",
                                         "network", "sensors", "training", "output"};

bool is_ode(ProblemKind k) {
    return k == ProblemKind::OdeIvp || k == ProblemKind::OdeBvp || k == ProblemKind::OdeSystemIvp;
}

Domain build_domain(ProblemKind kind, Section& sec, bool& ok) {
    auto interval = [&](const char* axis) -> std::pair<double, double> {
        if (!sec.has(axis)) {
            sec.error(axis, "required (lo, hi)");
            ok = false;
            return {0.0, 1.0};
        }
        const std::size_t before = sec.issue_count();
        const auto v = sec.numbers<double>(axis);
        if (sec.issue_count() != before) {
            ok = false;
        } else if (v.size() != 2) {
            sec.error(axis, "expected two numbers 'lo, hi'");
            ok = false;
        } else if (!(v[1] > v[0])) {
            sec.error(axis, "needs lo < hi");
            ok = false;
        } else {
            return {v[0], v[1]};
        }
        return {0.0, 1.0};
    };
    if (is_ode(kind)) {
        const auto [t0, tf] = interval("t");
        return Domain::ode(t0, tf);
    }
    if (kind == ProblemKind::PdeTx) {
        const auto [t0, tf] = interval("t");
        const auto [xl, xr] = interval("x");
        return Domain::evolution(t0, tf, xl, xr);
    }
    const auto [xl, xr] = interval("x");
    const auto [yl, yu] = interval("y");
    return Domain::spatial(xl, xr, yl, yu);
}

void report_expression(std::vector<Issue>& issues, const std::string& where, const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        issues.push_back({e.category(), where + ": " + e.what()});
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCategory::Config, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorCategory::Config, "failed writing " + path.string());
}

std::string arch_line(const char* name, const MlpArchitecture& a) {
    return std::string(name) + " " + std::to_string(a.inputs) + " " + std::to_string(a.layers) + " " +
           std::to_string(a.units) + " " + std::to_string(a.outputs) + "\n";
}

std::string model_header(const SolutionHandle& h) {
    const NetworkParams& n = h.model.net;
    std::string s = "pinnsolve-model 1\n";
    s += "problem " + to_string(h.spec.problem) + "\n";
    s += "model " + to_string(n.kind) + "\n";
    if (n.kind == ModelKind::Pinn) {
        s += arch_line("mlp", n.mlp);
    } else {
        s += arch_line("branch", n.onet.branch);
        s += arch_line("trunk", n.onet.trunk);
        s += "p " + std::to_string(n.onet.p) + "\n";
    }
    s += "count " + std::to_string(h.params.size()) + "\n";
    s += "format float64-le\n";
    s += "end\n";
    return s;
}

bool has_non_finite(const Eigen::MatrixXd& m) { return !m.allFinite(); }

std::filesystem::path prepare_out(const RunConfig& c) {
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw Error(ErrorCategory::Config, "cannot create output directory " + c.out_dir.string());
    return c.out_dir;
}

std::string loss_csv(const TrainReport& r) {
    std::ostringstream s;
    r.write_csv(s);
    return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------

int exit_code(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::Config:
    case ErrorCategory::Argument: return kConfig;
    case ErrorCategory::Parse: return kParse;
    case ErrorCategory::Admissibility: return kAdmissibility;
    case ErrorCategory::Divergence: return kDivergence;
    case ErrorCategory::Domain: return kOther;
    }
    return kOther;
}

std::vector<int> RunConfig::grid_resolution() const {
    if (!resolution.empty()) return resolution;
    return std::vector<int>(spec.domain.dims(), 101);
}

std::vector<int> RunConfig::window_resolution() const {
    return timestep_resolution.empty() ? grid_resolution() : timestep_resolution;
}

Loaded parse_config(std::string_view text) {
    Loaded out;
    RunConfig& c = out.config;
    auto& issues = out.issues;
    c.source = std::string(text);

    pt::ptree tree;
    try {
        std::istringstream in{std::string(text)};
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        issues.push_back({ErrorCategory::Config, "config: " + e.message() + " (line " + std::to_string(e.line()) + ")"});
        return out;
    }
    for (const auto& [name, sub] : tree) {
        if (!kSections.contains(name))
            issues.push_back({ErrorCategory::Config, "config: unknown section [" + name + "]"});
        else if (sub.empty() && !sub.data().empty())
            issues.push_back({ErrorCategory::Config, "config: key '" + name + "' outside a section"});
    }
    auto section = [&](const std::string& name) {
        const auto it = tree.find(name);
        return Section(name, it == tree.not_found() ? nullptr : &it->second, issues);
    };

    ProblemSpec& s = c.spec;
    bool structural = true;  // false when a field needed by later checks is unusable

    // [problem]
    Section problem = section("problem");
    if (!problem.present()) {
        issues.push_back({ErrorCategory::Config, "config: missing section [problem]"});
        structural = false;
    }
    std::optional<ProblemKind> kind;
    std::optional<ModelKind> model;
    if (auto v = problem.text("solver")) {
        const auto* a = std::find_if(std::begin(kAliases), std::end(kAliases),
                                     [&](const ProblemAlias& p) { return *v == p.name; });
        if (a == std::end(kAliases)) {
            problem.error("solver", "unknown solver '" + *v + "'");
            structural = false;
        } else {
            kind = a->problem;
            model = a->model;
        }
    }
    if (auto v = problem.text("kind")) {
        std::optional<ProblemKind> k;
        for (auto p : {ProblemKind::OdeIvp, ProblemKind::OdeBvp, ProblemKind::OdeSystemIvp, ProblemKind::PdeTx,
                       ProblemKind::PdeXy})
            if (*v == to_string(p)) k = p;
        if (!k) {
            problem.error("kind", "expected ode-ivp, ode-bvp, ode-system-ivp, pde-tx or pde-xy (got '" + *v + "')");
            structural = false;
        } else if (kind && *kind != *k) {
            problem.error("kind", "conflicts with problem.solver");
        } else {
            kind = k;
        }
    }
    if (auto v = problem.text("model")) {
        std::optional<ModelKind> m;
        if (*v == "pinn") m = ModelKind::Pinn;
        if (*v == "deeponet") m = ModelKind::DeepOnet;
        if (!m)
            problem.error("model", "expected pinn or deeponet (got '" + *v + "')");
        else if (model && *model != *m)
            problem.error("model", "conflicts with problem.solver");
        else
            model = m;
    }
    if (!kind && problem.present()) {
        problem.error("kind", "required (or give problem.solver)");
        structural = false;
    }
    s.problem = kind.value_or(ProblemKind::PdeTx);
    s.model = model.value_or(ModelKind::Pinn);
    if (auto v = problem.raw("equations")) s.equations = split(*v, ';');
    if (auto v = problem.raw("variables")) s.variables = split(*v, ',');
    if (auto v = problem.text("constraint")) {
        if (*v == "soft")
            s.constraint = ConstraintMode::Soft;
        else if (*v == "hard")
            s.constraint = ConstraintMode::Hard;
        else
            problem.error("constraint", "expected soft or hard (got '" + *v + "')");
    }
    if (auto v = problem.text("forcing")) s.forcing = *v;
    problem.report_unknown();

    // [domain]
    Section domain = section("domain");
    if (!domain.present() && structural) issues.push_back({ErrorCategory::Config, "config: missing section [domain]"});
    bool domain_ok = true;
    if (structural) s.domain = build_domain(s.problem, domain, domain_ok);
    domain.number("residual_points", s.residual_points);
    domain.number("points_per_function", s.points_per_function);
    domain.report_unknown();

    std::vector<std::string> names;
    try {
        names = s.variable_names();
    } catch (const Error& e) {
        issues.push_back({ErrorCategory::Config, std::string("problem.variables: ") + e.what()});
    }

    // [initial]
    Section initial = section("initial");
    if (initial.present()) {
        InitialSpec init;
        initial.number("points", init.points);
        for (const auto& name : names) {
            auto v = initial.raw(name);
            init.conditions.push_back(v ? split(*v, ';') : std::vector<std::string>{});
            if (!v) initial.error(name, "missing initial condition for variable " + name);
        }
        s.initial = init;
    }
    initial.report_unknown();

    // [boundary]
    Section boundary = section("boundary");
    if (boundary.present()) {
        BoundarySpec b;
        b.kind = is_ode(s.problem) ? BoundaryKind::Dirichlet : BoundaryKind::Periodic;
        if (auto v = boundary.text("type")) {
            if (*v == "periodic")
                b.kind = BoundaryKind::Periodic;
            else if (*v == "dirichlet")
                b.kind = BoundaryKind::Dirichlet;
            else if (*v == "neumann")
                b.kind = BoundaryKind::Neumann;
            else
                boundary.error("type", "expected periodic, dirichlet or neumann (got '" + *v + "')");
        }
        boundary.number("points", b.points);
        if (auto v = boundary.text("all")) b.all_edges = *v;
        for (Edge e : {Edge::T0, Edge::TF, Edge::XL, Edge::XR, Edge::YL, Edge::YU})
            if (auto v = boundary.text(edge_name(e))) b.edges[e] = *v;
        s.boundary = b;
    }
    boundary.report_unknown();

    // [network]
    Section network = section("network");
    network.number("layers", s.network.layers);
    network.number("units", s.network.units);
    network.number("branch_layers", s.network.branch_layers);
    network.number("branch_units", s.network.branch_units);
    network.number("p", s.network.p);
    network.report_unknown();

    // [training]
    Section training = section("training");
    TrainConfig& t = s.training;
    training.number("epochs", t.epochs);
    training.number("learning_rate", t.learning_rate);
    training.number("beta1", t.beta1);
    training.number("beta2", t.beta2);
    training.number("epsilon", t.epsilon);
    training.number("seed", t.seed);
    training.number("initial_weight", t.weights.initial);
    training.number("boundary_weight", t.weights.boundary);
    training.number("chunk", t.chunk);
    training.number("threads", t.threads);
    training.report_unknown();

    // [sensors]
    Section sensors = section("sensors");
    if (sensors.present()) {
        SensorConfig sc;
        sc.family = is_ode(s.problem) ? SensorFamily::ScalarTuple : SensorFamily::TruncatedFourier;
        sc.seed = t.seed;
        sensors.number("count", sc.sensors);
        sensors.number("samples", sc.samples);
        sensors.number("lo", sc.lo);
        sensors.number("hi", sc.hi);
        sensors.number("modes", sc.modes);
        if (sensors.has("seed")) {
            sensors.number("seed", sc.seed);
            c.sensor_seed_explicit = true;
        }
        s.sensors = sc;
    }
    sensors.report_unknown();

    // [output]
    Section output = section("output");
    if (auto v = output.text("directory")) c.out_dir = *v;
    if (output.has("resolution")) c.resolution = output.numbers<int>("resolution");
    if (auto v = output.raw("analytic")) c.analytic = split(*v, ';');
    output.number("steps", c.steps);
    if (output.has("timestep_resolution")) c.timestep_resolution = output.numbers<int>("timestep_resolution");
    output.report_unknown();

    if (structural && domain_ok) {
        auto more = check(c);
        issues.insert(issues.end(), more.begin(), more.end());
    }
    // admissibility last, so the exit code reflects everything else first
    std::stable_partition(issues.begin(), issues.end(),
                          [](const Issue& i) { return i.category != ErrorCategory::Admissibility; });
    return out;
}

Loaded load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Loaded out;
        out.issues.push_back({ErrorCategory::Config, "config: cannot read " + path.string()});
        return out;
    }
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str());
}

std::vector<Issue> check(const RunConfig& c) {
    const ProblemSpec& s = c.spec;
    std::vector<Issue> issues = s.problems();
    const auto axes = s.domain.axis_names();
    const std::size_t dims = s.domain.dims();

    auto check_resolution = [&](const char* key, const std::vector<int>& r) {
        if (r.empty()) return;
        if (r.size() != dims)
            issues.push_back({ErrorCategory::Config, std::string("output.") + key + ": expected " +
                                                         std::to_string(dims) + " values (got " +
                                                         std::to_string(r.size()) + ")"});
        for (int v : r)
            if (v < 2) {
                issues.push_back({ErrorCategory::Config, std::string("output.") + key +
                                                             ": every entry must be at least 2 (got " +
                                                             std::to_string(v) + ")"});
                break;
            }
    };
    check_resolution("resolution", c.resolution);
    check_resolution("timestep_resolution", c.timestep_resolution);
    if (c.steps < 1)
        issues.push_back({ErrorCategory::Config, "output.steps: must be at least 1 (got " + std::to_string(c.steps) + ")"});

    bool vars_ok = true;
    try {
        s.var_config().validate();
    } catch (const Error&) {
        vars_ok = false;  // already reported by problems()
    }
    if (vars_ok) {
        const auto vc = s.var_config();
        for (std::size_t i = 0; i < s.equations.size(); ++i)
            report_expression(issues, "problem.equations[" + std::to_string(i + 1) + "]",
                              [&] { expr::parse(expr::normalize_source(s.equations[i]), vc); });
    }
    auto coord = [&](const std::string& where, const std::string& src, const std::vector<std::string>& over) {
        report_expression(issues, where, [&] { CoordFunction::parse(expr::normalize_source(src), over); });
    };
    if (s.initial) {
        const auto names = vars_ok ? s.variable_names() : std::vector<std::string>{};
        for (std::size_t l = 0; l < s.initial->conditions.size(); ++l)
            for (std::size_t k = 0; k < s.initial->conditions[l].size(); ++k)
                coord("initial." + (l < names.size() ? names[l] : std::to_string(l)) + "[" + std::to_string(k) + "]",
                      s.initial->conditions[l][k], axes);
    }
    if (s.boundary) {
        if (s.boundary->all_edges) coord("boundary.all", *s.boundary->all_edges, axes);
        for (const auto& [e, src] : s.boundary->edges) coord("boundary." + edge_name(e), src, axes);
    }
    if (s.model == ModelKind::DeepOnet && s.problem == ProblemKind::PdeXy) coord("problem.forcing", s.forcing, {"x"});
    if (!c.analytic.empty()) {
        if (vars_ok && c.analytic.size() != s.variable_names().size())
            issues.push_back({ErrorCategory::Config, "output.analytic: " + std::to_string(c.analytic.size()) +
                                                         " expressions for " +
                                                         std::to_string(s.variable_names().size()) + " variables"});
        for (std::size_t l = 0; l < c.analytic.size(); ++l)
            coord("output.analytic[" + std::to_string(l + 1) + "]", c.analytic[l], axes);
    }
    std::stable_partition(issues.begin(), issues.end(),
                          [](const Issue& i) { return i.category != ErrorCategory::Admissibility; });
    return issues;
}

// ---------------------------------------------------------------------------

void save_model(const std::filesystem::path& path, const SolutionHandle& h) {
    std::string bytes = model_header(h);
    const std::size_t off = bytes.size();
    bytes.resize(off + static_cast<std::size_t>(h.params.size()) * 8);
    for (Eigen::Index i = 0; i < h.params.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(h.params[i]);
        for (int b = 0; b < 8; ++b) bytes[off + static_cast<std::size_t>(i) * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    }
    write_file(path, bytes);
}

void load_model(const std::filesystem::path& path, SolutionHandle& h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCategory::Config, "cannot read model file " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    const std::string bytes = s.str();
    const std::string expected = model_header(h);
    if (bytes.compare(0, expected.size(), expected) != 0)
        throw Error(ErrorCategory::Config, "model file " + path.string() + " does not match the configured architecture");
    const std::size_t n = static_cast<std::size_t>(h.params.size());
    if (bytes.size() != expected.size() + 8 * n)
        throw Error(ErrorCategory::Config, "model file " + path.string() + " has the wrong length");
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[expected.size() + i * 8 + b])) << (8 * b);
        h.params[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(bits);
    }
    h.report.params = h.params;
}

void apply(RunConfig& c, const Overrides& o) {
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.steps) c.steps = *o.steps;
    if (o.seed) {
        c.spec.training.seed = *o.seed;
        if (c.spec.sensors && !c.sensor_seed_explicit) c.spec.sensors->seed = *o.seed;
    }
}

void run(const RunConfig& c, std::ostream& log) {
    const ProblemSpec& s = c.spec;
    const auto dir = prepare_out(c);
    const auto t0 = std::chrono::steady_clock::now();
    SolutionHandle h = solve(s);
    const double train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const Eigen::MatrixXd points = grid(s.domain, c.grid_resolution());
    std::optional<Eigen::VectorXd> branch;
    if (s.model == ModelKind::DeepOnet) branch = default_sensor_values(h);
    SolutionField field = evaluate_error(h, c.analytic, points, branch);
    if (has_non_finite(field.values)) throw Error(ErrorCategory::Divergence, "prediction contains non-finite values");

    std::ostringstream csv;
    field.write_csv(csv);
    write_file(dir / "solution.csv", csv.str());
    write_file(dir / "loss.csv", loss_csv(h.report));
    save_model(dir / "model.bin", h);

    const TrainReport& r = h.report;
    std::ostringstream rep;
    rep << "problem: " << to_string(s.problem) << "\n";
    rep << "model: " << to_string(s.model) << "\n";
    rep << "constraint: " << to_string(s.constraint) << "\n";
    rep << "seed: " << s.training.seed << "\n";
    rep << "epochs: " << r.composite.size() << "\n";
    rep << "parameters: " << h.params.size() << "\n";
    rep << "final_loss: " << fmt(r.final_loss()) << "\n";
    if (!r.composite.empty()) {
        rep << "final_residual_loss: " << fmt(r.residual.back()) << "\n";
        rep << "final_initial_loss: " << fmt(r.initial.back()) << "\n";
        rep << "final_boundary_loss: " << fmt(r.boundary.back()) << "\n";
    }
    rep << "grid_points: " << field.size() << "\n";
    if (field.analytic) {
        rep << "mse: " << fmt(field.mse()) << "\n";
        rep << "max_abs_error: " << fmt(field.max_abs_error()) << "\n";
    }
    rep << "runtime_seconds: " << fmt(train_seconds) << "\n";
    rep << "\n[config]\n" << c.source;
    if (!c.source.empty() && c.source.back() != '\n') rep << "\n";
    write_file(dir / "report.txt", rep.str());

    log << "trained " << r.composite.size() << " epochs in " << fmt(train_seconds) << " s, final loss "
        << fmt(r.final_loss()) << "\n";
    if (field.analytic) log << "mse " << fmt(field.mse()) << "\n";
    log << "wrote " << (dir / "solution.csv").string() << "\n";
}

void timestep(const RunConfig& c, const std::optional<std::filesystem::path>& model, std::ostream& log) {
    const ProblemSpec& s = c.spec;
    if (c.steps < 1) throw Error(ErrorCategory::Argument, "steps must be at least 1 (got " + std::to_string(c.steps) + ")");
    if (s.model != ModelKind::DeepOnet)
        throw Error(ErrorCategory::Admissibility, "time-stepping needs a deeponet model (configured: pinn)");
    if (s.problem == ProblemKind::OdeBvp || s.problem == ProblemKind::PdeXy)
        throw Error(ErrorCategory::Admissibility, "time-stepping needs an initial-value problem (configured: " +
                                                      to_string(s.problem) + ")");
    const auto dir = prepare_out(c);
    SolutionHandle h;
    if (model) {
        h = prepare(s);
        load_model(*model, h);
        log << "loaded " << model->string() << "\n";
    } else {
        h = solve(s);
        write_file(dir / "loss.csv", loss_csv(h.report));
        save_model(dir / "model.bin", h);
        log << "trained " << h.report.composite.size() << " epochs, final loss " << fmt(h.report.final_loss()) << "\n";
    }
    SolutionField field = time_step(h, c.steps, c.window_resolution());
    if (!c.analytic.empty()) attach_analytic(field, c.analytic);
    if (has_non_finite(field.values)) throw Error(ErrorCategory::Divergence, "rollout produced non-finite values");

    std::ostringstream csv;
    field.write_csv(csv);
    write_file(dir / "timestep_solution.csv", csv.str());

    std::ostringstream rep;
    rep << "steps: " << c.steps << "\n";
    rep << "points: " << field.size() << "\n";
    if (field.analytic) {
        rep << "mse: " << fmt(field.mse()) << "\n";
        rep << "max_abs_error: " << fmt(field.max_abs_error()) << "\n";
        rep << "window,mse,max_abs_error\n";
        for (int w = 0; w < c.steps; ++w) {
            double sq = 0, mx = 0;
            Eigen::Index count = 0;
            for (Eigen::Index j = 0; j < field.size(); ++j) {
                if (field.window[static_cast<std::size_t>(j)] != w) continue;
                const auto d = (field.values.col(j) - field.analytic->col(j)).array().abs();
                sq += d.square().sum();
                mx = std::max(mx, d.maxCoeff());
                count += d.size();
            }
            rep << w << "," << fmt(count ? sq / static_cast<double>(count) : 0.0) << "," << fmt(mx) << "\n";
        }
    }
    for (const auto& w : field.warnings) rep << "warning: " << w << "\n";
    write_file(dir / "timestep_report.txt", rep.str());
    for (const auto& w : field.warnings) log << "warning: " << w << "\n";
    if (field.analytic) log << "rollout mse " << fmt(field.mse()) << ", max abs error " << fmt(field.max_abs_error()) << "\n";
    log << "wrote " << (dir / "timestep_solution.csv").string() << "\n";
}

// ---------------------------------------------------------------------------

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Neural solvers for ODE and PDE problems on rectangular domains", "pinnsolve"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int steps = 0;
    std::string model_path;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", config_path, "problem config file")->required();
        sub->add_option("--out,-o", out_dir, "output directory (overrides [output] directory)");
        sub->add_option("--seed", seed, "training seed (overrides [training] seed)");
    };
    CLI::App* run_cmd = app.add_subcommand("run", "train and write solution.csv, loss.csv, report.txt");
    common(run_cmd);
    CLI::App* validate_cmd = app.add_subcommand("validate", "check a config without training");
    validate_cmd->add_option("--config,-c", config_path, "problem config file")->required();
    CLI::App* ts_cmd = app.add_subcommand("timestep", "train (or load) a DeepONet and roll it out");
    common(ts_cmd);
    ts_cmd->add_option("--steps,-n", steps, "number of windows (overrides [output] steps)");
    ts_cmd->add_option("--model", model_path, "reuse a model.bin written by run");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfig;
    }

    Loaded loaded = load_config(config_path);
    if (validate_cmd->parsed()) {
        for (const auto& i : loaded.issues) out << "error[" << exit_code(i.category) << "]: " << i.message << "\n";
        out << loaded.issues.size() << (loaded.issues.size() == 1 ? " issue" : " issues") << "\n";
        return loaded.issues.empty() ? kOk : exit_code(loaded.issues.front().category);
    }
    if (!loaded.issues.empty()) {
        for (const auto& i : loaded.issues) err << "error: " << i.message << "\n";
        return exit_code(loaded.issues.front().category);
    }
    RunConfig& c = loaded.config;
    Overrides o;
    if (!out_dir.empty()) o.out_dir = out_dir;
    if (run_cmd->count("--seed") || ts_cmd->count("--seed")) o.seed = seed;
    if (ts_cmd->count("--steps")) o.steps = steps;
    apply(c, o);

    try {
        if (run_cmd->parsed()) {
            run(c, out);
        } else {
            std::optional<std::filesystem::path> model;
            if (!model_path.empty()) model = model_path;
            timestep(c, model, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOk;
}

}  // namespace pinnsolve::cli
