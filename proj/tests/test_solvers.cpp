#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pinnsolve/errors.hpp"
#include "pinnsolve/solvers.hpp"

using namespace pinnsolve;
constexpr double kPi = std::numbers::pi;

namespace {

ProblemSpec poisson_spec() {
    ProblemSpec s;
    s.problem = ProblemKind::PdeXy;
    s.domain = Domain::spatial(-1, 1, -1, 1);
    s.equations = {"uxx + uyy + 2*pi^2*cos(pi*x)*sin(pi*y)"};
    BoundarySpec b;
    b.kind = BoundaryKind::Dirichlet;
    b.all_edges = "cos(pi*x)*sin(pi*y)";
    s.boundary = b;
    s.constraint = ConstraintMode::Hard;
    s.network = {2, 8};
    s.residual_points = 50;
    s.training.epochs = 0;
    return s;
}

ProblemSpec ode_system_spec() {
    ProblemSpec s;
    s.problem = ProblemKind::OdeSystemIvp;
    s.model = ModelKind::DeepOnet;
    s.domain = Domain::ode(0, 1);
    s.equations = {"utt + u", "vt + u"};
    s.initial = InitialSpec{{{"0.5", "1"}, {"2"}}, 1};
    SensorConfig sc;
    sc.family = SensorFamily::ScalarTuple;
    sc.lo = -3;
    sc.hi = 3;
    sc.samples = 20;
    s.sensors = sc;
    s.network = {2, 8};
    s.residual_points = 60;
    s.training.epochs = 0;
    return s;
}

/// Analytic solution operator of u'' + u = 0, v' + u = 0 over one window.
Eigen::MatrixXd ode_system_oracle(const Eigen::VectorXd& s, const KeySet& keys, const Eigen::MatrixXd& pts) {
    const Eigen::Index n = pts.cols();
    Eigen::MatrixXd out(2, static_cast<Eigen::Index>(keys.size()) * n);
    for (std::size_t k = 0; k < keys.size(); ++k) {
        const int m = static_cast<int>(keys.key(k).size());
        for (Eigen::Index j = 0; j < n; ++j) {
            const double t = pts(0, j);
            auto du = [&](int order) {
                return s[0] * std::cos(t + order * kPi / 2) + s[1] * std::sin(t + order * kPi / 2);
            };
            const auto c = static_cast<Eigen::Index>(k) * n + j;
            out(0, c) = du(m);
            out(1, c) = m == 0 ? s[2] - s[0] * std::sin(t) + s[1] * (std::cos(t) - 1.0) : -du(m - 1);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("grid ordering and shape") {
    const auto g = grid(Domain::evolution(0, 1, -1, 1), {3, 5});
    REQUIRE(g.cols() == 15);
    CHECK(g(0, 0) == 0.0);
    CHECK(g(1, 0) == -1.0);
    CHECK(g(1, 4) == 1.0);
    CHECK(g(0, 5) == 0.5);
    CHECK(g(0, 14) == 1.0);
    CHECK_THROWS_AS(grid(Domain::ode(0, 1), {2, 2}), Error);
}

TEST_CASE("spec diagnostics are exhaustive") {
    auto s = poisson_spec();
    CHECK(s.problems().empty());
    s.residual_points = 0;
    s.network.units = 0;
    const auto p = s.problems();
    REQUIRE(p.size() == 2);
    CHECK(p[0].message.find("residual_points") != std::string::npos);
    CHECK(p[1].message.find("network.units") != std::string::npos);
    CHECK_THROWS_AS(s.validate(), Error);

    auto neu = poisson_spec();
    neu.boundary->kind = BoundaryKind::Neumann;
    try {
        neu.validate();
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Admissibility);
    }
}

TEST_CASE("Poisson hard Dirichlet: boundary exact before training") {
    const auto h = solve(poisson_spec());
    Eigen::MatrixXd probes(2, 400);
    Rng rng(1, 0);
    for (int j = 0; j < 400; ++j) {
        const double r = rng.uniform(-1, 1);
        switch (j % 4) {
        case 0: probes.col(j) << -1.0, r; break;
        case 1: probes.col(j) << 1.0, r; break;
        case 2: probes.col(j) << r, -1.0; break;
        default: probes.col(j) << r, 1.0; break;
        }
    }
    const auto u = evaluate(h, probes);
    for (int j = 0; j < 400; ++j)
        CHECK(std::fabs(u(0, j) - std::cos(kPi * probes(0, j)) * std::sin(kPi * probes(1, j))) <= 1e-10);
}

TEST_CASE("hard initial condition reproduces u0 at t0") {
    ProblemSpec s;
    s.problem = ProblemKind::PdeTx;
    s.domain = Domain::evolution(0, 1, -1, 1);
    s.equations = {"ut + ux"};
    s.initial = InitialSpec{{{"cos(pi*x)"}}, 10};
    s.boundary = BoundarySpec{};
    s.constraint = ConstraintMode::Hard;
    s.network = {2, 6};
    s.residual_points = 40;
    s.training.epochs = 5;
    const auto h = solve(s);
    Eigen::MatrixXd g(2, 21);
    for (int j = 0; j < 21; ++j) g.col(j) << 0.0, -1.0 + 0.1 * j;
    const auto u = evaluate(h, g);
    for (Eigen::Index j = 0; j < g.cols(); ++j) CHECK(std::fabs(u(0, j) - std::cos(kPi * g(1, j))) <= 1e-12);
    CHECK(h.report.counters.initial == 0);
    CHECK(h.report.counters.boundary == 0);
    CHECK(h.report.counters.residual == 5);

    // periodic embedding: matching values at the two ends
    const auto e = grid(s.domain, {11, 2});
    const auto ue = evaluate(h, e);
    for (Eigen::Index j = 0; j < e.cols(); j += 2) CHECK(std::fabs(ue(0, j) - ue(0, j + 1)) <= 1e-9);
}

TEST_CASE("evaluate_error: MSE of a constant offset") {
    auto s = poisson_spec();
    s.constraint = ConstraintMode::Soft;
    auto h = solve(s);
    h.params.setZero();
    const auto g = grid(s.domain, {5, 5});
    CHECK(evaluate_error(h, {"0"}, g).mse() == 0.0);
    CHECK(evaluate_error(h, {"0.3"}, g).mse() == doctest::Approx(0.09).epsilon(1e-14));
    std::ostringstream csv;
    evaluate_error(h, {"0.3"}, g).write_csv(csv);
    const std::string text = csv.str();
    CHECK(text.rfind("x,y,u,u_exact,u_sqerr\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 26);
}

TEST_CASE("DeepONet handles") {
    const auto h = solve(ode_system_spec());
    CHECK(h.tuple_width == 3);
    const auto g = grid(h.spec.domain, {11});
    CHECK_THROWS_AS(evaluate(h, g), Error);
    const Eigen::VectorXd tuple = default_sensor_values(h);
    REQUIRE(tuple.size() == 3);
    CHECK(tuple[0] == 0.5);
    CHECK(tuple[1] == 1.0);
    CHECK(tuple[2] == 2.0);

    const auto u = evaluate(h, g, tuple);
    CHECK(u.rows() == 2);
    CHECK(u.allFinite());

    // one step equals plain evaluation on the training window
    const auto f = time_step(h, 1, {11});
    CHECK(f.values == u);
    CHECK(f.points == g);

    const auto f10 = time_step(h, 10, {11});
    CHECK(f10.size() == 11 + 9 * 10);
    CHECK(f10.points(0, f10.size() - 1) == doctest::Approx(10.0));
    for (Eigen::Index j = 1; j < f10.size(); ++j) CHECK(f10.points(0, j) > f10.points(0, j - 1));
    CHECK_THROWS_AS(time_step(h, 0, {11}), Error);

    const auto pinn = solve(poisson_spec());
    try {
        time_step(pinn, 2, {5, 5});
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Admissibility);
    }
}

TEST_CASE("rollout with the analytic operator reproduces the analytic solution") {
    SUBCASE("ODE system") {
        StateLayout layout{{{0, 0}, {0, 1}, {1, 0}}, {}};
        Eigen::VectorXd s0(3);
        s0 << 0.5, 1.0, 2.0;
        RolloutOptions opt;
        opt.resolution = {21};
        opt.lo = -3;
        opt.hi = 3;
        auto f = rollout(Domain::ode(0, 1), ode_system_oracle, layout, s0, 10, opt, {"u", "v"});
        attach_analytic(f, {"sin(t) + 0.5*cos(t)", "-0.5*sin(t) + cos(t) + 1"});
        CHECK(f.max_abs_error() <= 1e-12);
        CHECK(f.warnings.empty());
        CHECK(f.points(0, f.size() - 1) == doctest::Approx(10.0));
    }
    SUBCASE("heat") {
        const std::vector<double> probes = sensor_locations(0, 1, 16, false);
        const double nu = 0.1;
        WindowOperator op = [&](const Eigen::VectorXd& s, const KeySet& keys, const Eigen::MatrixXd& pts) {
            double num = 0, den = 0;
            for (std::size_t i = 0; i < probes.size(); ++i) {
                const double b = std::sin(kPi * probes[i]);
                num += b * s[static_cast<Eigen::Index>(i)];
                den += b * b;
            }
            const double a = num / den;
            const double rate = -nu * kPi * kPi;
            const Eigen::Index n = pts.cols();
            Eigen::MatrixXd out(1, static_cast<Eigen::Index>(keys.size()) * n);
            for (std::size_t k = 0; k < keys.size(); ++k) {
                const int m = static_cast<int>(keys.key(k).size());
                for (Eigen::Index j = 0; j < n; ++j)
                    out(0, static_cast<Eigen::Index>(k) * n + j) =
                        a * std::pow(rate, m) * std::exp(rate * pts(0, j)) * std::sin(kPi * pts(1, j));
            }
            return out;
        };
        Eigen::VectorXd s0(16);
        for (int i = 0; i < 16; ++i) s0[i] = std::sin(kPi * probes[static_cast<std::size_t>(i)]);
        RolloutOptions opt;
        opt.resolution = {11, 11};
        auto f = rollout(Domain::evolution(0, 1, 0, 1), op, StateLayout{{{0, 0}}, probes}, s0, 4, opt, {"u"});
        attach_analytic(f, {"exp(-0.1*pi^2*t)*sin(pi*x)"});
        CHECK(f.max_abs_error() <= 1e-12);
    }
    SUBCASE("zero operator") {
        WindowOperator op = [](const Eigen::VectorXd&, const KeySet& keys, const Eigen::MatrixXd& pts) {
            return Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(keys.size()) * pts.cols()).eval();
        };
        RolloutOptions opt;
        opt.resolution = {5};
        const auto f = rollout(Domain::ode(0, 2), op, StateLayout{{{0, 0}}, {}}, Eigen::VectorXd::Zero(1), 3, opt, {"u"});
        CHECK(f.values.isZero(0.0));
        CHECK(f.size() == 13);
    }
    SUBCASE("out-of-range states warn") {
        RolloutOptions opt;
        opt.resolution = {5};
        opt.lo = -0.1;
        opt.hi = 0.1;
        StateLayout layout{{{0, 0}, {0, 1}, {1, 0}}, {}};
        Eigen::VectorXd s0(3);
        s0 << 0.09, 0.09, 0.09;
        const auto f = rollout(Domain::ode(0, 1), ode_system_oracle, layout, s0, 3, opt, {"u", "v"});
        CHECK_FALSE(f.warnings.empty());
    }
}

TEST_CASE("solve trains a small ODE") {
    ProblemSpec s;
    s.problem = ProblemKind::OdeIvp;
    s.domain = Domain::ode(0, 1);
    s.equations = {"ut - cos(t)"};
    s.initial = InitialSpec{{{"0"}}, 1};
    s.network = {1, 10};
    s.residual_points = 50;
    s.training.epochs = 400;
    s.training.learning_rate = 1e-2;
    const auto h = solve(s);
    CHECK(h.report.final_loss() < 0.1 * h.report.composite.front());
    const auto f = evaluate_error(h, {"sin(t)"}, grid(s.domain, {21}));
    CHECK(f.mse() < 1e-3);
}
