#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinnsolve/errors.hpp"
#include "pinnsolve/models.hpp"
#include "test_util.hpp"

using namespace pinnsolve;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<double> concat(std::span<const double> a, const Eigen::VectorXd& b) {
    std::vector<double> v(a.begin(), a.end());
    v.insert(v.end(), b.data(), b.data() + b.size());
    return v;
}

Eigen::VectorXd random_params(std::size_t n, Rng& rng, double scale = 0.8) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = rng.uniform(-scale, scale);
    return v;
}

}  // namespace

TEST_CASE("architecture parameter counts") {
    MlpArchitecture tiny{1, 1, 1, 1};
    CHECK(tiny.param_count() == 4);
    MlpArchitecture big{2, 4, 60, 1};
    CHECK(big.param_count() == 2 * 60 + 60 + 3 * (60 * 60 + 60) + 60 + 1);
    CHECK_THROWS_AS((MlpArchitecture{1, 0, 4, 1}.validate()), Error);
    DeepOnetArchitecture bad{{3, 2, 8, 8}, {1, 2, 8, 4}, 4, 2};
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("init_params: Glorot bounds and determinism") {
    const MlpArchitecture tiny{1, 1, 1, 1};
    const auto p = init_params(tiny, 42);
    REQUIRE(p.values.size() == 4);
    // layout: W1, b1, W2, b2
    CHECK(std::fabs(p.values[0]) <= std::sqrt(3.0));
    CHECK(std::fabs(p.values[2]) <= std::sqrt(3.0));
    CHECK(p.values[1] == 0.0);
    CHECK(p.values[3] == 0.0);
    CHECK(init_params(tiny, 42).values == p.values);
    CHECK(init_params(tiny, 43).values != p.values);

    const MlpArchitecture wide{2, 4, 60, 1};
    const auto q = init_params(wide, 1);
    const double bound = std::sqrt(6.0 / 120.0);
    // second hidden layer weights start after the first layer (2*60 + 60)
    CHECK(q.values.segment(180, 3600).cwiseAbs().maxCoeff() <= bound);
    CHECK(q.values.segment(180 + 3600, 60).isZero(0.0));
}

TEST_CASE("mlp_forward: trivial nets") {
    const MlpArchitecture arch{2, 2, 5, 1};
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.param_count()));
    const double pt[] = {0.3, -2.0};
    CHECK(mlp_forward(arch, zero, pt)[0] == 0.0);

    const MlpArchitecture unit{1, 1, 1, 1};
    Eigen::VectorXd w(4);
    w << 1.0, 0.0, 1.0, 0.0;
    const double origin[] = {0.0};
    CHECK(mlp_forward(unit, w, origin)[0] == 0.0);
    const double half[] = {0.5};
    CHECK(mlp_forward(unit, w, half)[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
}

TEST_CASE("mlp_tape: input derivative matches finite differences") {
    Rng rng(3, 0);
    const MlpArchitecture arch{2, 2, 8, 1};
    const auto params = random_params(arch.param_count(), rng);
    const auto tape = mlp_tape(arch);
    const auto dx = ad::derive(tape, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const double pt[] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double h = 1e-5;
        const double plus[] = {pt[0], pt[1] + h}, minus[] = {pt[0], pt[1] - h};
        const double fd = (mlp_forward(arch, params, plus)[0] - mlp_forward(arch, params, minus)[0]) / (2 * h);
        CHECK(testutil::rel_err(ad::evaluate(dx, concat(pt, params)), fd) <= 1e-5);
        CHECK(std::fabs(ad::evaluate(tape, concat(pt, params)) - mlp_forward(arch, params, pt)[0]) <= 1e-14);
    }
}

TEST_CASE("deeponet_forward: dot product of sub-networks") {
    Rng rng(4, 0);
    DeepOnetArchitecture arch{{5, 2, 7, 10}, {2, 2, 7, 10}, 10, 1};
    auto params = random_params(arch.param_count(), rng);
    const double sensors[] = {0.1, -0.2, 0.3, 0.4, -0.5};
    const double pt[] = {0.25, 0.75};
    const auto nb = static_cast<Eigen::Index>(arch.branch.param_count());
    const auto b = mlp_forward(arch.branch, params.head(nb).eval(), sensors);
    const auto t = mlp_forward(arch.trunk, params.tail(params.size() - nb).eval(), pt);
    double dot = 0.0;
    for (std::size_t k = 0; k < 10; ++k) dot += b[k] * t[k];
    CHECK(std::fabs(deeponet_forward(arch, params, sensors, pt)[0] - dot) <= 1e-12);

    // scalar tape agrees
    auto leaves = std::vector<double>(sensors, sensors + 5);
    leaves.insert(leaves.end(), pt, pt + 2);
    const auto tape = deeponet_tape(arch);
    CHECK(std::fabs(ad::evaluate(tape, concat(leaves, params)) - dot) <= 1e-12);

    // zero branch output
    auto zeroed = params;
    const std::size_t last_branch = arch.branch.param_count() - (7 + 1) * 10;
    zeroed.segment(static_cast<Eigen::Index>(last_branch), (7 + 1) * 10).setZero();
    CHECK(deeponet_forward(arch, zeroed, sensors, pt)[0] == 0.0);

    // bilinearity: scaling branch output weights scales the output
    auto scaled = params;
    scaled.segment(static_cast<Eigen::Index>(last_branch), (7 + 1) * 10) *= 3.0;
    CHECK(deeponet_forward(arch, scaled, sensors, pt)[0] == doctest::Approx(3.0 * dot).epsilon(1e-12));
}

TEST_CASE("deeponet_forward: p = 1 constant sub-networks") {
    DeepOnetArchitecture arch{{1, 1, 1, 1}, {1, 1, 1, 1}, 1, 1};
    Eigen::VectorXd p = Eigen::VectorXd::Zero(8);
    p[3] = 2.0;  // branch output bias
    p[7] = 3.0;  // trunk output bias
    const double s[] = {0.7}, x[] = {-0.4};
    CHECK(deeponet_forward(arch, p, s, x)[0] == 6.0);
}

TEST_CASE("periodic_embed") {
    const auto l = periodic_embed(-1.0, -1.0, 1.0);
    const auto r = periodic_embed(1.0, -1.0, 1.0);
    CHECK(std::fabs(l.first - r.first) <= 1e-12);
    CHECK(std::fabs(l.second - r.second) <= 1e-12);
    // theta = 2 pi x / (xr - xl) without shift: a quarter period past xl = -1 is
    // x = -0.5, theta = -pi/2.
    const auto q = periodic_embed(-0.5, -1.0, 1.0);
    CHECK(std::fabs(q.first) <= 1e-15);
    CHECK(q.second == doctest::Approx(-1.0));
    const auto q2 = periodic_embed(1.0, 0.0, 4.0);
    CHECK(std::fabs(q2.first) <= 1e-15);
    CHECK(q2.second == doctest::Approx(1.0));
    Rng rng(1, 0);
    for (int i = 0; i < 100; ++i) {
        const auto e = periodic_embed(rng.uniform(-10, 10), -1, 1);
        CHECK(std::fabs(e.first * e.first + e.second * e.second - 1.0) <= 1e-15);
    }
}

TEST_CASE("JetMlp matches the scalar tape") {
    Rng rng(9, 0);
    const Domain domain = Domain::evolution(0, 1, -1, 1);
    const Featurizer feat(domain, {false, true});
    const MlpArchitecture arch{feat.width(), 2, 6, 2};
    const auto params = random_params(arch.param_count(), rng);
    const std::vector<DerivKey> req{{0}, {1, 1}, {0, 1}, {1, 1, 1}};
    const KeySet keys(req);
    const Eigen::Index n = 7;
    Eigen::MatrixXd pts(2, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        pts(0, j) = rng.uniform(0, 1);
        pts(1, j) = rng.uniform(-1, 1);
    }
    JetMlp net(arch, keys);
    JetMlp::Cache cache;
    const Eigen::MatrixXd out = net.forward(params.data(), feat.jet(keys, pts), n, &cache);

    // scalar reference: coordinates -> features -> network
    ad::TapeBuilder b;
    std::vector<ad::Var> coords{b.input(), b.input()};
    std::vector<ad::Var> pv;
    for (Eigen::Index i = 0; i < params.size(); ++i) pv.push_back(b.parameter());
    const auto outs = mlp_forward(arch, pv, feat.build(coords));

    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(keys.size()) * n);
    for (auto& w : weights.reshaped()) w = rng.uniform(-1, 1);
    Eigen::VectorXd expected_grad = Eigen::VectorXd::Zero(params.size());
    const auto param_leaves = [&] {
        std::vector<std::size_t> v;
        for (std::size_t i = 0; i < static_cast<std::size_t>(params.size()); ++i) v.push_back(2 + i);
        return v;
    }();

    for (std::size_t o = 0; o < 2; ++o) {
        const auto tape = b.build(outs[o]);
        for (std::size_t k = 0; k < keys.size(); ++k) {
            std::vector<std::size_t> wrt(keys.key(k).begin(), keys.key(k).end());
            const auto dk = ad::derive(tape, wrt);
            for (Eigen::Index j = 0; j < n; ++j) {
                const double pt[] = {pts(0, j), pts(1, j)};
                const auto leaves = concat(pt, params);
                const auto ev = ad::forward(dk, leaves);
                const Eigen::Index col = static_cast<Eigen::Index>(k) * n + j;
                CHECK(std::fabs(out(static_cast<Eigen::Index>(o), col) - ev.result()) <=
                      1e-12 * std::max(1.0, std::fabs(ev.result())));
                const auto g = ad::gradient(dk, ev, param_leaves);
                for (std::size_t i = 0; i < g.size(); ++i)
                    expected_grad[static_cast<Eigen::Index>(i)] += weights(static_cast<Eigen::Index>(o), col) * g[i];
            }
        }
    }
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
    net.backward(params.data(), cache, weights, n, grad.data());
    CHECK((grad - expected_grad).cwiseAbs().maxCoeff() <= 1e-11 * std::max(1.0, expected_grad.cwiseAbs().maxCoeff()));
}

TEST_CASE("time ansatz: initial data reproduced exactly") {
    const Domain domain = Domain::evolution(0, 1, -1, 1);
    const std::vector<CoordFunction> init{CoordFunction::parse("cos(pi*x)", {"t", "x"}),
                                          CoordFunction::parse("sin(pi*x)", {"t", "x"})};
    Rng rng(2, 0);
    ad::TapeBuilder b;
    testutil::ScalarNet net = testutil::tanh_net(b, 2, {6}, rng);
    const auto wrapped = b.build(apply_time_ansatz(net.output, net.input_vars, domain, init));
    const auto dt = ad::derive(wrapped, 0);
    for (int i = 0; i < 20; ++i) {
        const double x = rng.uniform(-1, 1);
        auto leaves = net.leaf_values2(0.0, x);
        CHECK(std::fabs(ad::evaluate(wrapped, leaves) - std::cos(kPi * x)) <= 1e-12);
        CHECK(std::fabs(ad::evaluate(dt, leaves) - std::sin(kPi * x)) <= 1e-12);
    }
    // order 1: u0 + N s
    const auto first = time_ansatz(domain, {init[0]});
    const double p[] = {0.5, 0.25};
    CHECK(first.h.value(p) == 0.5);
    CHECK(first.g.value(p) == doctest::Approx(std::cos(kPi * 0.25)));
    CHECK_THROWS_AS(time_ansatz(domain, {init[0], init[1], init[0]}), Error);
}

TEST_CASE("Dirichlet xy ansatz") {
    const Domain domain = Domain::spatial(-1, 1, -1, 1);
    const auto f = CoordFunction::parse("cos(pi*x)*sin(pi*y)", {"x", "y"});
    const auto a = dirichlet_xy_ansatz(domain, {f, f, f, f});
    Rng rng(8, 0);
    for (int i = 0; i < 100; ++i) {
        const double s = rng.uniform(-1, 1);
        const double pts[4][2] = {{-1, s}, {1, s}, {s, -1}, {s, 1}};
        for (const auto& p : pts) {
            CHECK(a.h.value(p) == 0.0);
            CHECK(std::fabs(a.g.value(p) - f.value(p)) <= 1e-12);
        }
    }
    const CoordFunction zero(2);
    const auto z = dirichlet_xy_ansatz(domain, {zero, zero, zero, zero});
    const double p[] = {0.2, -0.6};
    CHECK(z.g.value(p) == 0.0);
    const double xs = 0.6, ys = 0.2;
    CHECK(z.h.value(p) == doctest::Approx(xs * (1 - xs) * ys * (1 - ys)));

    const auto bad = CoordFunction::parse("y + 1", {"x", "y"});
    CHECK_THROWS_AS(dirichlet_xy_ansatz(domain, {bad, f, f, f}), Error);
}

TEST_CASE("ODE ansatz") {
    const Domain domain = Domain::ode(0, 1);
    const double vals[] = {0.5, 1.0};
    Rng rng(5, 0);
    ad::TapeBuilder b;
    testutil::ScalarNet net = testutil::tanh_net(b, 1, {5}, rng);
    const auto wrapped = b.build(apply_ode_ivp_ansatz(net.output, net.input_vars[0], domain, vals));
    const auto leaves = net.leaf_values(0.0);
    CHECK(std::fabs(ad::evaluate(wrapped, leaves) - 0.5) <= 1e-12);
    CHECK(std::fabs(ad::evaluate(ad::derive(wrapped, 0), leaves) - 1.0) <= 1e-12);

    const auto bvp = b.build(apply_ode_bvp_ansatz(net.output, net.input_vars[0], domain, 2.0, -3.0));
    CHECK(ad::evaluate(bvp, net.leaf_values(1.0)) == -3.0);
    CHECK(ad::evaluate(bvp, net.leaf_values(0.0)) == 2.0);
}

TEST_CASE("ansatz_jet matches derivatives of the composed tape") {
    const Domain domain = Domain::spatial(0, 1, 0, 2);
    const auto e = CoordFunction::parse("x*y + sin(x)", {"x", "y"});
    const auto a = dirichlet_xy_ansatz(domain, {e, e, e, e});
    const std::vector<DerivKey> req{{0, 0}, {1, 1}, {0, 1}};
    const KeySet keys(req);
    Eigen::MatrixXd pts(2, 3);
    pts << 0.1, 0.5, 0.9, 0.3, 1.1, 1.7;
    const auto n = pts.cols();
    const auto nk = static_cast<Eigen::Index>(keys.size());
    // raw "network": N(x, y) = exp(x) * cos(y)
    const auto raw_fn = CoordFunction::parse("exp(x)*cos(y)", {"x", "y"});
    Eigen::MatrixXd g(1, nk * n), h(1, nk * n), raw(1, nk * n);
    for (Eigen::Index k = 0; k < nk; ++k) {
        g.middleCols(k * n, n) = a.g.evaluate(keys.key(static_cast<std::size_t>(k)), pts).transpose().matrix();
        h.middleCols(k * n, n) = a.h.evaluate(keys.key(static_cast<std::size_t>(k)), pts).transpose().matrix();
        raw.middleCols(k * n, n) = raw_fn.evaluate(keys.key(static_cast<std::size_t>(k)), pts).transpose().matrix();
    }
    const auto u = ansatz_jet(keys, n, g, h, raw);
    ad::TapeBuilder b;
    const ad::Var c[] = {b.input(), b.input()};
    const ad::Var r = b.splice(raw_fn.tape({}), c);
    const CoordFunction composed(b.build(apply_ansatz(a, r, c)));
    for (Eigen::Index k = 0; k < nk; ++k) {
        const auto ref = composed.evaluate(keys.key(static_cast<std::size_t>(k)), pts);
        for (Eigen::Index j = 0; j < n; ++j) CHECK(std::fabs(u(0, k * n + j) - ref[j]) <= 1e-12);
    }
    // adjoint: <d_u, J raw> == <J^T d_u, raw> for the linear map raw -> u - g
    Eigen::MatrixXd du = Eigen::MatrixXd::Random(1, nk * n);
    const auto lhs = (du.array() * (u - g).array()).sum();
    const auto rhs = (ansatz_jet_adjoint(keys, n, h, du).array() * raw.array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("constraint availability") {
    using PK = ProblemKind;
    using BK = BoundaryKind;
    const auto hard = ConstraintMode::Hard;
    for (auto m : {ModelKind::Pinn, ModelKind::DeepOnet}) {
        CHECK(admissible(PK::OdeIvp, m, BK::Dirichlet, hard));
        CHECK(admissible(PK::OdeBvp, m, BK::Dirichlet, hard));
        CHECK_FALSE(admissible(PK::OdeSystemIvp, m, BK::Dirichlet, hard));
        CHECK(admissible(PK::PdeTx, m, BK::Periodic, hard));
        CHECK_FALSE(admissible(PK::PdeTx, m, BK::Dirichlet, hard));
        CHECK_FALSE(admissible(PK::PdeTx, m, BK::Neumann, hard));
        CHECK(admissible(PK::PdeXy, m, BK::Periodic, hard));
        CHECK(admissible(PK::PdeXy, m, BK::Dirichlet, hard));
        CHECK_FALSE(admissible(PK::PdeXy, m, BK::Neumann, hard));
        CHECK(admissible(PK::PdeXy, m, BK::Neumann, ConstraintMode::Soft));
    }
    try {
        require_admissible(PK::PdeTx, ModelKind::Pinn, BK::Neumann, hard);
        FAIL("accepted");
    } catch (const Error& e) {
        CHECK(e.category() == ErrorCategory::Admissibility);
    }
}
