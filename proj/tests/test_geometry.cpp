#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pinnsolve/errors.hpp"
#include "pinnsolve/geometry.hpp"

using namespace pinnsolve;

namespace {

bool stratified(const Eigen::MatrixXd& pts, std::span<const Interval> bounds) {
    const auto n = static_cast<std::size_t>(pts.cols());
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        std::vector<int> hist(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = pts(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i));
            if (v < bounds[d].lo || v > bounds[d].hi) return false;
            ++hist[stratum(v, bounds[d], n)];
        }
        if (!std::all_of(hist.begin(), hist.end(), [](int h) { return h == 1; })) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("domain invariants") {
    CHECK_THROWS_AS(Domain::ode(1.0, 1.0), Error);
    CHECK_THROWS_AS(Domain::evolution(0, 1, 2, -1), Error);
    const auto d = Domain::spatial(-1, 1, -1, 1);
    CHECK(d.dims() == 2);
    const double inside[] = {0.0, 1.0};
    const double outside[] = {0.0, 1.5};
    CHECK(d.contains(inside));
    CHECK_FALSE(d.contains(outside));
}

TEST_CASE("latin_hypercube: stratification") {
    const Interval unit[] = {{0, 1}};
    const auto one = latin_hypercube(1, unit, 1);
    CHECK(one(0, 0) >= 0.0);
    CHECK(one(0, 0) <= 1.0);

    auto four = latin_hypercube(4, unit, 2);
    std::vector<double> v(four.data(), four.data() + 4);
    std::sort(v.begin(), v.end());
    CHECK(v[0] < 0.25);
    CHECK((v[1] >= 0.25 && v[1] < 0.5));
    CHECK((v[2] >= 0.5 && v[2] < 0.75));
    CHECK((v[3] >= 0.75 && v[3] <= 1.0));

    const Interval box[] = {{0, 1}, {-1, 1}};
    CHECK(stratified(latin_hypercube(10000, box, 3), box));
    for (std::size_t n : {2u, 10u, 1000u}) CHECK(stratified(latin_hypercube(n, box, 4), box));
}

TEST_CASE("latin_hypercube: determinism") {
    const Interval box[] = {{0, 1}, {-1, 1}};
    const auto a = latin_hypercube(500, box, 99);
    const auto b = latin_hypercube(500, box, 99);
    CHECK(a == b);
    const auto c = latin_hypercube(500, box, 100);
    CHECK(a != c);
}

TEST_CASE("sample_initial_points") {
    InitialSpec spec;
    spec.conditions = {{"cos(pi*x)"}};
    spec.points = 100;
    const auto d = Domain::evolution(0, 1, -1, 1);
    const auto pts = sample_initial_points(d, spec, 5);
    CHECK(pts.cols() == 100);
    CHECK((pts.row(0).array() == 0.0).all());
    CHECK(pts.row(1).minCoeff() >= -1.0);
    CHECK(pts.row(1).maxCoeff() <= 1.0);

    const auto ode = sample_initial_points(Domain::ode(0.5, 1), spec, 5);
    CHECK(ode.size() == 1);
    CHECK(ode(0, 0) == 0.5);

    spec.points = 2;
    const auto two = sample_initial_points(Domain::evolution(0, 1, 0, 1), spec, 6);
    std::vector<double> xs{two(1, 0), two(1, 1)};
    std::sort(xs.begin(), xs.end());
    CHECK(xs[0] < 0.5);
    CHECK(xs[1] >= 0.5);

    CHECK_THROWS_AS(sample_initial_points(Domain::spatial(0, 1, 0, 1), spec, 1), Error);
}

TEST_CASE("sample_boundary_points") {
    BoundarySpec heat;
    heat.kind = BoundaryKind::Dirichlet;
    heat.all_edges = "0+x*0";
    heat.points = 100;
    const auto d = Domain::evolution(0, 1, 0, 1);
    const auto b = sample_boundary_points(d, heat, 3);
    CHECK(b.points.cols() == 200);
    CHECK(std::count(b.edges.begin(), b.edges.end(), Edge::XL) == 100);
    CHECK(std::count(b.edges.begin(), b.edges.end(), Edge::XR) == 100);
    for (Eigen::Index i = 0; i < b.points.cols(); ++i) {
        const double x = b.points(1, i);
        CHECK(x == (b.edges[static_cast<std::size_t>(i)] == Edge::XL ? 0.0 : 1.0));
        CHECK(b.targets[i] == 0.0);
    }

    BoundarySpec poisson;
    poisson.kind = BoundaryKind::Dirichlet;
    poisson.all_edges = "cos(pi*x)*sin(pi*y)";
    poisson.points = 100;
    const auto sq = Domain::spatial(-1, 1, -1, 1);
    const auto p = sample_boundary_points(sq, poisson, 4);
    CHECK(p.points.cols() == 400);
    for (Eigen::Index i = 0; i < p.points.cols(); ++i) {
        const double x = p.points(0, i), y = p.points(1, i);
        CHECK(std::fabs(p.targets[i] - std::cos(std::numbers::pi * x) * std::sin(std::numbers::pi * y)) < 1e-12);
        CHECK(sq.contains(std::array{x, y}));
        CHECK((std::fabs(x) == 1.0 || std::fabs(y) == 1.0));
    }

    poisson.points = 1;
    const auto single = sample_boundary_points(sq, poisson, 4);
    CHECK(single.points.cols() == 4);

    BoundarySpec periodic;
    CHECK_THROWS_AS(sample_boundary_points(d, periodic, 1), Error);
}

TEST_CASE("sensor locations") {
    const auto periodic = sensor_locations(-1, 1, 4, true);
    CHECK(periodic == std::vector<double>{-1.0, -0.5, 0.0, 0.5});
    const auto closed = sensor_locations(0, 1, 5, false);
    CHECK(closed == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("sample_sensors: scalar tuples") {
    SensorConfig c;
    c.family = SensorFamily::ScalarTuple;
    c.sensors = 3;
    c.samples = 5000;
    c.lo = -3;
    c.hi = 3;
    c.seed = 1;
    const auto s = sample_sensors(c, std::nullopt, {});
    CHECK(s.values.rows() == 3);
    CHECK(s.values.cols() == 5000);
    CHECK(s.values.minCoeff() >= -3.0);
    CHECK(s.values.maxCoeff() <= 3.0);
    CHECK(sample_sensors(c, std::nullopt, {}).values == s.values);
}

TEST_CASE("sample_sensors: series functions stay in range") {
    SensorConfig c;
    c.sensors = 32;
    c.samples = 500;
    c.lo = -2;
    c.hi = 2;
    c.seed = 2;
    for (auto kind : {BoundaryKind::Periodic, BoundaryKind::Dirichlet, BoundaryKind::Neumann}) {
        const auto fam = family_for(kind, 0, 1, 4);
        const auto loc = sensor_locations(0, 1, c.sensors, kind == BoundaryKind::Periodic);
        const auto s = sample_sensors(c, fam, loc);
        CHECK(s.values.minCoeff() >= -2.0);
        CHECK(s.values.maxCoeff() <= 2.0);
        for (int j = 0; j < 5; ++j)
            for (std::size_t i = 0; i < loc.size(); ++i)
                CHECK(std::fabs(fam.value(s.coefficients[static_cast<std::size_t>(j)][0], loc[i]) -
                                s.values(static_cast<Eigen::Index>(i), j)) < 1e-12);
        if (kind == BoundaryKind::Dirichlet) {
            CHECK(std::fabs(s.values(0, 7)) < 1e-12);
            CHECK(std::fabs(s.values(31, 7)) < 1e-12);
        }
    }
    c.lo = 0.5;
    c.hi = 1.5;
    const auto fam = family_for(BoundaryKind::Periodic, 0, 1, 4);
    const auto shifted = sample_sensors(c, fam, sensor_locations(0, 1, 32, true));
    CHECK(shifted.values.minCoeff() >= 0.5);
    CHECK(shifted.values.maxCoeff() <= 1.5);

    c.lo = 0;
    c.hi = 0;
    const auto zero = sample_sensors(c, fam, sensor_locations(0, 1, 32, true));
    CHECK(zero.values.isZero(0.0));
}

TEST_CASE("function family fit recovers coefficients") {
    const FunctionFamily fam(FunctionFamily::Basis::Fourier, -1, 1, 4);
    Eigen::VectorXd c(9);
    c << 0.3, -1, 0.5, 0.25, 0, 0.1, -0.2, 0.05, 0.01;
    const auto loc = sensor_locations(-1, 1, 32, true);
    std::vector<double> vals;
    for (double x : loc) vals.push_back(fam.value(c, x));
    CHECK((fam.fit(loc, vals) - c).cwiseAbs().maxCoeff() < 1e-12);
}
