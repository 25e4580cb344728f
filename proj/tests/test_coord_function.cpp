#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pinnsolve/coord_function.hpp"
#include "pinnsolve/deriv_key.hpp"
#include "pinnsolve/errors.hpp"

using namespace pinnsolve;

TEST_CASE("KeySet closure and ordering") {
    const std::vector<DerivKey> req{{0}, {1, 1}};
    const KeySet ks(req);
    // {}, {0}, {1}, {1,1}
    REQUIRE(ks.size() == 4);
    CHECK(ks.key(0).empty());
    CHECK(ks.key(1) == DerivKey{0});
    CHECK(ks.key(2) == DerivKey{1});
    CHECK(ks.key(3) == DerivKey{1, 1});
    CHECK(ks.max_order() == 2);
    CHECK(ks.index_of({1, 1}) == 3);
    CHECK(ks.index_of({0, 0}) == -1);
    // partitions of {1,1}: {{1},{1}} and {{1,1}}
    CHECK(ks.partitions(3).size() == 2);
    // splits of {1,1}: 4 subsets of positions
    CHECK(ks.splits(3).size() == 4);
    CHECK(canonical({2, 0, 1}) == DerivKey{0, 1, 2});
    CHECK(repeated(1, 3) == DerivKey{1, 1, 1});
}

TEST_CASE("KeySet partitions count Bell numbers") {
    const std::vector<DerivKey> req{{0, 1, 1}};
    const KeySet ks(req);
    CHECK(ks.partitions(static_cast<std::size_t>(ks.index_of({0, 1, 1}))).size() == 5);
}

TEST_CASE("CoordFunction values and derivatives") {
    const auto f = CoordFunction::parse("cos(pi*x)*sin(pi*y)", {"x", "y"});
    constexpr double pi = std::numbers::pi;
    const double p[] = {0.3, -0.4};
    CHECK(f.value(p) == doctest::Approx(std::cos(pi * 0.3) * std::sin(-pi * 0.4)).epsilon(1e-14));
    CHECK(f.derivative({0}, p) == doctest::Approx(-pi * std::sin(pi * 0.3) * std::sin(-pi * 0.4)).epsilon(1e-13));
    CHECK(f.derivative({1, 1}, p) == doctest::Approx(-pi * pi * std::cos(pi * 0.3) * std::sin(-pi * 0.4)).epsilon(1e-13));
    CHECK(f.derivative({1, 0}, p) == f.derivative({0, 1}, p));

    Eigen::MatrixXd pts(2, 3);
    pts << 0.0, 0.5, 1.0, 0.5, 0.5, 0.5;
    const auto v = f.evaluate({}, pts);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(std::fabs(v[1]) < 1e-15);

    const CoordFunction zero(2);
    CHECK(zero.is_zero());
    CHECK(zero.evaluate({0}, pts).isZero(0.0));
    CHECK_FALSE(f.is_zero());
    CHECK(CoordFunction::constant(2.0, 1).value(std::array{5.0}) == 2.0);

    CHECK_THROWS_AS(CoordFunction::parse("u + x", {"t", "x"}), Error);
    CHECK_THROWS_AS(CoordFunction::parse("x + z", {"t", "x"}), Error);
}
