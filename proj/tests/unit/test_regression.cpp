#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdmp/errors.hpp"
#include "sdmp/noise.hpp"
#include "sdmp/regression.hpp"

using namespace sdmp;

TEST_SUITE("regression") {

TEST_CASE("quadratic targets are reproduced exactly") {
    const std::size_t n = 2000;
    std::vector<double> x(n), xd(n), y(n), fit(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = 1.0 + counter_normal(1, i, 0);
        xd[i] = -0.5 + 2.0 * counter_normal(1, i, 1);
        y[i] = 0.3 - 1.2 * x[i] + 0.7 * x[i] * xd[i] + 0.25 * xd[i] * xd[i];
    }
    const Regressor reg(x, xd, {2, 0.0}, 5);
    CHECK(reg.n_basis() == 6);
    reg.project(y, fit);
    for (std::size_t i = 0; i < n; ++i) CHECK(fit[i] == doctest::Approx(y[i]).epsilon(1e-9));
    const FittedFunction f = reg.fit(y);
    CHECK(f(0.4, 1.1) == doctest::Approx(0.3 - 1.2 * 0.4 + 0.7 * 0.44 + 0.25 * 1.21).epsilon(1e-9));
}

TEST_CASE("constant features are dropped") {
    const std::size_t n = 100;
    std::vector<double> x(n, 2.0), xd(n), y(n, 4.0), fit(n);
    for (std::size_t i = 0; i < n; ++i) xd[i] = counter_normal(2, i, 0);
    CHECK(Regressor(x, {}, {2, 1e-8}, 0).n_basis() == 1);
    const Regressor reg(x, xd, {2, 1e-8}, 0);
    CHECK(reg.n_basis() == 3);
    reg.project(y, fit);
    for (double v : fit) CHECK(v == doctest::Approx(4.0));
}

TEST_CASE("projection is the conditional mean of independent noise") {
    const std::size_t n = 50000;
    std::vector<double> x(n), y(n), fit(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = counter_normal(3, i, 0);
        y[i] = 2.0 * x[i] + counter_normal(3, i, 1);
    }
    Regressor(x, {}, {2, 1e-8}, 0).project(y, fit);
    for (std::size_t i = 0; i < n; i += 997) CHECK(std::abs(fit[i] - 2.0 * x[i]) < 0.05 * (1 + x[i] * x[i]));
}

TEST_CASE("singular systems and bad options are rejected") {
    std::vector<double> x = {1.0, 2.0};
    CHECK_THROWS_AS(Regressor(x, {}, {3, 0.0}, 7), SolverError);
    try {
        Regressor(x, {}, {3, 0.0}, 7);
    } catch (const SolverError& e) {
        CHECK(e.time_index() == 7);
    }
    CHECK_THROWS_AS(Regressor(x, {}, {-1, 0.0}, 0), ConfigError);
    CHECK_THROWS_AS(Regressor(x, {}, {2, -1.0}, 0), ConfigError);
    CHECK_THROWS_AS(Regressor({}, {}, {2, 0.0}, 0), SolverError);
}

}  // TEST_SUITE
