#include <doctest.h>

#include <cmath>

#include "sdmp/errors.hpp"
#include "sdmp/forward.hpp"
#include "sdmp/lq.hpp"

using namespace sdmp;

TEST_SUITE("lq_delayed") {

TEST_CASE("control law on the punctured unit set") {
    const ControlDomain U = ControlDomain::punctured_unit();
    CHECK(lq_control_law(2.0, U) == 2.0);
    CHECK(lq_control_law(-1.0, U) == -1.0);
    CHECK(lq_control_law(0.5, U) == 1.0);
    CHECK(lq_control_law(-0.5, U) == -1.0);
    CHECK(lq_control_law(0.0, U) == 1.0);
    bool outside = true;
    CHECK(lq_control_law(0.3, ControlDomain::real_line(), &outside) == 0.3);
    CHECK_FALSE(outside);
    CHECK(lq_control_law(0.3, ControlDomain::points({-2.0, 1.0}), &outside) == 1.0);
    CHECK(outside);
}

TEST_CASE("problem validation") {
    LQProblem p;
    CHECK_NOTHROW(p.validate());
    p.C2 = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.L = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.R2 = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("Riccati closed forms") {
    // No cost at all: k = 0.
    const RiccatiSolution zero = riccati_reference(0.3, 1.0, 0.2, 0.4, 0.0, 1.0, 0.0, 1.0, 2000);
    for (double k : zero.k) CHECK(k == 0.0);
    // B = C1 = D = 0: k' = -2 A1 k - R1 is linear.
    const double A1 = 0.3, R1 = 0.7, H = 1.5, T = 2.0;
    const RiccatiSolution lin = riccati_reference(A1, 0.0, 0.0, 0.0, R1, 1.0, H, T, 4000);
    REQUIRE(lin.t.size() == lin.k.size());
    for (std::size_t i = 0; i < lin.t.size(); i += 400) {
        const double exact = (H + R1 / (2 * A1)) * std::exp(2 * A1 * (T - lin.t[i])) - R1 / (2 * A1);
        CHECK(lin.k[i] == doctest::Approx(exact).epsilon(1e-10));
    }
    CHECK(lin.value(2.0) == doctest::Approx(2.0 * lin.k.front()));
}

TEST_CASE("zero state cost gives v = 1 and J = L T / 2") {
    LQProblem p;
    p.R1 = p.R2 = p.H = 0.0;
    const ProblemSpec spec = lq_problem_spec(p, 4);
    const NoiseEnsemble noise(spec.grid, 5, 500);
    const LQSolution sol = solve_lq(p, spec, noise);
    CHECK(sol.converged);
    for (std::size_t i = 0; i < 500; i += 50)
        for (int k = 0; k < spec.grid.steps(); ++k) CHECK(sol.control.at(i, k) == 1.0);
    CHECK(sol.cost.mean == doctest::Approx(0.5 * p.L * p.T));
    CHECK(sol.cost.std_error == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("small benchmark solve: admissible, reproducible, no better challenger") {
    const LQProblem p = LQProblem::benchmark();
    const ProblemSpec spec = lq_problem_spec(p, 4);
    const NoiseEnsemble noise(spec.grid, 9, 3000);
    const LQSolution a = solve_lq(p, spec, noise);
    const LQSolution b = solve_lq(p, spec, noise);
    CHECK(a.iterations == b.iterations);
    CHECK(a.control == b.control);
    CHECK(a.w_changes.size() == static_cast<std::size_t>(a.iterations));
    for (std::size_t i = 0; i < 3000; i += 100)
        for (int k = 0; k < spec.grid.steps(); ++k) CHECK(std::abs(a.control.at(i, k)) >= 1.0);
    const OptimalityReport rep =
        verify_optimality(p, spec, a, noise, 6, 3, {3.0, 0.5, spec.grid.dt()});
    CHECK(rep.challengers.size() == 6);
    CHECK(rep.optimal_cost.mean == doctest::Approx(a.cost.mean));
    for (const auto& c : rep.challengers) CHECK(c.difference.n == 3000);
}

}  // TEST_SUITE
