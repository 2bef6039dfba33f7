#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdmp/adjoint.hpp"
#include "sdmp/errors.hpp"
#include "sdmp/expression.hpp"
#include "sdmp/forward.hpp"
#include "sdmp/lq.hpp"
#include "sdmp/problems.hpp"
#include "sdmp/stats.hpp"

using namespace sdmp;

namespace {

double relative_l2(const PathMatrix& est, int last, const std::function<double(int)>& exact) {
    double err = 0.0, norm = 0.0;
    for (int k = 0; k <= last; ++k) {
        const double e = exact(k);
        for (std::size_t i = 0; i < est.n_paths(); ++i) err += (est(i, k) - e) * (est(i, k) - e);
        norm += e * e * static_cast<double>(est.n_paths());
    }
    return std::sqrt(err / norm);
}

// Exact discrete value of E sum_k c x1_k x1_{k-m} dt for b = 0,
// sigma = c xd + d v, constant u, spike [tau, tau + eps) with tau = delta and
// T = 4 delta. x1 is a linear functional of the increments, so every second
// moment reduces to counting overlapping increments.
double counterexample_lhs(double c, double jump, int m, int e, double dt) {
    const int i0 = m, N = 4 * m;
    auto first_block = [&](int j) {  // E x1_j^2 for j in [i0, i0 + m]
        return jump * jump * dt * std::min(std::max(j - i0, 0), e);
    };
    double total = 0.0;
    for (int k = i0 + m; k < N; ++k) {
        double cross;
        if (k < i0 + 2 * m) {
            cross = first_block(k - m);
        } else {
            cross = jump * jump * e * dt;
            for (int j = i0 + m; j <= k - m - 1; ++j) cross += c * c * first_block(j - m) * dt;
        }
        total += c * cross * dt;
    }
    return total;
}

}  // namespace

TEST_SUITE("adjoint_absde") {

TEST_CASE("first adjoint matches the linear oracle") {
    const FirstAdjointOracle oracle;
    const ProblemSpec spec = oracle.problem(16);
    const NoiseEnsemble noise(spec.grid, 4, 20000);
    const ControlPath u = ControlPath::constant(spec, 0.0);
    const PathMatrix x = simulate_state(spec, u, noise);
    const FirstAdjoint adj = solve_first_adjoint(spec, u, x, noise);
    const TimeGrid& g = spec.grid;
    const double rel = relative_l2(adj.p, g.steps(), [&](int k) { return oracle.exact_p(g.time(k)); });
    CHECK(rel < 0.02);
    double q_rms = 0.0;
    for (int k = 0; k < g.steps(); ++k)
        for (std::size_t i = 0; i < noise.n_paths(); ++i) q_rms += adj.q(i, k) * adj.q(i, k);
    CHECK(std::sqrt(q_rms / (g.steps() * 20000.0)) < 0.05);
}

TEST_CASE("second adjoint matches the deterministic reduction") {
    const SecondAdjointOracle oracle;
    const ProblemSpec spec = oracle.problem(32);
    const NoiseEnsemble noise(spec.grid, 4, 5000);
    const ControlPath u = ControlPath::constant(spec, 0.0);
    const PathMatrix x = simulate_state(spec, u, noise);
    const FirstAdjoint first = solve_first_adjoint(spec, u, x, noise);
    const SecondAdjoint second = solve_second_adjoint(spec, u, x, first, noise);
    const TimeGrid& g = spec.grid;
    CHECK(relative_l2(second.P, g.steps(), [&](int k) { return oracle.exact_P(g.time(k)); }) < 0.02);
    CHECK(second.P(0, g.steps()) == oracle.hq / 2);
}

TEST_CASE("adjoint extension beyond T is exactly zero") {
    const ProblemSpec spec = make_named_problem("lq-benchmark", 4);
    const NoiseEnsemble noise(spec.grid, 1, 500);
    const ControlPath u = ControlPath::constant(spec, 1.0);
    const PathMatrix x = simulate_state(spec, u, noise);
    const FirstAdjoint first = solve_first_adjoint(spec, u, x, noise);
    const SecondAdjoint second = solve_second_adjoint(spec, u, x, first, noise);
    const TimeGrid& g = spec.grid;
    for (std::size_t i = 0; i < 500; ++i) {
        for (int k = g.steps() + 1; k <= g.last_node(); ++k) {
            CHECK(first.p(i, k) == 0.0);
            CHECK(first.q(i, k) == 0.0);
            CHECK(second.P(i, k) == 0.0);
            CHECK(second.Q(i, k) == 0.0);
        }
        CHECK(first.p(i, g.steps()) == x(i, g.steps()));  // h = x^2 / 2
    }
}

TEST_CASE("P0 is the closed-form stochastic exponential") {
    const SecondAdjointOracle oracle;  // beta = a2 / c2, alpha = a1 - beta c1
    const ProblemSpec spec = oracle.problem(8);
    const NoiseEnsemble noise(spec.grid, 6, 20000);
    const ControlPath u = ControlPath::constant(spec, 0.0);
    const PathMatrix x = simulate_state(spec, u, noise);
    const PathMatrix P0 = simulate_P0(spec, u, x, noise);
    const double beta = oracle.a2 / oracle.c2;
    const double alpha = oracle.a1 - beta * oracle.c1;
    const TimeGrid& g = spec.grid;
    for (std::size_t i = 0; i < 20000; ++i) {
        CHECK(P0(i, 0) == 1.0);
        double B = 0.0;
        for (int k = 0; k < g.steps(); ++k) B += noise.increment(i, k);
        const double exact = std::exp(-(alpha + 0.5 * beta * beta) * g.horizon() - beta * B);
        if (i < 50) CHECK(P0(i, g.steps()) == doctest::Approx(exact).epsilon(1e-12));
    }
    Moments m;
    for (std::size_t i = 0; i < 20000; ++i) m.add(P0(i, g.steps()));
    CHECK(std::abs(m.mean() - std::exp(-alpha * g.horizon())) < 4 * m.estimate().std_error);
}

TEST_CASE("cross-term identity fails on an explicit counterexample") {
    // b = 0, sigma = c xd + d v: beta = sigma_x = 0, so the right side vanishes
    // while the left side is of order eps.
    const double c = 0.5, d = 0.3;
    ProblemSpec spec;
    spec.coefficients = std::make_shared<ExpressionCoefficients>("counterexample", "0", "0.5*xd + 0.3*v", "0", "x");
    spec.initial_state = [](double) { return 1.0; };
    spec.initial_control = [](double) { return 1.0; };
    spec.grid = TimeGrid::make(1.0, 0.25, 16);
    const NoiseEnsemble noise(spec.grid, 12, 40000);
    const ControlPath u = ControlPath::constant(spec, 1.0);
    const std::vector<double> eps = {0.0625, 0.03125};
    const auto rows = cross_term_check(spec, u, 0.25, -2.0, eps, noise, phi_constant(spec.grid, 40000, 1.0));
    const double jump = d * (-2.0 - 1.0);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const int e = static_cast<int>(std::lround(eps[j] / spec.grid.dt()));
        const double exact = counterexample_lhs(c, jump, 16, e, spec.grid.dt());
        CAPTURE(eps[j]);
        CHECK(rows[j].rhs.mean == 0.0);
        CHECK(std::abs(rows[j].lhs.mean - exact) < 4 * rows[j].lhs.std_error);
        CHECK(exact / eps[j] > c * jump * jump * 0.4);
    }
}

TEST_CASE("duality between the first adjoint and the first variation") {
    const ProblemSpec spec = nonlinear_benchmark(TimeGrid::make(1.0, 0.25, 16));
    const NoiseEnsemble noise(spec.grid, 9, 20000);
    const ControlPath u = ControlPath::constant(spec, 1.0);
    const PathMatrix x = simulate_state(spec, u, noise);
    const FirstAdjoint first = solve_first_adjoint(spec, u, x, noise);
    const DualityReport rep = duality_check(spec, u, x, first, {0.25, 0.0625, -2.0}, noise);
    CHECK(std::abs(rep.gap.mean) < 4 * rep.gap.std_error + 0.02 * std::abs(rep.terminal.mean));
}

TEST_CASE("non-degeneracy guard and delay-free structure") {
    ProblemSpec spec;
    spec.coefficients = std::make_shared<ExpressionCoefficients>("flat", "0.1*x", "0.2*x", "0.5*x^2", "0.5*x^2");
    spec.initial_state = [](double) { return 1.0; };
    spec.grid = TimeGrid::make(1.0, 0.25, 4);
    const NoiseEnsemble noise(spec.grid, 1, 200);
    const ControlPath u = ControlPath::constant(spec, 0.0);
    const PathMatrix x = simulate_state(spec, u, noise);
    const FirstAdjoint first = solve_first_adjoint(spec, u, x, noise);
    CHECK_THROWS_AS(solve_second_adjoint(spec, u, x, first, noise), GuardError);
    CHECK_NOTHROW(check_delay_free(spec, u, x));
    AdjointOptions opt;
    opt.delay_free = true;
    CHECK_NOTHROW(solve_second_adjoint(spec, u, x, first, noise, opt));

    const ProblemSpec lq = make_named_problem("lq-benchmark", 4);
    const ControlPath v = ControlPath::constant(lq, 1.0);
    const PathMatrix y = simulate_state(lq, v, noise);
    CHECK_THROWS_AS(check_delay_free(lq, v, y), StructuralError);
}

}  // TEST_SUITE
