#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdmp/errors.hpp"
#include "sdmp/expression.hpp"
#include "sdmp/forward.hpp"
#include "sdmp/lq.hpp"
#include "sdmp/parallel.hpp"
#include "sdmp/problems.hpp"
#include "sdmp/stats.hpp"

using namespace sdmp;

TEST_SUITE("sdde_forward") {

TEST_CASE("state matches a hand-written Euler recursion for the LQ benchmark") {
    const LQProblem prob;
    const ProblemSpec spec = lq_problem_spec(prob, 4);
    const NoiseEnsemble noise(spec.grid, 3, 5);
    const ControlPath u = ControlPath::deterministic(spec, [](double t) { return t < 0.5 ? 1.0 : -2.0; });
    const PathMatrix x = simulate_state(spec, u, noise);
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    for (std::size_t i = 0; i < noise.n_paths(); ++i) {
        std::vector<double> y(static_cast<std::size_t>(g.steps() + m + 1), prob.a);
        for (int k = 0; k < g.steps(); ++k) {
            const double xk = y[static_cast<std::size_t>(k + m)], xd = y[static_cast<std::size_t>(k)];
            const double v = g.time(k) < 0.5 ? 1.0 : -2.0;
            y[static_cast<std::size_t>(k + m + 1)] =
                xk + (prob.A1 * xk + prob.A2 * xd + prob.B * v) * g.dt() +
                (prob.C1 * xk + prob.C2 * xd + prob.D * v) * noise.increment(i, k);
        }
        for (int k = -m; k <= g.steps(); ++k)
            CHECK(x(i, k) == doctest::Approx(y[static_cast<std::size_t>(k + m)]).epsilon(1e-14));
    }
}

TEST_CASE("spike with the nominal value is bit-exactly inert") {
    const ProblemSpec spec = nonlinear_benchmark(TimeGrid::make(1.0, 0.25, 16));
    const NoiseEnsemble noise(spec.grid, 5, 300);
    const ControlPath u = ControlPath::constant(spec, 1.0);
    const SpikeSpec spike{0.25, 0.0625, 1.0};
    CHECK(apply_spike(u, spike, spec) == u);
    const PathMatrix x = simulate_state(spec, u, noise);
    const PathMatrix x1 = simulate_first_variation(spec, u, spike, noise, x);
    const PathMatrix x2 = simulate_second_variation(spec, u, spike, noise, x, x1);
    for (double v : x1.data()) CHECK(v == 0.0);
    for (double v : x2.data()) CHECK(v == 0.0);
    const Estimate lhs = variational_inequality_lhs(spec, u, spike, noise, x, x1, x2);
    CHECK(lhs.mean == 0.0);
    const auto res = expansion_residual(spec, u, 0.25, 1.0, {0.0625, 0.03125}, noise);
    for (const auto& r : res) CHECK(r.value == 0.0);
}

TEST_CASE("spike resolution is half-open on nodes") {
    const TimeGrid g = TimeGrid::make(1.0, 0.25, 8);
    const ControlDomain U = ControlDomain::punctured_unit();
    const SpikeNodes s = resolve_spike({0.25, 0.125, -2.0}, g, U);
    CHECK(s.begin == 8);
    CHECK(s.end == 12);
    CHECK_THROWS_AS(resolve_spike({0.26, 0.125, -2.0}, g, U), ConfigError);
    CHECK_THROWS_AS(resolve_spike({0.25, 0.01, -2.0}, g, U), ConfigError);
    CHECK_THROWS_AS(resolve_spike({0.25, 0.125, 0.5}, g, U), DomainError);
    CHECK_THROWS_AS(resolve_spike({0.875, 0.25, -2.0}, g, U), ConfigError);
}

TEST_CASE("first variation without feedback is the spiked diffusion increment") {
    // b = 0, sigma = d v + xd / 10 with u = 1: before tau + delta the variation is
    // d (v - 1) (B(tau + eps) - B(tau)).
    auto spec = nonlinear_benchmark(TimeGrid::make(1.0, 0.25, 8));
    spec.coefficients = std::make_shared<ExpressionCoefficients>("pure-noise", "0", "0.3*v + 0.1*xd", "0", "x");
    spec.domain = ControlDomain::real_line();
    const NoiseEnsemble noise(spec.grid, 8, 20);
    const ControlPath u = ControlPath::constant(spec, 1.0);
    const PathMatrix x = simulate_state(spec, u, noise);
    const PathMatrix x1 = simulate_first_variation(spec, u, {0.25, 0.0625, -2.0}, noise, x);
    for (std::size_t i = 0; i < 20; ++i) {
        const double z = 0.3 * -3.0 * (noise.increment(i, 8) + noise.increment(i, 9));
        for (int k = 10; k <= 16; ++k) CHECK(x1(i, k) == doctest::Approx(z).epsilon(1e-14));
        for (int k = -8; k <= 8; ++k) CHECK(x1(i, k) == 0.0);
    }
}

TEST_CASE("results do not depend on the worker count") {
    const ProblemSpec spec = nonlinear_benchmark(TimeGrid::make(1.0, 0.25, 16));
    const NoiseEnsemble noise(spec.grid, 13, 1100);
    const ControlPath u = ControlPath::constant(spec, 1.0);
    LadderOptions opt;
    opt.tau = 0.25;
    opt.value = -2.0;
    opt.epsilons = dyadic_ladder(0.25, 2, 4);
    opt.block_size = 64;
    const int saved = parallel::workers();
    parallel::set_workers(1);
    const auto a = spike_ladder_study(spec, u, noise, opt);
    const PathMatrix xa = simulate_state(spec, u, noise);
    const Estimate ca = evaluate_cost(spec, u, noise);
    parallel::set_workers(3);
    const auto b = spike_ladder_study(spec, u, noise, opt);
    const PathMatrix xb = simulate_state(spec, u, noise);
    const Estimate cb = evaluate_cost(spec, u, noise);
    parallel::set_workers(saved);
    CHECK(xa == xb);
    CHECK(ca.mean == cb.mean);
    CHECK(ca.std_error == cb.std_error);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK(a[j].x1_sq.value == b[j].x1_sq.value);
        CHECK(a[j].x2_sq.value == b[j].x2_sq.value);
        CHECK(a[j].residual_sq.value == b[j].residual_sq.value);
        CHECK(a[j].vi_lhs.mean == b[j].vi_lhs.mean);
        CHECK(a[j].cross_residual.mean == b[j].cross_residual.mean);
    }
}

TEST_CASE("ladder rungs agree with the matrix-valued variations") {
    const ProblemSpec spec = nonlinear_benchmark(TimeGrid::make(1.0, 0.25, 16));
    const NoiseEnsemble noise(spec.grid, 21, 500);
    const ControlPath u = ControlPath::constant(spec, 1.0);
    LadderOptions opt;
    opt.tau = 0.5;
    opt.value = 2.0;
    opt.epsilons = {0.0625};
    const auto rung = spike_ladder_study(spec, u, noise, opt).front();
    const SpikeSpec spike{0.5, 0.0625, 2.0};
    const PathMatrix x = simulate_state(spec, u, noise);
    const PathMatrix x1 = simulate_first_variation(spec, u, spike, noise, x);
    const PathMatrix x2 = simulate_second_variation(spec, u, spike, noise, x, x1);
    double sup = 0.0;
    for (int k = 0; k <= spec.grid.steps(); ++k) {
        Moments m;
        for (std::size_t i = 0; i < 500; ++i) m.add(x1(i, k) * x1(i, k));
        sup = std::max(sup, m.mean());
    }
    CHECK(rung.x1_sq.value == doctest::Approx(sup).epsilon(1e-12));
    const Estimate lhs = variational_inequality_lhs(spec, u, spike, noise, x, x1, x2);
    CHECK(rung.vi_lhs.mean == doctest::Approx(lhs.mean).epsilon(1e-10));
}

TEST_CASE("control with B = D = 0 only changes the running cost") {
    LQProblem prob;
    prob.B = 0.0;
    prob.D = 0.0;
    const ProblemSpec spec = lq_problem_spec(prob, 4);
    const NoiseEnsemble noise(spec.grid, 2, 200);
    const auto c1 = path_costs(spec, ControlPath::constant(spec, 1.0), noise);
    const auto c2 = path_costs(spec, ControlPath::constant(spec, -2.0), noise);
    for (std::size_t i = 0; i < c1.size(); ++i)
        CHECK(c2[i] - c1[i] == doctest::Approx(0.5 * prob.L * (4.0 - 1.0) * prob.T).epsilon(1e-12));
}

}  // TEST_SUITE
