#include "sdmp/lq.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "sdmp/errors.hpp"
#include "sdmp/parallel.hpp"
#include "sdmp/regression.hpp"
#include "kernels.hpp"

namespace sdmp {

void LQProblem::validate() const {
    if (C2 == 0.0) throw ConfigError("LQ problem requires C2 != 0");
    if (R1 < 0.0) throw ConfigError("LQ problem requires R1 >= 0");
    if (R2 < 0.0) throw ConfigError("LQ problem requires R2 >= 0");
    if (!(L > 0.0)) throw ConfigError("LQ problem requires L > 0");
    if (H < 0.0) throw ConfigError("LQ problem requires H >= 0");
    for (double v : {A1, A2, B, C1, C2, D, R1, R2, L, H, a})
        if (!std::isfinite(v)) throw ConfigError("LQ problem has a non-finite parameter");
}

LQProblem LQProblem::no_delay_reduction() {
    LQProblem p;
    p.A2 = 0.0;
    p.R2 = 0.0;
    p.C2 = 1e-3;
    p.domain = ControlDomain::real_line();
    return p;
}

ThetaRecord LinearQuadraticCoefficients::evaluate(const Point& pt) const {
    const LQProblem& p = prob_;
    ThetaRecord r;
    r.b = {p.A1 * pt.x + p.A2 * pt.xd + p.B * pt.v, p.A1, p.A2, 0.0, 0.0, 0.0};
    r.sigma = {p.C1 * pt.x + p.C2 * pt.xd + p.D * pt.v, p.C1, p.C2, 0.0, 0.0, 0.0};
    r.cost = {0.5 * (p.R1 * pt.x * pt.x + p.R2 * pt.xd * pt.xd + p.L * pt.v * pt.v),
              p.R1 * pt.x, p.R2 * pt.xd, p.R1, 0.0, p.R2};
    return r;
}

TerminalRecord LinearQuadraticCoefficients::terminal(double x) const {
    return {0.5 * prob_.H * x * x, prob_.H * x, prob_.H};
}

CoefficientBounds LinearQuadraticCoefficients::bounds() const {
    const LQProblem& p = prob_;
    CoefficientBounds b;
    b.b = {CoefficientBounds::kNone, std::abs(p.A1), std::abs(p.A2), 0.0, 0.0, 0.0};
    b.sigma = {CoefficientBounds::kNone, std::abs(p.C1), std::abs(p.C2), 0.0, 0.0, 0.0};
    b.cost = {CoefficientBounds::kNone, CoefficientBounds::kNone, CoefficientBounds::kNone,
              p.R1, 0.0, p.R2};
    b.terminal = {CoefficientBounds::kNone, CoefficientBounds::kNone, p.H};
    b.sigma_xd_lower = std::abs(p.C2);
    return b;
}

ProblemSpec lq_problem_spec(const LQProblem& prob, int steps_per_delay) {
    prob.validate();
    ProblemSpec spec;
    spec.coefficients = std::make_shared<LinearQuadraticCoefficients>(prob);
    spec.domain = prob.domain;
    const double a = prob.a;
    const double eta = prob.domain.project(0.0);
    spec.initial_state = [a](double) { return a; };
    spec.initial_control = [eta](double) { return eta; };
    spec.grid = TimeGrid::make(prob.T, prob.delta, steps_per_delay);
    spec.validate();
    return spec;
}

double lq_control_law(double u, const ControlDomain& domain, bool* outside_law) {
    if (domain.is_punctured_unit()) {
        if (outside_law) *outside_law = false;
        if (u <= -1.0 || u >= 1.0) return u;
        return u >= 0.0 ? 1.0 : -1.0;
    }
    if (outside_law) *outside_law = !(domain.kind() == ControlDomain::Kind::RealLine);
    return domain.project(u);
}

AdjointOptions lq_adjoint_options(const LQProblem& prob, const ProblemSpec& spec,
                                  const PathMatrix& states, const PicardOptions& options) {
    AdjointOptions adj = options.adjoint;
    if (options.r2 == R2Placement::AsWritten && prob.R2 != 0.0) {
        const int tail = spec.grid.steps() - spec.grid.steps_per_delay();
        const double R2 = prob.R2;
        const PathMatrix* x = &states;
        adj.extra_first_driver = [R2, tail, x](std::size_t i, int k) {
            return k >= tail ? R2 * (*x)(i, k) : 0.0;
        };
        adj.extra_second_driver = [R2, tail](std::size_t, int k) {
            return k >= tail ? 0.5 * R2 : 0.0;
        };
    }
    return adj;
}


namespace {

// Euler-Maruyama under the feedback v_k = law(w_k(x_k, x_{k-m})); the
// realised controls are recorded per path.
void closed_loop(const LQProblem& prob, const ProblemSpec& spec, const NoiseEnsemble& noise,
                 const std::vector<FittedFunction>& policy, PathMatrix& x, ControlPath& v) {
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    const int N = g.steps();
    const double dt = g.dt();
    const std::vector<double> xi = detail::initial_state_values(spec);
    std::vector<double> dB(static_cast<std::size_t>(N));
    for (std::size_t i = 0; i < noise.n_paths(); ++i) {
        noise.fill_path(i, dB);
        for (int k = -m; k <= 0; ++k) x(i, k) = xi[static_cast<std::size_t>(k + m)];
        for (int k = 0; k <= N; ++k) {
            const double u = lq_control_law(policy[static_cast<std::size_t>(k)](x(i, k), x(i, k - m)),
                                            prob.domain);
            v.at(i, k) = u;
            if (k == N) break;
            const double xk = x(i, k), xd = x(i, k - m);
            const double next = xk + (prob.A1 * xk + prob.A2 * xd + prob.B * u) * dt +
                                (prob.C1 * xk + prob.C2 * xd + prob.D * u) * dB[static_cast<std::size_t>(k)];
            if (!std::isfinite(next)) throw SimulationError(i, k, "state is not finite");
            x(i, k + 1) = next;
        }
    }
}

}  // namespace

LQSolution solve_lq(const LQProblem& prob, const ProblemSpec& spec, const NoiseEnsemble& noise,
                    const PicardOptions& options) {
    prob.validate();
    if (!(options.damping > 0.0 && options.damping <= 1.0))
        throw ConfigError("Picard damping must lie in (0, 1]");
    if (options.max_iters < 1) throw ConfigError("Picard max_iters must be at least 1");
    if (!(options.tolerance > 0.0)) throw ConfigError("Picard tolerance must be positive");
    if (!(options.min_damping > 0.0 && options.min_damping <= options.damping))
        throw ConfigError("Picard min_damping must lie in (0, damping]");
    detail::check_inputs(spec, ControlPath::constant(spec, 1.0), noise);
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    const int N = g.steps();
    const std::size_t n = noise.n_paths();
    double theta = options.damping;

    LQSolution sol{ControlPath::ensemble(spec, n, 0.0), PathMatrix(n, -m, N), {}, {}, {}, false, 0,
                   {}, {}, false};
    lq_control_law(0.0, prob.domain, &sol.outside_law);
    std::vector<FittedFunction> policy(static_cast<std::size_t>(N + 1));  // w = 0
    std::vector<double> xs(n), xds(n), mixed(n);

    for (int it = 1; it <= options.max_iters; ++it) {
        closed_loop(prob, spec, noise, policy, sol.states, sol.control);
        const AdjointOptions adj = lq_adjoint_options(prob, spec, sol.states, options);
        sol.first = solve_first_adjoint(spec, sol.control, sol.states, noise, adj);
        double dw = 0.0, dv = 0.0;
        for (int k = 0; k <= N; ++k) {
            FittedFunction& w = policy[static_cast<std::size_t>(k)];
            for (std::size_t i = 0; i < n; ++i) {
                xs[i] = sol.states(i, k);
                xds[i] = sol.states(i, k - m);
                const double cur = w(xs[i], xds[i]);
                const double target = lq_unconstrained(sol.first.p(i, k), sol.first.q(i, k), prob);
                mixed[i] = cur + theta * (target - cur);
            }
            const Regressor reg(xs, xds, adj.regression, k);
            FittedFunction next = reg.fit(mixed);
            double sw = 0.0, sv = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double wn = next(xs[i], xds[i]);
                const double d = wn - w(xs[i], xds[i]);
                const double e = lq_control_law(wn, prob.domain) - sol.control.at(i, k);
                sw += d * d;
                sv += e * e;
            }
            dw = std::max(dw, std::sqrt(sw / static_cast<double>(n)));
            dv = std::max(dv, std::sqrt(sv / static_cast<double>(n)));
            w = std::move(next);
        }
        if (options.adaptive && !sol.w_changes.empty() && dw > sol.w_changes.back())
            theta = std::max(options.min_damping, 0.5 * theta);
        sol.w_changes.push_back(dw);
        sol.v_changes.push_back(dv);
        sol.iterations = it;
        if (dw < options.tolerance) {
            sol.converged = true;
            break;
        }
    }
    closed_loop(prob, spec, noise, policy, sol.states, sol.control);
    sol.control.check_domain(prob.domain);
    const AdjointOptions adj = lq_adjoint_options(prob, spec, sol.states, options);
    sol.first = solve_first_adjoint(spec, sol.control, sol.states, noise, adj);
    if (options.solve_second)
        sol.second = solve_second_adjoint(spec, sol.control, sol.states, sol.first, noise, adj);
    sol.cost = evaluate_cost(spec, sol.control, noise);
    return sol;
}

bool OptimalityReport::passed() const {
    return std::all_of(challengers.begin(), challengers.end(),
                       [](const ChallengerResult& c) { return c.passed; });
}

OptimalityReport verify_optimality(const LQProblem& prob, const ProblemSpec& spec,
                                   const LQSolution& solution, const NoiseEnsemble& noise,
                                   int n_challengers, std::uint64_t seed,
                                   const GapThreshold& threshold) {
    if (n_challengers < 1) throw ConfigError("need at least one challenger");
    const TimeGrid& g = spec.grid;
    const int N = g.steps();
    const std::size_t n = noise.n_paths();
    const std::vector<double> base = path_costs(spec, solution.control, noise);

    OptimalityReport report;
    report.optimal_cost = estimate_of(base);
    report.threshold = threshold;
    // Challenger c draws its normals from stream c of the counter generator.
    auto normal = [seed](int c, int j) {
        return counter_normal(seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(j));
    };
    const std::vector<double> constants = {-3.0, -2.0, -1.5, -1.0, 1.0, 1.5, 2.0, 3.0};

    for (int c = 0; c < n_challengers; ++c) {
        ControlPath v = solution.control;
        std::string name;
        switch (c % 3) {
            case 0: {
                // Node-wise deterministic perturbation of v*, projected to U.
                const double scale = 0.1 * (1 + c / 3);
                std::vector<double> bump(static_cast<std::size_t>(N + 1));
                for (std::size_t j = 0; j < bump.size(); ++j) bump[j] = scale * normal(c, static_cast<int>(j));
                for (std::size_t i = 0; i < n; ++i)
                    for (int k = 0; k <= N; ++k)
                        v.at(i, k) = prob.domain.project(v.at(i, k) + bump[static_cast<std::size_t>(k)]);
                name = "perturbation-" + std::to_string(c);
                break;
            }
            case 1: {
                // Bang control in {-1, 1}, switching on blocks of m nodes.
                const int m = g.steps_per_delay();
                std::vector<double> sign(static_cast<std::size_t>(N / m + 1));
                for (std::size_t j = 0; j < sign.size(); ++j) sign[j] = normal(c, static_cast<int>(j)) >= 0.0 ? 1.0 : -1.0;
                v = ControlPath::deterministic(spec, [&](double t) {
                    return sign[static_cast<std::size_t>(g.index_of(t) / m)];
                });
                name = "bang-" + std::to_string(c);
                break;
            }
            default: {
                const double u = 0.5 * std::erfc(-normal(c, 0) / std::sqrt(2.0));
                const std::size_t pick = std::min(constants.size() - 1,
                                                  static_cast<std::size_t>(u * static_cast<double>(constants.size())));
                const double value = prob.domain.project(constants[pick]);
                v = ControlPath::constant(spec, value);
                name = "constant-" + std::to_string(c);
                break;
            }
        }
        for (std::size_t i = 0; i < v.rows(); ++i)
            for (int k = 0; k <= N; ++k)
                if (!prob.domain.contains(v.at(i, k)))
                    throw std::logic_error("challenger " + name + " left the control domain");
        const std::vector<double> costs = path_costs(spec, v, noise);
        Moments diff;
        for (std::size_t i = 0; i < n; ++i) diff.add(costs[i] - base[i]);
        const Estimate e = diff.estimate();
        report.challengers.push_back({name, e, !threshold.violated(e)});
    }
    return report;
}

RiccatiSolution riccati_reference(double A1, double B, double C1, double D, double R1, double L,
                                  double H, double T, int steps) {
    if (!(L > 0.0)) throw ConfigError("Riccati reference requires L > 0");
    if (steps < 1) throw ConfigError("Riccati reference needs at least one step");
    const double gsq = (B + C1 * D) * (B + C1 * D);
    auto rhs = [&](double k) {
        const double denom = L + D * D * k;
        if (!(denom > 0.0)) throw OracleError("Riccati denominator L + D^2 k is not positive");
        return -(2.0 * A1 + C1 * C1) * k - R1 + gsq * k * k / denom;
    };
    RiccatiSolution sol;
    sol.t.resize(static_cast<std::size_t>(steps) + 1);
    sol.k.resize(static_cast<std::size_t>(steps) + 1);
    const double h = T / steps;
    double k = H;
    sol.t.back() = T;
    sol.k.back() = k;
    for (int s = steps; s > 0; --s) {
        // Backward in time: dk/d(-t) = -rhs(k).
        const double k1 = -rhs(k);
        const double k2 = -rhs(k + 0.5 * h * k1);
        const double k3 = -rhs(k + 0.5 * h * k2);
        const double k4 = -rhs(k + h * k3);
        k += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(k) || std::abs(k) > 1e12)
            throw OracleError("Riccati solution blows up at t = " + std::to_string((s - 1) * h));
        sol.t[static_cast<std::size_t>(s - 1)] = (s - 1) * h;
        sol.k[static_cast<std::size_t>(s - 1)] = k;
    }
    return sol;
}

}  // namespace sdmp
