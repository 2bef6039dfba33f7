#include "sdmp/problems.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "sdmp/errors.hpp"
#include "sdmp/expression.hpp"

namespace sdmp {

namespace {

std::string literal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "(%.17g)", v);
    return buf;
}

}  // namespace

ThetaRecord NonlinearDelayCoefficients::evaluate(const Point& pt) const {
    const NonlinearParams& p = p_;
    const double sx = std::sin(pt.x), cx = std::cos(pt.x);
    const double sd = std::sin(pt.xd), cd = std::cos(pt.xd);
    const double v = pt.v;
    ThetaRecord r;
    r.b.value = p.a1 * pt.x + p.a2 * pt.xd + p.gb * sx + p.mb * sx * cd + p.b1 * v + p.b2 * pt.vd +
                p.kb * v * cx;
    r.b.d_x = p.a1 + p.gb * cx + p.mb * cx * cd - p.kb * v * sx;
    r.b.d_xd = p.a2 - p.mb * sx * sd;
    r.b.d_xx = -p.gb * sx - p.mb * sx * cd - p.kb * v * cx;
    r.b.d_xxd = -p.mb * cx * sd;
    r.b.d_xdxd = -p.mb * sx * cd;

    r.sigma.value = p.s1 * pt.x + p.s2 * pt.xd + p.gs * sd + p.es * sx * sd + p.d1 * v + p.ks * v * sx;
    r.sigma.d_x = p.s1 + p.es * cx * sd + p.ks * v * cx;
    r.sigma.d_xd = p.s2 + p.gs * cd + p.es * sx * cd;
    r.sigma.d_xx = -p.es * sx * sd - p.ks * v * sx;
    r.sigma.d_xxd = p.es * cx * cd;
    r.sigma.d_xdxd = -p.gs * sd - p.es * sx * sd;

    r.cost.value = 0.5 * p.r1 * pt.x * pt.x + 0.5 * p.r2 * pt.xd * pt.xd + 0.5 * p.l * v * v +
                   p.lam * v * sx;
    r.cost.d_x = p.r1 * pt.x + p.lam * v * cx;
    r.cost.d_xd = p.r2 * pt.xd;
    r.cost.d_xx = p.r1 - p.lam * v * sx;
    r.cost.d_xxd = 0.0;
    r.cost.d_xdxd = p.r2;
    return r;
}

TerminalRecord NonlinearDelayCoefficients::terminal(double x) const {
    return {0.5 * p_.hq * x * x + p_.hc * std::cos(x), p_.hq * x - p_.hc * std::sin(x),
            p_.hq - p_.hc * std::cos(x)};
}

CoefficientBounds NonlinearDelayCoefficients::bounds() const {
    CoefficientBounds b;
    const NonlinearParams& p = p_;
    b.sigma_xd_lower = p.s2 - std::abs(p.gs) - std::abs(p.es);
    b.b[2] = std::abs(p.a2) + std::abs(p.mb);
    b.b[4] = std::abs(p.mb);
    b.b[5] = std::abs(p.mb);
    b.sigma[2] = std::abs(p.s2) + std::abs(p.gs) + std::abs(p.es);
    b.sigma[4] = std::abs(p.es);
    b.sigma[5] = std::abs(p.gs) + std::abs(p.es);
    b.cost[4] = 0.0;
    b.cost[5] = std::abs(p.r2);
    b.terminal[2] = std::abs(p.hq) + std::abs(p.hc);
    return b;
}

ProblemSpec nonlinear_benchmark(const TimeGrid& grid, const NonlinearParams& params) {
    ProblemSpec spec;
    spec.coefficients = std::make_shared<NonlinearDelayCoefficients>(params);
    spec.domain = ControlDomain::punctured_unit();
    spec.initial_state = [](double) { return 1.0; };
    spec.initial_control = [](double) { return 1.0; };
    spec.grid = grid;
    spec.validate();
    return spec;
}

ProblemSpec FirstAdjointOracle::problem(int steps_per_delay) const {
    ProblemSpec spec;
    CoefficientBounds bounds;
    bounds.sigma_xd_lower = std::abs(s);
    spec.coefficients = std::make_shared<ExpressionCoefficients>(
        "first-adjoint-oracle", literal(c) + "*x", literal(s) + "*xd", "0", "x", bounds);
    const double x = x0;
    spec.initial_state = [x](double) { return x; };
    spec.initial_control = [](double) { return 0.0; };
    spec.grid = TimeGrid::make(1.0, 1.0, steps_per_delay);
    spec.validate();
    return spec;
}

double FirstAdjointOracle::exact_p(double t) const { return std::exp(c * (1.0 - t)); }

ProblemSpec SecondAdjointOracle::problem(int steps_per_delay) const {
    ProblemSpec spec;
    CoefficientBounds bounds;
    bounds.sigma_xd_lower = std::abs(c2);
    spec.coefficients = std::make_shared<ExpressionCoefficients>(
        "second-adjoint-oracle", literal(a1) + "*x + " + literal(a2) + "*xd",
        literal(c1) + "*x + " + literal(c2) + "*xd", literal(0.5 * r) + "*x^2", literal(0.5 * hq) + "*x^2", bounds);
    const double x = x0;
    spec.initial_state = [x](double) { return x; };
    spec.initial_control = [](double) { return 0.0; };
    spec.grid = TimeGrid::make(T, T, steps_per_delay);
    spec.validate();
    return spec;
}

double SecondAdjointOracle::alpha() const {
    const double beta = a2 / c2;
    const double kappa = beta - c1;
    return 2.0 * a1 + c1 * c1 + 2.0 * kappa * (beta + c1);
}

double SecondAdjointOracle::exact_P(double t) const {
    const double al = alpha();
    const double src = 0.5 * r;
    const double PT = 0.5 * hq;
    if (al == 0.0) return PT + src * (T - t);
    return (PT + src / al) * std::exp(al * (T - t)) - src / al;
}

ProblemSpec control_delay_problem(const TimeGrid& grid) {
    ProblemSpec spec;
    spec.coefficients = std::make_shared<ExpressionCoefficients>(
        "control-delay", "0.2*x + v + 0.5*vd + 0.3*sin(x)", "0.3*x + 0.4*v + 0.1*vd",
        "0.5*x^2 + 0.5*v^2 + 0.1*v*vd", "0.5*x^2");
    spec.domain = ControlDomain::real_line();
    spec.initial_state = [](double) { return 1.0; };
    spec.initial_control = [](double) { return 0.0; };
    spec.grid = grid;
    spec.validate();
    return spec;
}

std::vector<std::string> problem_names() {
    return {"lq-benchmark", "lq-no-delay", "nonlinear-benchmark", "first-adjoint-oracle",
            "second-adjoint-oracle", "control-delay"};
}

ProblemSpec make_named_problem(const std::string& name, int steps_per_delay) {
    if (name == "lq-benchmark") return lq_problem_spec(LQProblem::benchmark(), steps_per_delay);
    if (name == "lq-no-delay") return lq_problem_spec(LQProblem::no_delay_reduction(), steps_per_delay);
    if (name == "nonlinear-benchmark")
        return nonlinear_benchmark(TimeGrid::make(1.0, 0.25, steps_per_delay));
    if (name == "first-adjoint-oracle") return FirstAdjointOracle{}.problem(steps_per_delay);
    if (name == "second-adjoint-oracle") return SecondAdjointOracle{}.problem(steps_per_delay);
    if (name == "control-delay") return control_delay_problem(TimeGrid::make(1.0, 0.25, steps_per_delay));
    std::string known;
    for (const auto& n : problem_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown problem '" + name + "' (known: " + known + ")");
}

}  // namespace sdmp
