#pragma once

#include <string>
#include <vector>

#include "sdmp/lq.hpp"
#include "sdmp/problem.hpp"

namespace sdmp {

// Smooth nonlinear delay system with genuinely nonzero second derivatives:
//   b     = a1 x + a2 xd + gb sin x + mb sin x cos xd + b1 v + b2 vd + kb v cos x
//   sigma = s1 x + s2 xd + gs sin xd + es sin x sin xd + d1 v + ks v sin x
//   L     = r1 x^2 / 2 + r2 xd^2 / 2 + l v^2 / 2 + lam v sin x
//   h     = hq x^2 / 2 + hc cos x
// sigma_xd >= s2 - gs - es > 0 everywhere.
struct NonlinearParams {
    double a1 = 0.1, a2 = 0.2, gb = 0.5, mb = 0.2, b1 = 1.0, b2 = 0.3, kb = 0.4;
    double s1 = 0.2, s2 = 0.5, gs = 0.15, es = 0.1, d1 = 0.3, ks = 0.3;
    double r1 = 1.0, r2 = 0.5, l = 1.0, lam = 0.2;
    double hq = 1.0, hc = 0.1;
};

class NonlinearDelayCoefficients final : public Coefficients {
public:
    explicit NonlinearDelayCoefficients(const NonlinearParams& p = {}) : p_(p) {}
    std::string name() const override { return "nonlinear-delay"; }
    ThetaRecord evaluate(const Point& pt) const override;
    TerminalRecord terminal(double x) const override;
    CoefficientBounds bounds() const override;

private:
    NonlinearParams p_;
};

// x = 1 and v = 1 on [-delta, 0], U = (-inf, -1] U [1, inf).
ProblemSpec nonlinear_benchmark(const TimeGrid& grid, const NonlinearParams& params = {});

// b = c x, sigma = s x_delta, L = 0, h = x, T = delta = 1: every anticipated
// term vanishes on [0, T], so p(t) = exp(c (T - t)) and q = 0.
struct FirstAdjointOracle {
    double c = 0.5;
    double s = 0.3;
    double x0 = 1.0;
    ProblemSpec problem(int steps_per_delay) const;
    double exact_p(double t) const;
};

// b = a1 x + a2 xd, sigma = c1 x + c2 xd, L = r x^2 / 2, h = hq x^2 / 2 with
// T = delta: P solves P' = -(alpha P + r / 2), P(T) = hq / 2, where
// alpha = 2 a1 + c1^2 + 2 kappa (beta + c1), beta = a2 / c2, kappa = beta - c1.
struct SecondAdjointOracle {
    double a1 = 0.3, a2 = 0.2, c1 = 0.25, c2 = 0.5, r = 1.0, hq = 2.0;
    double T = 1.0;
    double x0 = 1.0;
    ProblemSpec problem(int steps_per_delay) const;
    double alpha() const;
    double exact_P(double t) const;
};

// Control delay only (b, sigma, L free of x_delta), U = R.
ProblemSpec control_delay_problem(const TimeGrid& grid);

// Names accepted by make_named_problem.
std::vector<std::string> problem_names();

// Built-in problem by name on a grid with the given steps per delay; T and
// delta come from the problem definition. Throws ConfigError for unknown names.
ProblemSpec make_named_problem(const std::string& name, int steps_per_delay);

}  // namespace sdmp
