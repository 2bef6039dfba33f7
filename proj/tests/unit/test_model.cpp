#include <doctest.h>

#include <cmath>
#include <string>

#include "sdmp/coefficients.hpp"
#include "sdmp/errors.hpp"
#include "sdmp/expression.hpp"
#include "sdmp/lq.hpp"
#include "sdmp/problems.hpp"

using namespace sdmp;

namespace {

std::array<double, kVarCount> at(double t, double x, double xd, double v, double vd) { return {t, x, xd, v, vd}; }

}  // namespace

TEST_SUITE("model") {

TEST_CASE("expression parsing and evaluation") {
    const Expression e = Expression::parse("2*x^2 - 3*x*xd + sin(v)/2 + 1");
    const auto p = at(0.0, 1.5, -2.0, 0.7, 0.0);
    CHECK(e.eval(p) == doctest::Approx(2 * 2.25 + 9.0 + std::sin(0.7) / 2 + 1));
    CHECK(e.depends_on(Var::X));
    CHECK(e.depends_on(Var::V));
    CHECK_FALSE(e.depends_on(Var::T));
    CHECK(Expression::parse("-(x - 1)^2").eval(at(0, 3, 0, 0, 0)) == -4.0);
    CHECK(Expression::parse("0*x").is_zero());
    CHECK(Expression::parse("x - x").is_zero());
}

TEST_CASE("expression derivatives are exact") {
    const Expression e = Expression::parse("x^3*xd + cos(x)*sin(xd) + 0.5*t*v^2");
    const auto p = at(0.3, 0.8, -0.4, 1.2, 0.0);
    const double x = 0.8, xd = -0.4;
    CHECK(e.derivative(Var::X).eval(p) == doctest::Approx(3 * x * x * xd - std::sin(x) * std::sin(xd)));
    CHECK(e.derivative(Var::Xd).eval(p) == doctest::Approx(x * x * x + std::cos(x) * std::cos(xd)));
    CHECK(e.derivative(Var::X).derivative(Var::X).eval(p) ==
          doctest::Approx(6 * x * xd - std::cos(x) * std::sin(xd)));
    CHECK(e.derivative(Var::V).eval(p) == doctest::Approx(0.3 * 1.2));
    CHECK(Expression::parse("5").derivative(Var::X).is_zero());
}

TEST_CASE("expression text round-trips") {
    const Expression e = Expression::parse("0.1*x + 0.2*sin(xd)^2 - v*vd/4");
    const Expression f = Expression::parse(e.to_string());
    const auto p = at(0.1, 0.2, 0.3, 0.4, 0.5);
    CHECK(f.eval(p) == e.eval(p));
    CHECK(f.to_string() == e.to_string());
}

TEST_CASE("malformed expressions name the column") {
    try {
        Expression::parse("x + * 2");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("column 5") != std::string::npos);
    }
    CHECK_THROWS_AS(Expression::parse("x / xd"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("exp(x)"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("x^-1"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("(x + 1"), ConfigError);
    CHECK_THROWS_AS(ExpressionCoefficients("bad", "x", "xd", "0", "x*v"), ConfigError);
}

TEST_CASE("theta_eval names the first non-finite entry") {
    const ExpressionCoefficients c("big", "x^3", "xd", "0", "x");
    CHECK_NOTHROW(theta_eval(c, {0.0, 1.0, 1.0, 0.0, 0.0}));
    CHECK_THROWS_AS(theta_eval(c, {0.0, 1e200, 1.0, 0.0, 0.0}), EvaluationError);
}

TEST_CASE("declared derivatives of every built-in problem pass the audit") {
    AuditOptions opt;
    opt.n_samples = 300;
    for (const auto& name : problem_names()) {
        CAPTURE(name);
        const ProblemSpec spec = make_named_problem(name, 4);
        opt.domain = spec.domain;
        const DerivativeReport rep = check_derivatives(spec.coeffs(), opt);
        CHECK(rep.passed());
        CHECK_FALSE(rep.sigma_xd_flag);
    }
}

TEST_CASE("the audit flags a wrong declared derivative") {
    struct Wrong final : Coefficients {
        std::string name() const override { return "wrong"; }
        ThetaRecord evaluate(const Point& p) const override {
            ThetaRecord r;
            r.b = {p.x * p.x, p.x, 0, 1, 0, 0};  // d_x should be 2x; d_xx matches d_x
            r.sigma = {p.xd, 0, 1, 0, 0, 0};
            return r;
        }
        TerminalRecord terminal(double x) const override { return {x, 1, 0}; }
    };
    const DerivativeReport rep = check_derivatives(Wrong{}, {});
    CHECK_FALSE(rep.passed());
    CHECK(rep.entry("b_x").error_flag);
    CHECK_FALSE(rep.entry("b_xx").error_flag);
}

TEST_CASE("LQ coefficients match the dynamics") {
    const LQProblem prob;
    const LinearQuadraticCoefficients c(prob);
    const ThetaRecord r = c.evaluate({0.2, 1.5, -0.5, 2.0, -1.0});
    CHECK(r.b.value == doctest::Approx(0.1 * 1.5 + 0.05 * -0.5 + 2.0));
    CHECK(r.sigma.value == doctest::Approx(0.2 * 1.5 + 0.1 * -0.5 + 0.3 * 2.0));
    CHECK(r.cost.value == doctest::Approx(0.5 * (1.5 * 1.5 + 0.5 * 0.25 + 4.0)));
    CHECK(r.sigma.d_xd == 0.1);
    CHECK(c.terminal(2.0).value == 2.0);
}

}  // TEST_SUITE
