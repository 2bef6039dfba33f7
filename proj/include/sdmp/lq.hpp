#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdmp/adjoint.hpp"
#include "sdmp/forward.hpp"
#include "sdmp/maximum_principle.hpp"

namespace sdmp {

// dx = (A1 x + A2 x_delta + B v) dt + (C1 x + C2 x_delta + D v) dB,
// J = E[ int (R1 x^2 + R2 x_delta^2 + L v^2) / 2 dt + H x(T)^2 / 2 ], x = a on [-delta, 0].
struct LQProblem {
    double A1 = 0.1, A2 = 0.05, B = 1.0, C1 = 0.2, C2 = 0.1, D = 0.3;
    double R1 = 1.0, R2 = 0.5, L = 1.0, H = 1.0;
    double a = 1.0;
    double delta = 0.25;
    double T = 1.0;
    ControlDomain domain = ControlDomain::punctured_unit();

    // C2 != 0, R1, R2, H >= 0, L > 0. Throws ConfigError.
    void validate() const;

    static LQProblem benchmark() { return {}; }
    // A2 = R2 = 0, C2 = 1e-3, U = R: the classical problem up to a tiny delayed noise.
    static LQProblem no_delay_reduction();

    friend bool operator==(const LQProblem&, const LQProblem&) = default;
};

class LinearQuadraticCoefficients final : public Coefficients {
public:
    explicit LinearQuadraticCoefficients(const LQProblem& prob) : prob_(prob) {}

    std::string name() const override { return "linear-quadratic"; }
    ThetaRecord evaluate(const Point& p) const override;
    TerminalRecord terminal(double x) const override;
    CoefficientBounds bounds() const override;

private:
    LQProblem prob_;
};

// Problem spec on the grid (T, delta, m) with xi = a and eta = projection of 0.
ProblemSpec lq_problem_spec(const LQProblem& prob, int steps_per_delay);

// Unconstrained minimiser -(pB + qD)/L of the Hamiltonian in v.
inline double lq_unconstrained(double p, double q, const LQProblem& prob) {
    return -(p * prob.B + q * prob.D) / prob.L;
}

// Maps the unconstrained minimiser u into U: on (-inf, -1] U [1, inf), u if
// |u| >= 1, 1 if 0 <= u < 1, -1 if -1 < u < 0. Other domains use the nearest
// point of U and set *outside_law (when given).
double lq_control_law(double u, const ControlDomain& domain, bool* outside_law = nullptr);

inline double lq_candidate_control(double p, double q, const LQProblem& prob,
                                   bool* outside_law = nullptr) {
    return lq_control_law(lq_unconstrained(p, q, prob), prob.domain, outside_law);
}

// Placement of the R2 x(t) term in the first adjoint (and R2 / 2 in the
// second). Truncated keeps it inside the anticipated bracket, so it acts on
// [0, T - delta] only; AsWritten applies it on all of [0, T].
enum class R2Placement { Truncated, AsWritten };

struct PicardOptions {
    int max_iters = 100;
    double damping = 0.5;
    // Halve the damping (down to min_damping) whenever the policy change grows.
    bool adaptive = true;
    double min_damping = 1.0 / 64.0;
    double tolerance = 1e-4;
    AdjointOptions adjoint;
    R2Placement r2 = R2Placement::Truncated;
    bool solve_second = true;
};

struct LQSolution {
    ControlPath control;  // v* per path on nodes [-m, N], feedback-evaluated
    PathMatrix states;
    FirstAdjoint first;
    SecondAdjoint second;  // empty when not requested
    CostEstimate cost;
    bool converged = false;
    int iterations = 0;
    // Per iteration: sup over nodes of the path-RMS change of the policy w
    // and of the control v, both evaluated at the current states.
    std::vector<double> w_changes;
    std::vector<double> v_changes;
    bool outside_law = false;  // the domain is not the punctured unit set
};

// Damped Picard iteration on a feedback policy w_k(x(t_k), x(t_k - delta)),
// a regression polynomial per node. Each sweep simulates the closed loop
// v = law(w), solves the first adjoint, and refits
//   w <- w + theta (-(pB + qD)/L - w)
// on the current states. Starts from w = 0 (so v = 1). Non-convergence is
// reported, not thrown.
LQSolution solve_lq(const LQProblem& prob, const ProblemSpec& spec, const NoiseEnsemble& noise,
                    const PicardOptions& options = {});

// Adjoint options for the LQ problem, including the R2 placement.
AdjointOptions lq_adjoint_options(const LQProblem& prob, const ProblemSpec& spec,
                                  const PathMatrix& states, const PicardOptions& options);

struct ChallengerResult {
    std::string name;
    Estimate difference;  // J(v) - J(v*), paired under common noise
    bool passed = false;
};

struct OptimalityReport {
    std::vector<ChallengerResult> challengers;
    Estimate optimal_cost;
    GapThreshold threshold;
    bool passed() const;
};

// Admissible challengers: perturbations of v* projected to U, bang controls in
// {-1, 1}, and constants in U, generated from `seed`.
OptimalityReport verify_optimality(const LQProblem& prob, const ProblemSpec& spec,
                                   const LQSolution& solution, const NoiseEnsemble& noise,
                                   int n_challengers, std::uint64_t seed,
                                   const GapThreshold& threshold);

// Classical scalar Riccati equation
//   k' = -(2 A1 + C1^2) k - R1 + (B + C1 D)^2 k^2 / (L + D^2 k),  k(T) = H,
// integrated backward with classical RK4.
struct RiccatiSolution {
    std::vector<double> t;
    std::vector<double> k;
    double value(double a) const { return 0.5 * k.front() * a * a; }
    double gain(std::size_t i, double B, double C1, double D, double L) const {
        return -(B * k[i] + C1 * D * k[i]) / (L + D * D * k[i]);
    }
};

RiccatiSolution riccati_reference(double A1, double B, double C1, double D, double R1, double L,
                                  double H, double T, int steps = 20000);

}  // namespace sdmp
