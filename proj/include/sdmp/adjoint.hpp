#pragma once

#include <functional>
#include <vector>

#include "sdmp/forward.hpp"
#include "sdmp/noise.hpp"
#include "sdmp/problem.hpp"
#include "sdmp/regression.hpp"
#include "sdmp/stats.hpp"

namespace sdmp {

// Additive driver term g(path, k) contributing g * dt to the adjoint at node k.
using DriverTerm = std::function<double(std::size_t path, int node)>;

struct AdjointOptions {
    RegressionOptions regression;
    // Lower bound on |sigma_xd| wherever it is divided by.
    double guard = 1e-6;
    // Problems whose b, sigma, L do not depend on x_delta: no anticipated
    // terms, no cross-term block, regression on x(t) only. Verified pointwise.
    bool delay_free = false;
    DriverTerm extra_first_driver;
    DriverTerm extra_second_driver;
};

// (p, q) on nodes [0, N + m]; p = 0 on (T, T + delta], q = 0 on [T, T + delta].
struct FirstAdjoint {
    PathMatrix p;
    PathMatrix q;
};

// (P, Q) on nodes [0, N + m] with the same extension convention.
struct SecondAdjoint {
    PathMatrix P;
    PathMatrix Q;
};

// Backward regression sweep for the first-order anticipated BSDE
//   -dp = [b_x p + sigma_x q + L_x + E_t(b_xd p + sigma_xd q + L_xd)(t + delta)] dt - q dB.
FirstAdjoint solve_first_adjoint(const ProblemSpec& spec, const ControlPath& u,
                                 const PathMatrix& states, const NoiseEnsemble& noise,
                                 const AdjointOptions& options = {});

// Backward regression sweep for the second-order anticipated BSDE.
SecondAdjoint solve_second_adjoint(const ProblemSpec& spec, const ControlPath& u,
                                   const PathMatrix& states, const FirstAdjoint& first,
                                   const NoiseEnsemble& noise, const AdjointOptions& options = {});

// Stochastic exponential P0(t) = exp(int_0^t (-alpha - beta^2 / 2) ds - int_0^t beta dB),
// alpha = b_x - beta sigma_x, beta = b_xd / sigma_xd; nodes [0, N].
PathMatrix simulate_P0(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                       const NoiseEnsemble& noise, double guard = 1e-6);

// phi(t_k) = -sum_{j >= k} P0_j^{-1} Phi_j x1_j dB_j on nodes [0, N]; phi(T) = 0.
PathMatrix cross_term_phi(const PathMatrix& P0, const PathMatrix& Phi, const PathMatrix& x1,
                          const NoiseEnsemble& noise);

// Weight process Phi on nodes [0, N - 1].
PathMatrix phi_constant(const TimeGrid& grid, std::size_t n_paths, double value);
// Phi = H_xxd / sigma_xd along the given state and adjoint ensembles.
PathMatrix phi_hessian_ratio(const ProblemSpec& spec, const ControlPath& u,
                             const PathMatrix& states, const FirstAdjoint& first,
                             double guard = 1e-6);

struct CrossTermRow {
    double epsilon = 0.0;
    Estimate lhs;       // E sum sigma_xd Phi x1 x1_delta dt
    Estimate rhs;       // E sum (b_xd / sigma_xd - sigma_x) Phi x1^2 dt
    Estimate residual;  // lhs - rhs, pathwise
};

// Cross-term identity over an epsilon ladder with spikes (tau, eps, value).
std::vector<CrossTermRow> cross_term_check(const ProblemSpec& spec, const ControlPath& u,
                                           double tau, double value,
                                           const std::vector<double>& epsilons,
                                           const NoiseEnsemble& noise, const PathMatrix& Phi,
                                           double guard = 1e-6);

struct DualityReport {
    Estimate terminal;  // E h_x(x(T)) x1(T)
    Estimate running;   // E sum [p db + q dsigma - L_x x1 - L_xd x1_delta] dt
    Estimate gap;       // terminal - running, pathwise
};

// Discrete integration by parts of p x1 for one spike.
DualityReport duality_check(const ProblemSpec& spec, const ControlPath& u,
                            const PathMatrix& states, const FirstAdjoint& first,
                            const SpikeSpec& spike, const NoiseEnsemble& noise);

// Throws StructuralError if any x_delta derivative of b, sigma or L is nonzero
// along the ensemble.
void check_delay_free(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states);

}  // namespace sdmp
