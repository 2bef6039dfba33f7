#pragma once

#include <cstddef>
#include <vector>

#include "sdmp/noise.hpp"
#include "sdmp/problem.hpp"
#include "sdmp/stats.hpp"

namespace sdmp {

using CostEstimate = Estimate;

// Spike variation u^eps = value on [tau, tau + epsilon), u elsewhere.
struct SpikeSpec {
    double tau = 0.0;
    double epsilon = 0.0;
    double value = 0.0;
};

// Node range [begin, end) replaced by a spike.
struct SpikeNodes {
    int begin = 0;
    int end = 0;
};

// Checks that tau and tau + epsilon are nodes with [tau, tau + eps] inside
// [0, T], epsilon > 0 and value in U. Throws ConfigError / DomainError.
SpikeNodes resolve_spike(const SpikeSpec& spike, const TimeGrid& grid, const ControlDomain& domain);

// Euler-Maruyama paths on nodes [-m, N]; x = xi on [-delta, 0].
PathMatrix simulate_state(const ProblemSpec& spec, const ControlPath& control,
                          const NoiseEnsemble& noise);

// Per-path sum_k L(Theta_k) dt + h(x_N).
std::vector<double> path_costs(const ProblemSpec& spec, const ControlPath& control,
                               const NoiseEnsemble& noise);

CostEstimate evaluate_cost(const ProblemSpec& spec, const ControlPath& control,
                           const NoiseEnsemble& noise);

ControlPath apply_spike(const ControlPath& u, const SpikeSpec& spike, const ProblemSpec& spec);

// First variational equation, forced by b(Theta^eps) - b(Theta) and the sigma
// analogue; x1 = 0 on [-delta, 0].
PathMatrix simulate_first_variation(const ProblemSpec& spec, const ControlPath& u,
                                    const SpikeSpec& spike, const NoiseEnsemble& noise,
                                    const PathMatrix& base);

PathMatrix simulate_second_variation(const ProblemSpec& spec, const ControlPath& u,
                                     const SpikeSpec& spike, const NoiseEnsemble& noise,
                                     const PathMatrix& base, const PathMatrix& x1);

// Full left side of the variational inequality for one spike, per path mean.
CostEstimate variational_inequality_lhs(const ProblemSpec& spec, const ControlPath& u,
                                        const SpikeSpec& spike, const NoiseEnsemble& noise,
                                        const PathMatrix& base, const PathMatrix& x1,
                                        const PathMatrix& x2);

// Supremum over nodes of a node-wise Monte Carlo mean.
struct SupEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int node = 0;
};

// Everything measured for one rung of an epsilon ladder.
struct LadderRung {
    double epsilon = 0.0;
    SupEstimate x1_sq;        // sup_t E|x1|^2
    SupEstimate x2_sq;        // sup_t E|x2|^2
    SupEstimate residual_sq;  // sup_t E|x^eps - x - x1 - x2|^2
    Estimate vi_lhs;          // variational inequality left side
    Estimate cross_lhs;       // E sum sigma_xd Phi x1 x1_delta dt, Phi = 1
    Estimate cross_rhs;       // E sum (b_xd / sigma_xd - sigma_x) Phi x1^2 dt
    Estimate cross_residual;  // lhs - rhs, estimated pathwise
};

struct LadderOptions {
    double tau = 0.0;
    double value = 0.0;
    std::vector<double> epsilons;
    bool second_order = true;  // x2 and the expansion residual
    bool cross_term = true;    // Phi = 1 cross-term identity; needs |sigma_xd| >= guard
    double guard = 1e-6;
    std::size_t block_size = 256;
};

// Streams paths through the base, spiked and variational equations for every
// rung without storing ensembles. All rungs share the same noise.
std::vector<LadderRung> spike_ladder_study(const ProblemSpec& spec, const ControlPath& u,
                                           const NoiseEnsemble& noise,
                                           const LadderOptions& options);

// Expansion residual curve: sup_t E|x^eps - x - x1 - x2|^2 per epsilon.
std::vector<SupEstimate> expansion_residual(const ProblemSpec& spec, const ControlPath& u,
                                            double tau, double value,
                                            const std::vector<double>& epsilons,
                                            const NoiseEnsemble& noise);

// Dyadic ladder {delta/2^first, ..., delta/2^last}.
std::vector<double> dyadic_ladder(double delta, int first, int last);

}  // namespace sdmp
