#pragma once

// Per-path building blocks shared by the forward, adjoint and LQ modules.

#include <span>
#include <vector>

#include "sdmp/coefficients.hpp"
#include "sdmp/errors.hpp"
#include "sdmp/noise.hpp"
#include "sdmp/problem.hpp"

namespace sdmp::detail {

// Throws ConfigError unless the noise, control and spec share one grid.
void check_inputs(const ProblemSpec& spec, const ControlPath& control, const NoiseEnsemble& noise);

std::vector<double> initial_state_values(const ProblemSpec& spec);

// x spans nodes [-m, N], u spans [-m, N], dB has N entries, records has N
// entries (or is empty to skip storing them).
void forward_path(const ProblemSpec& spec, std::span<const double> xi, std::span<const double> u,
                  std::span<const double> dB, std::span<double> x,
                  std::span<ThetaRecord> records, std::size_t path);

double path_cost(const ProblemSpec& spec, std::span<const ThetaRecord> records,
                 std::span<const double> x);

inline Point point_at(const TimeGrid& g, std::span<const double> x, std::span<const double> u,
                      int k) {
    const int m = g.steps_per_delay();
    const std::size_t i = static_cast<std::size_t>(k + m);
    return {g.time(k), x[i], x[i - m], u[i], u[i - m]};
}

inline Partials difference(const Partials& a, const Partials& b) {
    return {a.value - b.value, a.d_x - b.d_x,   a.d_xd - b.d_xd,
            a.d_xx - b.d_xx,   a.d_xxd - b.d_xxd, a.d_xdxd - b.d_xdxd};
}

// Theta^eps - Theta at node k; exactly zero when neither u(t_k) nor
// u(t_k - delta) is changed by the spike.
ThetaRecord spike_difference(const ProblemSpec& spec, std::span<const double> x,
                             std::span<const double> u, std::span<const double> ue,
                             const ThetaRecord& base, int k);

// First and (optionally) second variation of one path. x2 may be empty.
void variation_path(const ProblemSpec& spec, std::span<const double> x, std::span<const double> u,
                    std::span<const double> ue, std::span<const double> dB,
                    std::span<const ThetaRecord> records, std::span<double> x1,
                    std::span<double> x2, std::size_t path);

// Left side of the variational inequality for one path.
double vi_lhs_path(const ProblemSpec& spec, std::span<const double> x, std::span<const double> u,
                   std::span<const double> ue, std::span<const ThetaRecord> records,
                   std::span<const double> x1, std::span<const double> x2);

inline void copy_row(std::span<const double> from, std::span<double> to) {
    std::copy(from.begin(), from.end(), to.begin());
}

}  // namespace sdmp::detail
