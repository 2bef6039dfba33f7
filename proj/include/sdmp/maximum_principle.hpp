#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sdmp/adjoint.hpp"
#include "sdmp/coefficients.hpp"
#include "sdmp/noise.hpp"

namespace sdmp {

// H = L + p b + q sigma at an evaluation record.
inline double hamiltonian(const ThetaRecord& r, double p, double q) {
    return r.cost.value + p * r.b.value + q * r.sigma.value;
}

// Negative-gap threshold z * stderr + C * dt.
struct GapThreshold {
    double z = 3.0;
    double C = 0.0;
    double dt = 0.0;

    double allowance(const Estimate& e) const { return z * e.std_error + C * dt; }
    bool violated(const Estimate& e) const { return e.mean < -allowance(e); }
};

struct GapRecord {
    double tau = 0.0;
    double v = 0.0;
    Estimate gap;
};

struct MPGapReport {
    std::vector<GapRecord> records;  // ascending by gap
    GapThreshold threshold;

    const GapRecord& min() const { return records.front(); }
    std::size_t violations() const;
    bool passed() const { return violations() == 0; }
};

struct GapOptions {
    // Adds P(tau) (sigma(v) - sigma(u))^2; without it the gap is the
    // first-order condition for control-free diffusions.
    bool second_order = true;
    // Evaluate without the x_delta argument; requires a delay-free problem.
    bool delay_free = false;
};

// Mean over paths of H(v, u(tau - delta)) - H(u(tau), u(tau - delta))
// + P(tau) [sigma(v, u(tau - delta)) - sigma(u(tau), u(tau - delta))]^2.
// `second` may be null when second_order is false.
Estimate mp_gap(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                const FirstAdjoint& first, const SecondAdjoint* second, double tau, double v,
                const GapOptions& options = {});

// Gap of the delay-free reduction; throws StructuralError if b, sigma or L has
// a nonzero x_delta derivative at tau on any path.
Estimate mp_gap_case2(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                      const FirstAdjoint& first, const SecondAdjoint& second, double tau,
                      double v);

// Gaps over the product tau_set x v_set.
// `count` cells with tau drawn uniformly from the nodes t_0 .. t_{N-1} and v
// uniformly from `values`, both from the counter generator keyed by `seed`.
std::vector<std::pair<double, double>> random_cells(const TimeGrid& grid, std::size_t count,
                                                    const std::vector<double>& values,
                                                    std::uint64_t seed);

MPGapReport mp_scan(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                    const FirstAdjoint& first, const SecondAdjoint* second,
                    const std::vector<double>& tau_set, const std::vector<double>& v_set,
                    const GapThreshold& threshold, const GapOptions& options = {});

// Gaps at explicit (tau, v) cells.
MPGapReport mp_scan_cells(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                          const FirstAdjoint& first, const SecondAdjoint* second,
                          const std::vector<std::pair<double, double>>& cells,
                          const GapThreshold& threshold, const GapOptions& options = {});

}  // namespace sdmp
