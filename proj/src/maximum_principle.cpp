#include "sdmp/maximum_principle.hpp"

#include <algorithm>
#include <cmath>

#include "sdmp/errors.hpp"
#include "sdmp/parallel.hpp"

namespace sdmp {

std::size_t MPGapReport::violations() const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [&](const GapRecord& r) { return threshold.violated(r.gap); }));
}

Estimate mp_gap(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                const FirstAdjoint& first, const SecondAdjoint* second, double tau, double v,
                const GapOptions& options) {
    const TimeGrid& g = spec.grid;
    if (!g.is_node(tau)) throw ConfigError("gap time " + std::to_string(tau) + " is not a grid node");
    const int k = g.index_of(tau);
    if (k < 0 || k >= g.steps())
        throw ConfigError("gap time " + std::to_string(tau) + " is outside [0, T)");
    if (!spec.domain.contains(v))
        throw DomainError("gap value " + std::to_string(v) + " is outside U = " + spec.domain.describe());
    if (options.second_order && !second)
        throw ConfigError("second-order gap requested without a second adjoint");
    const int m = g.steps_per_delay();
    const std::size_t n = states.n_paths();
    std::vector<double> gaps(n);
    constexpr std::size_t kBlock = 1024;
    parallel::for_each_block(parallel::block_count(n, kBlock), [&](std::size_t b) {
        const auto r = parallel::block_range(b, n, kBlock);
        for (std::size_t i = r.begin; i < r.end; ++i) {
            const double xd = options.delay_free ? 0.0 : states(i, k - m);
            const Point pu{tau, states(i, k), xd, u.at(i, k), u.at(i, k - m)};
            Point pv = pu;
            pv.v = v;
            const ThetaRecord ru = theta_eval(spec.coeffs(), pu);
            const ThetaRecord rv = theta_eval(spec.coeffs(), pv);
            if (options.delay_free) {
                for (const ThetaRecord* rr : {&ru, &rv}) {
                    for (const Partials* c : {&rr->b, &rr->sigma, &rr->cost}) {
                        if (c->d_xd != 0.0 || c->d_xxd != 0.0 || c->d_xdxd != 0.0)
                            throw StructuralError("problem declared free of state delay has a "
                                                  "nonzero x_delta derivative on path " +
                                                  std::to_string(i) + " at node " + std::to_string(k));
                    }
                }
            }
            const double p = first.p(i, k);
            const double q = first.q(i, k);
            double gap = hamiltonian(rv, p, q) - hamiltonian(ru, p, q);
            if (options.second_order) {
                const double ds = rv.sigma.value - ru.sigma.value;
                gap += second->P(i, k) * ds * ds;
            }
            gaps[i] = gap;
        }
    });
    return estimate_of(gaps);
}

Estimate mp_gap_case2(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                      const FirstAdjoint& first, const SecondAdjoint& second, double tau,
                      double v) {
    GapOptions opt;
    opt.delay_free = true;
    return mp_gap(spec, u, states, first, &second, tau, v, opt);
}

MPGapReport mp_scan_cells(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                          const FirstAdjoint& first, const SecondAdjoint* second,
                          const std::vector<std::pair<double, double>>& cells,
                          const GapThreshold& threshold, const GapOptions& options) {
    if (cells.empty()) throw ConfigError("gap scan has no (tau, v) cells");
    MPGapReport report;
    report.threshold = threshold;
    for (const auto& [tau, v] : cells)
        report.records.push_back({tau, v, mp_gap(spec, u, states, first, second, tau, v, options)});
    std::stable_sort(report.records.begin(), report.records.end(),
                     [](const GapRecord& a, const GapRecord& b) { return a.gap.mean < b.gap.mean; });
    return report;
}

std::vector<std::pair<double, double>> random_cells(const TimeGrid& grid, std::size_t count,
                                                    const std::vector<double>& values,
                                                    std::uint64_t seed) {
    if (values.empty()) throw ConfigError("gap scan has an empty v set");
    auto uniform_index = [seed](std::uint64_t j, std::size_t size) {
        const double u = 0.5 * std::erfc(-counter_normal(seed, 0, j) / std::sqrt(2.0));
        return std::min(size - 1, static_cast<std::size_t>(u * static_cast<double>(size)));
    };
    const std::size_t N = static_cast<std::size_t>(grid.steps());
    std::vector<std::pair<double, double>> cells;
    cells.reserve(count);
    for (std::size_t c = 0; c < count; ++c) {
        const std::size_t k = uniform_index(2 * c, N);
        const std::size_t v = uniform_index(2 * c + 1, values.size());
        cells.emplace_back(grid.time(static_cast<int>(k)), values[v]);
    }
    return cells;
}

MPGapReport mp_scan(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                    const FirstAdjoint& first, const SecondAdjoint* second,
                    const std::vector<double>& tau_set, const std::vector<double>& v_set,
                    const GapThreshold& threshold, const GapOptions& options) {
    if (tau_set.empty()) throw ConfigError("gap scan has an empty tau set");
    if (v_set.empty()) throw ConfigError("gap scan has an empty v set");
    std::vector<std::pair<double, double>> cells;
    for (double tau : tau_set)
        for (double v : v_set) cells.emplace_back(tau, v);
    return mp_scan_cells(spec, u, states, first, second, cells, threshold, options);
}

}  // namespace sdmp
