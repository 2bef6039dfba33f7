#include "sdmp/forward.hpp"

#include <cmath>
#include <sstream>

#include "kernels.hpp"
#include "sdmp/errors.hpp"
#include "sdmp/parallel.hpp"

namespace sdmp {

namespace {

constexpr std::size_t kBlock = 256;

template <class Fn>
void for_each_path(std::size_t n_paths, Fn fn) {
    const std::size_t blocks = parallel::block_count(n_paths, kBlock);
    parallel::for_each_block(blocks, [&](std::size_t b) {
        const auto r = parallel::block_range(b, n_paths, kBlock);
        fn(r);
    });
}

std::vector<double> row_with_spike(std::span<const double> u, const SpikeNodes& nodes, int m,
                                   double value) {
    std::vector<double> ue(u.begin(), u.end());
    for (int k = nodes.begin; k < nodes.end; ++k) ue[static_cast<std::size_t>(k + m)] = value;
    return ue;
}

void check_base(const PathMatrix& base, const NoiseEnsemble& noise, const TimeGrid& g,
                const char* what) {
    if (base.n_paths() != noise.n_paths() || base.first_node() != g.first_node() ||
        base.last_node() != g.steps())
        throw ConfigError(std::string(what) + " does not match the grid and noise ensemble");
}

}  // namespace

SpikeNodes resolve_spike(const SpikeSpec& spike, const TimeGrid& grid, const ControlDomain& domain) {
    if (!(spike.epsilon > 0.0)) throw ConfigError("spike width must be positive");
    if (!grid.is_node(spike.tau)) throw ConfigError("spike time " + std::to_string(spike.tau) + " is not a grid node");
    if (!grid.is_node(spike.tau + spike.epsilon))
        throw ConfigError("spike width " + std::to_string(spike.epsilon) + " is not a multiple of dt");
    const int k0 = grid.index_of(spike.tau);
    const int k1 = grid.index_of(spike.tau + spike.epsilon);
    if (k0 < 0 || k1 > grid.steps())
        throw ConfigError("spike interval [" + std::to_string(spike.tau) + ", " +
                          std::to_string(spike.tau + spike.epsilon) + "] is not inside [0, T]");
    if (!domain.contains(spike.value))
        throw DomainError("spike value " + std::to_string(spike.value) + " is outside U = " +
                          domain.describe());
    return {k0, k1};
}

PathMatrix simulate_state(const ProblemSpec& spec, const ControlPath& control,
                          const NoiseEnsemble& noise) {
    detail::check_inputs(spec, control, noise);
    const TimeGrid& g = spec.grid;
    const auto xi = detail::initial_state_values(spec);
    PathMatrix x(noise.n_paths(), g.first_node(), g.steps());
    for_each_path(noise.n_paths(), [&](parallel::BlockRange r) {
        std::vector<double> dB(static_cast<std::size_t>(g.steps()));
        for (std::size_t i = r.begin; i < r.end; ++i) {
            noise.fill_path(i, dB);
            detail::forward_path(spec, xi, control.row(i), dB, x.row(i), {}, i);
        }
    });
    return x;
}

std::vector<double> path_costs(const ProblemSpec& spec, const ControlPath& control,
                               const NoiseEnsemble& noise) {
    detail::check_inputs(spec, control, noise);
    const TimeGrid& g = spec.grid;
    const auto xi = detail::initial_state_values(spec);
    std::vector<double> costs(noise.n_paths());
    for_each_path(noise.n_paths(), [&](parallel::BlockRange r) {
        std::vector<double> dB(static_cast<std::size_t>(g.steps()));
        std::vector<double> x(g.node_count() - static_cast<std::size_t>(g.steps_per_delay()));
        std::vector<ThetaRecord> rec(static_cast<std::size_t>(g.steps()));
        for (std::size_t i = r.begin; i < r.end; ++i) {
            noise.fill_path(i, dB);
            detail::forward_path(spec, xi, control.row(i), dB, x, rec, i);
            costs[i] = detail::path_cost(spec, rec, x);
        }
    });
    return costs;
}

CostEstimate evaluate_cost(const ProblemSpec& spec, const ControlPath& control,
                           const NoiseEnsemble& noise) {
    return estimate_of(path_costs(spec, control, noise));
}

ControlPath apply_spike(const ControlPath& u, const SpikeSpec& spike, const ProblemSpec& spec) {
    const SpikeNodes nodes = resolve_spike(spike, spec.grid, spec.domain);
    ControlPath out = u;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (int k = nodes.begin; k < nodes.end; ++k) out.at(i, k) = spike.value;
    return out;
}

PathMatrix simulate_first_variation(const ProblemSpec& spec, const ControlPath& u,
                                    const SpikeSpec& spike, const NoiseEnsemble& noise,
                                    const PathMatrix& base) {
    PathMatrix none;
    return simulate_second_variation(spec, u, spike, noise, base, none);
}

// With an empty x1 this computes x1 only; otherwise it recomputes x1 (which is
// cheap and bit-identical) alongside x2 and returns x2.
PathMatrix simulate_second_variation(const ProblemSpec& spec, const ControlPath& u,
                                     const SpikeSpec& spike, const NoiseEnsemble& noise,
                                     const PathMatrix& base, const PathMatrix& x1) {
    detail::check_inputs(spec, u, noise);
    const TimeGrid& g = spec.grid;
    check_base(base, noise, g, "base state ensemble");
    const bool second = x1.n_paths() > 0;
    if (second) check_base(x1, noise, g, "first variation ensemble");
    const SpikeNodes nodes = resolve_spike(spike, g, spec.domain);
    const int m = g.steps_per_delay();
    PathMatrix out(noise.n_paths(), g.first_node(), g.steps());
    for_each_path(noise.n_paths(), [&](parallel::BlockRange r) {
        std::vector<double> dB(static_cast<std::size_t>(g.steps()));
        std::vector<ThetaRecord> rec(static_cast<std::size_t>(g.steps()));
        std::vector<double> y1(base.width());
        for (std::size_t i = r.begin; i < r.end; ++i) {
            noise.fill_path(i, dB);
            const auto x = base.row(i);
            const auto urow = u.row(i);
            for (int k = 0; k < g.steps(); ++k)
                rec[static_cast<std::size_t>(k)] = theta_eval(spec.coeffs(), detail::point_at(g, x, urow, k));
            const auto ue = row_with_spike(urow, nodes, m, spike.value);
            if (second) {
                detail::variation_path(spec, x, urow, ue, dB, rec, y1, out.row(i), i);
            } else {
                detail::variation_path(spec, x, urow, ue, dB, rec, out.row(i), {}, i);
            }
        }
    });
    return out;
}

CostEstimate variational_inequality_lhs(const ProblemSpec& spec, const ControlPath& u,
                                        const SpikeSpec& spike, const NoiseEnsemble& noise,
                                        const PathMatrix& base, const PathMatrix& x1,
                                        const PathMatrix& x2) {
    detail::check_inputs(spec, u, noise);
    const TimeGrid& g = spec.grid;
    check_base(base, noise, g, "base state ensemble");
    check_base(x1, noise, g, "first variation ensemble");
    check_base(x2, noise, g, "second variation ensemble");
    const SpikeNodes nodes = resolve_spike(spike, g, spec.domain);
    std::vector<double> values(noise.n_paths());
    for_each_path(noise.n_paths(), [&](parallel::BlockRange r) {
        std::vector<ThetaRecord> rec(static_cast<std::size_t>(g.steps()));
        for (std::size_t i = r.begin; i < r.end; ++i) {
            const auto x = base.row(i);
            const auto urow = u.row(i);
            for (int k = 0; k < g.steps(); ++k)
                rec[static_cast<std::size_t>(k)] = theta_eval(spec.coeffs(), detail::point_at(g, x, urow, k));
            const auto ue = row_with_spike(urow, nodes, g.steps_per_delay(), spike.value);
            values[i] = detail::vi_lhs_path(spec, x, urow, ue, rec, x1.row(i), x2.row(i));
        }
    });
    return estimate_of(values);
}

namespace {

struct RungAcc {
    std::vector<Moments> x1, x2, res;
    Moments vi, lhs, rhs, diff;
};

struct LadderAcc {
    std::vector<RungAcc> rungs;
};

SupEstimate sup_of(const std::vector<Moments>& nodes) {
    SupEstimate s;
    bool first = true;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Estimate e = nodes[k].estimate();
        if (first || e.mean > s.value) {
            s = {e.mean, e.std_error, static_cast<int>(k)};
            first = false;
        }
    }
    return s;
}

}  // namespace

std::vector<LadderRung> spike_ladder_study(const ProblemSpec& spec, const ControlPath& u,
                                           const NoiseEnsemble& noise,
                                           const LadderOptions& options) {
    detail::check_inputs(spec, u, noise);
    if (options.epsilons.empty()) throw ConfigError("epsilon ladder is empty");
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    const int n = g.steps();
    const std::size_t width = g.node_count() - static_cast<std::size_t>(m);
    const std::size_t nodes_0N = static_cast<std::size_t>(n + 1);
    std::vector<SpikeNodes> spikes;
    for (double eps : options.epsilons)
        spikes.push_back(resolve_spike({options.tau, eps, options.value}, g, spec.domain));
    const auto xi = detail::initial_state_values(spec);
    const std::size_t n_rungs = spikes.size();
    const bool second = options.second_order;

    auto make = [&] {
        LadderAcc acc;
        acc.rungs.resize(n_rungs);
        for (auto& r : acc.rungs) {
            r.x1.resize(nodes_0N);
            if (second) {
                r.x2.resize(nodes_0N);
                r.res.resize(nodes_0N);
            }
        }
        return acc;
    };
    auto process = [&](parallel::BlockRange range, LadderAcc& acc) {
        std::vector<double> dB(static_cast<std::size_t>(n));
        std::vector<double> x(width), xe(width), x1(width), x2(second ? width : 0);
        std::vector<ThetaRecord> rec(static_cast<std::size_t>(n));
        for (std::size_t i = range.begin; i < range.end; ++i) {
            noise.fill_path(i, dB);
            const auto urow = u.row(i);
            detail::forward_path(spec, xi, urow, dB, x, rec, i);
            for (std::size_t r = 0; r < n_rungs; ++r) {
                RungAcc& ra = acc.rungs[r];
                const auto ue = row_with_spike(urow, spikes[r], m, options.value);
                detail::variation_path(spec, x, urow, ue, dB, rec, x1, x2, i);
                for (std::size_t k = 0; k < nodes_0N; ++k) {
                    const double a = x1[k + static_cast<std::size_t>(m)];
                    ra.x1[k].add(a * a);
                }
                if (second) {
                    detail::forward_path(spec, xi, ue, dB, xe, {}, i);
                    for (std::size_t k = 0; k < nodes_0N; ++k) {
                        const std::size_t j = k + static_cast<std::size_t>(m);
                        ra.x2[k].add(x2[j] * x2[j]);
                        const double e = xe[j] - x[j] - x1[j] - x2[j];
                        ra.res[k].add(e * e);
                    }
                    ra.vi.add(detail::vi_lhs_path(spec, x, urow, ue, rec, x1, x2));
                }
                if (options.cross_term) {
                    double lhs = 0.0, rhs = 0.0;
                    for (int k = 0; k < n; ++k) {
                        const ThetaRecord& t = rec[static_cast<std::size_t>(k)];
                        const double sxd = t.sigma.d_xd;
                        if (!(std::abs(sxd) >= options.guard))
                            throw GuardError("|sigma_xd| = " + std::to_string(std::abs(sxd)) +
                                             " below guard at node " + std::to_string(k) +
                                             " on path " + std::to_string(i) +
                                             " (sigma_xd must stay bounded away from zero)");
                        const std::size_t j = static_cast<std::size_t>(k + m);
                        lhs += sxd * x1[j] * x1[j - static_cast<std::size_t>(m)];
                        rhs += (t.b.d_xd / sxd - t.sigma.d_x) * x1[j] * x1[j];
                    }
                    lhs *= g.dt();
                    rhs *= g.dt();
                    ra.lhs.add(lhs);
                    ra.rhs.add(rhs);
                    ra.diff.add(lhs - rhs);
                }
            }
        }
    };
    auto merge = [&](LadderAcc& total, LadderAcc& part) {
        for (std::size_t r = 0; r < n_rungs; ++r) {
            RungAcc& t = total.rungs[r];
            RungAcc& p = part.rungs[r];
            for (std::size_t k = 0; k < t.x1.size(); ++k) t.x1[k].merge(p.x1[k]);
            for (std::size_t k = 0; k < t.x2.size(); ++k) t.x2[k].merge(p.x2[k]);
            for (std::size_t k = 0; k < t.res.size(); ++k) t.res[k].merge(p.res[k]);
            t.vi.merge(p.vi);
            t.lhs.merge(p.lhs);
            t.rhs.merge(p.rhs);
            t.diff.merge(p.diff);
        }
    };
    const LadderAcc total = parallel::blocked_reduce<LadderAcc>(
        noise.n_paths(), options.block_size, make, process, merge);

    std::vector<LadderRung> out;
    for (std::size_t r = 0; r < n_rungs; ++r) {
        const RungAcc& ra = total.rungs[r];
        LadderRung rung;
        rung.epsilon = options.epsilons[r];
        rung.x1_sq = sup_of(ra.x1);
        if (second) {
            rung.x2_sq = sup_of(ra.x2);
            rung.residual_sq = sup_of(ra.res);
            rung.vi_lhs = ra.vi.estimate();
        }
        if (options.cross_term) {
            rung.cross_lhs = ra.lhs.estimate();
            rung.cross_rhs = ra.rhs.estimate();
            rung.cross_residual = ra.diff.estimate();
        }
        out.push_back(rung);
    }
    return out;
}

std::vector<SupEstimate> expansion_residual(const ProblemSpec& spec, const ControlPath& u,
                                            double tau, double value,
                                            const std::vector<double>& epsilons,
                                            const NoiseEnsemble& noise) {
    LadderOptions opt;
    opt.tau = tau;
    opt.value = value;
    opt.epsilons = epsilons;
    opt.cross_term = false;
    std::vector<SupEstimate> out;
    for (const auto& r : spike_ladder_study(spec, u, noise, opt)) out.push_back(r.residual_sq);
    return out;
}

std::vector<double> dyadic_ladder(double delta, int first, int last) {
    std::vector<double> eps;
    for (int j = first; j <= last; ++j) eps.push_back(std::ldexp(delta, -j));
    return eps;
}

}  // namespace sdmp
