#include "sdmp/adjoint.hpp"

#include <cmath>
#include <sstream>

#include "kernels.hpp"
#include "sdmp/errors.hpp"
#include "sdmp/parallel.hpp"

namespace sdmp {

namespace {

constexpr std::size_t kBlock = 1024;

using Column = std::vector<double>;

void check_states(const PathMatrix& states, const NoiseEnsemble& noise, const TimeGrid& g) {
    if (states.n_paths() != noise.n_paths() || states.first_node() != g.first_node() ||
        states.last_node() != g.steps())
        throw ConfigError("state ensemble does not match the grid and noise ensemble");
}

// Theta records of every path at node k.
void records_at(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states, int k,
                std::vector<ThetaRecord>& out) {
    const std::size_t n = states.n_paths();
    out.resize(n);
    const int m = spec.grid.steps_per_delay();
    const double t = spec.grid.time(k);
    parallel::for_each_block(parallel::block_count(n, kBlock), [&](std::size_t b) {
        const auto r = parallel::block_range(b, n, kBlock);
        for (std::size_t i = r.begin; i < r.end; ++i) {
            const Point p{t, states(i, k), states(i, k - m), u.at(i, k), u.at(i, k - m)};
            out[i] = theta_eval(spec.coeffs(), p);
        }
    });
}

Column column(const PathMatrix& a, int k) {
    Column c(a.n_paths());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a(i, k);
    return c;
}

Column increments(const NoiseEnsemble& noise, int k) {
    Column c(noise.n_paths());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = noise.increment(i, k);
    return c;
}

void guard_sigma_xd(double sxd, double guard, std::size_t path, int k) {
    if (std::abs(sxd) >= guard) return;
    std::ostringstream msg;
    msg << "|sigma_xd| = " << std::abs(sxd) << " < " << guard << " on path " << path
        << " at node " << k << "; sigma_xd must be bounded away from zero";
    throw GuardError(msg.str());
}

void require_delay_free(const ThetaRecord& r, std::size_t path, int k) {
    auto bad = [](const Partials& c) { return c.d_xd != 0.0 || c.d_xxd != 0.0 || c.d_xdxd != 0.0; };
    const char* which = bad(r.b) ? "b" : bad(r.sigma) ? "sigma" : bad(r.cost) ? "L" : nullptr;
    if (!which) return;
    throw StructuralError(std::string("problem declared free of state delay but ") + which +
                          " has a nonzero x_delta derivative on path " + std::to_string(path) +
                          " at node " + std::to_string(k));
}

Regressor regressor_at(const PathMatrix& states, int k, int m, const AdjointOptions& options) {
    const Column x = column(states, k);
    if (options.delay_free) return Regressor(x, {}, options.regression, k);
    const Column xd = column(states, k - m);
    return Regressor(x, xd, options.regression, k);
}

PathMatrix to_matrix(const std::vector<Column>& cols, std::size_t n, int last_node) {
    PathMatrix out(n, 0, last_node);
    for (std::size_t k = 0; k < cols.size(); ++k)
        for (std::size_t i = 0; i < n; ++i) out(i, static_cast<int>(k)) = cols[k][i];
    return out;
}

}  // namespace

void check_delay_free(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states) {
    std::vector<ThetaRecord> rec;
    for (int k = 0; k < spec.grid.steps(); ++k) {
        records_at(spec, u, states, k, rec);
        for (std::size_t i = 0; i < rec.size(); ++i) require_delay_free(rec[i], i, k);
    }
}

FirstAdjoint solve_first_adjoint(const ProblemSpec& spec, const ControlPath& u,
                                 const PathMatrix& states, const NoiseEnsemble& noise,
                                 const AdjointOptions& options) {
    detail::check_inputs(spec, u, noise);
    const TimeGrid& g = spec.grid;
    check_states(states, noise, g);
    const int m = g.steps_per_delay();
    const int N = g.steps();
    const double dt = g.dt();
    const std::size_t n = noise.n_paths();

    std::vector<Column> p(static_cast<std::size_t>(N + m + 1), Column(n, 0.0));
    std::vector<Column> q(static_cast<std::size_t>(N + m + 1), Column(n, 0.0));
    std::vector<Column> G(static_cast<std::size_t>(N));  // anticipated integrand at node j
    for (std::size_t i = 0; i < n; ++i) p[N][i] = spec.coeffs().terminal(states(i, N)).d_x;

    std::vector<ThetaRecord> rec;
    Column yhat(n), target(n), qk(n), ant(n);
    for (int k = N - 1; k >= 0; --k) {
        records_at(spec, u, states, k, rec);
        if (options.delay_free)
            for (std::size_t i = 0; i < n; ++i) require_delay_free(rec[i], i, k);
        const Regressor reg = regressor_at(states, k, m, options);
        const Column dB = increments(noise, k);
        const Column& next = p[static_cast<std::size_t>(k + 1)];
        reg.project(next, yhat);
        for (std::size_t i = 0; i < n; ++i) target[i] = (next[i] - yhat[i]) * dB[i] / dt;
        reg.project(target, qk);
        const bool anticipated = !options.delay_free && k + m <= N - 1;
        if (anticipated) reg.project(G[static_cast<std::size_t>(k + m)], ant);
        Column& pk = p[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < n; ++i) {
            const ThetaRecord& r = rec[i];
            double drive = r.b.d_x * yhat[i] + r.sigma.d_x * qk[i] + r.cost.d_x;
            if (anticipated) drive += ant[i];
            if (options.extra_first_driver) drive += options.extra_first_driver(i, k);
            pk[i] = yhat[i] + drive * dt;
        }
        q[static_cast<std::size_t>(k)] = qk;
        if (!options.delay_free) {
            Column& Gk = G[static_cast<std::size_t>(k)];
            Gk.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                Gk[i] = rec[i].b.d_xd * pk[i] + rec[i].sigma.d_xd * qk[i] + rec[i].cost.d_xd;
        }
    }
    return {to_matrix(p, n, N + m), to_matrix(q, n, N + m)};
}

SecondAdjoint solve_second_adjoint(const ProblemSpec& spec, const ControlPath& u,
                                   const PathMatrix& states, const FirstAdjoint& first,
                                   const NoiseEnsemble& noise, const AdjointOptions& options) {
    detail::check_inputs(spec, u, noise);
    const TimeGrid& g = spec.grid;
    check_states(states, noise, g);
    const int m = g.steps_per_delay();
    const int N = g.steps();
    const double dt = g.dt();
    const std::size_t n = noise.n_paths();
    if (first.p.n_paths() != n || first.p.last_node() != N + m)
        throw ConfigError("first adjoint does not match the state ensemble");

    std::vector<Column> P(static_cast<std::size_t>(N + m + 1), Column(n, 0.0));
    std::vector<Column> Q(static_cast<std::size_t>(N + m + 1), Column(n, 0.0));
    std::vector<Column> S(static_cast<std::size_t>(N));
    for (std::size_t i = 0; i < n; ++i) P[N][i] = 0.5 * spec.coeffs().terminal(states(i, N)).d_xx;

    std::vector<ThetaRecord> rec;
    Column yhat(n), target(n), Qk(n), ant(n);
    for (int k = N - 1; k >= 0; --k) {
        records_at(spec, u, states, k, rec);
        if (options.delay_free)
            for (std::size_t i = 0; i < n; ++i) require_delay_free(rec[i], i, k);
        const Regressor reg = regressor_at(states, k, m, options);
        const Column dB = increments(noise, k);
        const Column& next = P[static_cast<std::size_t>(k + 1)];
        reg.project(next, yhat);
        for (std::size_t i = 0; i < n; ++i) target[i] = (next[i] - yhat[i]) * dB[i] / dt;
        reg.project(target, Qk);
        const bool anticipated = !options.delay_free && k + m <= N - 1;
        if (anticipated) reg.project(S[static_cast<std::size_t>(k + m)], ant);
        Column& Pk = P[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < n; ++i) {
            const ThetaRecord& r = rec[i];
            const double pp = first.p(i, k);
            const double qq = first.q(i, k);
            const double Hxx = r.cost.d_xx + pp * r.b.d_xx + qq * r.sigma.d_xx;
            const double sx = r.sigma.d_x;
            const double Y = yhat[i];
            double F = 2.0 * r.b.d_x * Y + sx * sx * Y + 2.0 * sx * Qk[i] + 0.5 * Hxx;
            if (!options.delay_free) {
                const double sxd = r.sigma.d_xd;
                guard_sigma_xd(sxd, options.guard, i, k);
                const double beta = r.b.d_xd / sxd;
                const double Hxxd = r.cost.d_xxd + pp * r.b.d_xxd + qq * r.sigma.d_xxd;
                F += (beta - sx) * (2.0 * beta * Y + 2.0 * sx * Y + 2.0 * Qk[i] + Hxxd / sxd);
                if (anticipated) F += ant[i];
            }
            if (options.extra_second_driver) F += options.extra_second_driver(i, k);
            Pk[i] = Y + F * dt;
        }
        Q[static_cast<std::size_t>(k)] = Qk;
        if (!options.delay_free) {
            Column& Sk = S[static_cast<std::size_t>(k)];
            Sk.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const ThetaRecord& r = rec[i];
                const double Hxdxd = r.cost.d_xdxd + first.p(i, k) * r.b.d_xdxd +
                                     first.q(i, k) * r.sigma.d_xdxd;
                Sk[i] = r.sigma.d_xd * r.sigma.d_xd * Pk[i] + 0.5 * Hxdxd;
            }
        }
    }
    return {to_matrix(P, n, N + m), to_matrix(Q, n, N + m)};
}

PathMatrix simulate_P0(const ProblemSpec& spec, const ControlPath& u, const PathMatrix& states,
                       const NoiseEnsemble& noise, double guard) {
    detail::check_inputs(spec, u, noise);
    const TimeGrid& g = spec.grid;
    check_states(states, noise, g);
    const int N = g.steps();
    const double dt = g.dt();
    const std::size_t n = noise.n_paths();
    PathMatrix P0(n, 0, N);
    parallel::for_each_block(parallel::block_count(n, kBlock), [&](std::size_t b) {
        const auto range = parallel::block_range(b, n, kBlock);
        std::vector<double> dB(static_cast<std::size_t>(N));
        for (std::size_t i = range.begin; i < range.end; ++i) {
            noise.fill_path(i, dB);
            const auto x = states.row(i);
            const auto urow = u.row(i);
            double log_p = 0.0;
            P0(i, 0) = 1.0;
            for (int k = 0; k < N; ++k) {
                const ThetaRecord r = theta_eval(spec.coeffs(), detail::point_at(g, x, urow, k));
                guard_sigma_xd(r.sigma.d_xd, guard, i, k);
                const double beta = r.b.d_xd / r.sigma.d_xd;
                const double alpha = r.b.d_x - beta * r.sigma.d_x;
                log_p += (-alpha - 0.5 * beta * beta) * dt - beta * dB[static_cast<std::size_t>(k)];
                P0(i, k + 1) = std::exp(log_p);
            }
        }
    });
    return P0;
}

PathMatrix cross_term_phi(const PathMatrix& P0, const PathMatrix& Phi, const PathMatrix& x1,
                          const NoiseEnsemble& noise) {
    const int N = noise.steps();
    const std::size_t n = noise.n_paths();
    if (P0.n_paths() != n || x1.n_paths() != n)
        throw ConfigError("cross-term inputs have different path counts");
    PathMatrix phi(n, 0, N);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        phi(i, N) = 0.0;
        for (int k = N - 1; k >= 0; --k) {
            const double w = Phi(Phi.n_paths() == 1 ? 0 : i, k);
            acc += w * x1(i, k) / P0(i, k) * noise.increment(i, k);
            phi(i, k) = -acc;
        }
    }
    return phi;
}

PathMatrix phi_constant(const TimeGrid& grid, std::size_t n_paths, double value) {
    return PathMatrix(n_paths, 0, grid.steps() - 1, value);
}

PathMatrix phi_hessian_ratio(const ProblemSpec& spec, const ControlPath& u,
                             const PathMatrix& states, const FirstAdjoint& first, double guard) {
    const TimeGrid& g = spec.grid;
    const std::size_t n = states.n_paths();
    PathMatrix phi(n, 0, g.steps() - 1);
    std::vector<ThetaRecord> rec;
    for (int k = 0; k < g.steps(); ++k) {
        records_at(spec, u, states, k, rec);
        for (std::size_t i = 0; i < n; ++i) {
            const ThetaRecord& r = rec[i];
            guard_sigma_xd(r.sigma.d_xd, guard, i, k);
            const double Hxxd =
                r.cost.d_xxd + first.p(i, k) * r.b.d_xxd + first.q(i, k) * r.sigma.d_xxd;
            phi(i, k) = Hxxd / r.sigma.d_xd;
        }
    }
    return phi;
}

std::vector<CrossTermRow> cross_term_check(const ProblemSpec& spec, const ControlPath& u,
                                           double tau, double value,
                                           const std::vector<double>& epsilons,
                                           const NoiseEnsemble& noise, const PathMatrix& Phi,
                                           double guard) {
    detail::check_inputs(spec, u, noise);
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    const int N = g.steps();
    if (Phi.n_paths() != 1 && Phi.n_paths() != noise.n_paths())
        throw ConfigError("Phi must have one row or one row per path");
    const PathMatrix states = simulate_state(spec, u, noise);
    std::vector<ThetaRecord> rec;
    // sigma_xd and the rhs weight do not depend on the spike.
    PathMatrix sxd(noise.n_paths(), 0, N - 1), weight(noise.n_paths(), 0, N - 1);
    for (int k = 0; k < N; ++k) {
        records_at(spec, u, states, k, rec);
        for (std::size_t i = 0; i < rec.size(); ++i) {
            guard_sigma_xd(rec[i].sigma.d_xd, guard, i, k);
            sxd(i, k) = rec[i].sigma.d_xd;
            weight(i, k) = rec[i].b.d_xd / rec[i].sigma.d_xd - rec[i].sigma.d_x;
        }
    }
    std::vector<CrossTermRow> rows;
    for (double eps : epsilons) {
        const PathMatrix x1 = simulate_first_variation(spec, u, {tau, eps, value}, noise, states);
        Moments lhs, rhs, res;
        for (std::size_t i = 0; i < noise.n_paths(); ++i) {
            const std::size_t pi = Phi.n_paths() == 1 ? 0 : i;
            double l = 0.0, r = 0.0;
            for (int k = 0; k < N; ++k) {
                const double a = x1(i, k);
                l += sxd(i, k) * Phi(pi, k) * a * x1(i, k - m);
                r += weight(i, k) * Phi(pi, k) * a * a;
            }
            l *= g.dt();
            r *= g.dt();
            lhs.add(l);
            rhs.add(r);
            res.add(l - r);
        }
        rows.push_back({eps, lhs.estimate(), rhs.estimate(), res.estimate()});
    }
    return rows;
}

DualityReport duality_check(const ProblemSpec& spec, const ControlPath& u,
                            const PathMatrix& states, const FirstAdjoint& first,
                            const SpikeSpec& spike, const NoiseEnsemble& noise) {
    detail::check_inputs(spec, u, noise);
    const TimeGrid& g = spec.grid;
    check_states(states, noise, g);
    const int m = g.steps_per_delay();
    const int N = g.steps();
    const SpikeNodes nodes = resolve_spike(spike, g, spec.domain);
    const PathMatrix x1 = simulate_first_variation(spec, u, spike, noise, states);
    Moments term, run, gap;
    std::vector<double> ue(static_cast<std::size_t>(N + m + 1));
    for (std::size_t i = 0; i < noise.n_paths(); ++i) {
        const auto x = states.row(i);
        const auto urow = u.row(i);
        std::copy(urow.begin(), urow.end(), ue.begin());
        for (int k = nodes.begin; k < nodes.end; ++k) ue[static_cast<std::size_t>(k + m)] = spike.value;
        double r = 0.0;
        for (int k = 0; k < N; ++k) {
            const ThetaRecord rec = theta_eval(spec.coeffs(), detail::point_at(g, x, urow, k));
            const ThetaRecord d = detail::spike_difference(spec, x, urow, ue, rec, k);
            r += first.p(i, k) * d.b.value + first.q(i, k) * d.sigma.value -
                 rec.cost.d_x * x1(i, k) - rec.cost.d_xd * x1(i, k - m);
        }
        r *= g.dt();
        const double t = spec.coeffs().terminal(states(i, N)).d_x * x1(i, N);
        term.add(t);
        run.add(r);
        gap.add(t - r);
    }
    return {term.estimate(), run.estimate(), gap.estimate()};
}

}  // namespace sdmp
