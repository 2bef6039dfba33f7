#include "kernels.hpp"

#include <cmath>

namespace sdmp::detail {

void check_inputs(const ProblemSpec& spec, const ControlPath& control, const NoiseEnsemble& noise) {
    if (!spec.coefficients) throw ConfigError("problem has no coefficients");
    if (!(noise.grid() == spec.grid)) throw ConfigError("noise ensemble grid differs from problem grid");
    if (!(control.grid() == spec.grid)) throw ConfigError("control grid differs from problem grid");
    if (control.per_path() && control.rows() != noise.n_paths())
        throw ConfigError("control has " + std::to_string(control.rows()) + " paths but noise has " +
                          std::to_string(noise.n_paths()));
}

std::vector<double> initial_state_values(const ProblemSpec& spec) {
    const TimeGrid& g = spec.grid;
    std::vector<double> xi;
    xi.reserve(static_cast<std::size_t>(g.steps_per_delay() + 1));
    for (int k = -g.steps_per_delay(); k <= 0; ++k) xi.push_back(spec.initial_state(g.time(k)));
    return xi;
}

void forward_path(const ProblemSpec& spec, std::span<const double> xi, std::span<const double> u,
                  std::span<const double> dB, std::span<double> x, std::span<ThetaRecord> records,
                  std::size_t path) {
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    const int n = g.steps();
    const double dt = g.dt();
    for (int k = -m; k <= 0; ++k) x[static_cast<std::size_t>(k + m)] = xi[static_cast<std::size_t>(k + m)];
    const Coefficients& c = spec.coeffs();
    for (int k = 0; k < n; ++k) {
        const ThetaRecord r = theta_eval(c, point_at(g, x, u, k));
        const std::size_t i = static_cast<std::size_t>(k + m);
        const double next = x[i] + r.b.value * dt + r.sigma.value * dB[static_cast<std::size_t>(k)];
        if (!std::isfinite(next)) throw SimulationError(path, k, "state is not finite");
        x[i + 1] = next;
        if (!records.empty()) records[static_cast<std::size_t>(k)] = r;
    }
}

double path_cost(const ProblemSpec& spec, std::span<const ThetaRecord> records,
                 std::span<const double> x) {
    double running = 0.0;
    for (const auto& r : records) running += r.cost.value;
    return running * spec.grid.dt() + spec.coeffs().terminal(x.back()).value;
}

ThetaRecord spike_difference(const ProblemSpec& spec, std::span<const double> x,
                             std::span<const double> u, std::span<const double> ue,
                             const ThetaRecord& base, int k) {
    const int m = spec.grid.steps_per_delay();
    const std::size_t i = static_cast<std::size_t>(k + m);
    if (ue[i] == u[i] && ue[i - m] == u[i - m]) return {};
    const ThetaRecord e = theta_eval(spec.coeffs(), point_at(spec.grid, x, ue, k));
    return {difference(e.b, base.b), difference(e.sigma, base.sigma), difference(e.cost, base.cost)};
}

void variation_path(const ProblemSpec& spec, std::span<const double> x, std::span<const double> u,
                    std::span<const double> ue, std::span<const double> dB,
                    std::span<const ThetaRecord> records, std::span<double> x1,
                    std::span<double> x2, std::size_t path) {
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    const int n = g.steps();
    const double dt = g.dt();
    const bool second = !x2.empty();
    // Both variations stay exactly zero up to the first node the spike changes.
    int start = n;
    for (int k = 0; k < n; ++k) {
        if (ue[static_cast<std::size_t>(k + m)] != u[static_cast<std::size_t>(k + m)]) {
            start = k;
            break;
        }
    }
    for (int k = -m; k <= start; ++k) {
        x1[static_cast<std::size_t>(k + m)] = 0.0;
        if (second) x2[static_cast<std::size_t>(k + m)] = 0.0;
    }
    for (int k = start; k < n; ++k) {
        const std::size_t i = static_cast<std::size_t>(k + m);
        const ThetaRecord& r = records[static_cast<std::size_t>(k)];
        const ThetaRecord d = spike_difference(spec, x, u, ue, r, k);
        const double w = dB[static_cast<std::size_t>(k)];
        const double a = x1[i];
        const double ad = x1[i - m];
        x1[i + 1] = a + (r.b.d_x * a + r.b.d_xd * ad + d.b.value) * dt +
                    (r.sigma.d_x * a + r.sigma.d_xd * ad + d.sigma.value) * w;
        if (!std::isfinite(x1[i + 1])) throw SimulationError(path, k, "first variation is not finite");
        if (!second) continue;
        const double y = x2[i];
        const double yd = x2[i - m];
        auto source = [&](const Partials& c, const Partials& dc) {
            return c.d_x * y + c.d_xd * yd + dc.d_x * a + dc.d_xd * ad + 0.5 * c.d_xx * a * a +
                   c.d_xxd * a * ad + 0.5 * c.d_xdxd * ad * ad;
        };
        x2[i + 1] = y + source(r.b, d.b) * dt + source(r.sigma, d.sigma) * w;
        if (!std::isfinite(x2[i + 1])) throw SimulationError(path, k, "second variation is not finite");
    }
}

double vi_lhs_path(const ProblemSpec& spec, std::span<const double> x, std::span<const double> u,
                   std::span<const double> ue, std::span<const ThetaRecord> records,
                   std::span<const double> x1, std::span<const double> x2) {
    const TimeGrid& g = spec.grid;
    const int m = g.steps_per_delay();
    const int n = g.steps();
    double running = 0.0;
    for (int k = 0; k < n; ++k) {
        const std::size_t i = static_cast<std::size_t>(k + m);
        const Partials& L = records[static_cast<std::size_t>(k)].cost;
        const double a = x1[i];
        const double ad = x1[i - m];
        const double s = a + x2[i];
        const double sd = ad + x2[i - m];
        const ThetaRecord d = spike_difference(spec, x, u, ue, records[static_cast<std::size_t>(k)], k);
        running += L.d_x * s + L.d_xd * sd + 0.5 * L.d_xx * a * a + 0.5 * L.d_xdxd * ad * ad +
                   L.d_xxd * a * ad + d.cost.value;
    }
    const TerminalRecord h = spec.coeffs().terminal(x.back());
    const double aT = x1.back();
    return running * g.dt() + h.d_x * (aT + x2.back()) + 0.5 * h.d_xx * aT * aT;
}

}  // namespace sdmp::detail
