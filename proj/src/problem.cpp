#include "sdmp/problem.hpp"

#include <cmath>
#include <sstream>

#include "sdmp/errors.hpp"

namespace sdmp {

PathMatrix::PathMatrix(std::size_t n_paths, int first_node, int last_node, double fill)
    : n_paths_(n_paths),
      first_(first_node),
      last_(last_node),
      width_(static_cast<std::size_t>(last_node - first_node + 1)),
      data_(n_paths * width_, fill) {}

void ProblemSpec::validate() const {
    if (!coefficients) throw ConfigError("problem has no coefficients");
    const int m = grid.steps_per_delay();
    for (int k = -m; k <= 0; ++k) {
        const double t = grid.time(k);
        const double xi = initial_state(t);
        const double eta = initial_control(t);
        if (!std::isfinite(xi))
            throw ConfigError("initial state is not finite at t=" + std::to_string(t));
        if (!std::isfinite(eta))
            throw ConfigError("initial control is not finite at t=" + std::to_string(t));
        if (!domain.contains(eta))
            throw DomainError("initial control " + std::to_string(eta) + " at t=" +
                              std::to_string(t) + " is outside U = " + domain.describe());
    }
}

ControlPath ControlPath::constant(const ProblemSpec& spec, double value) {
    return deterministic(spec, [value](double) { return value; });
}

ControlPath ControlPath::deterministic(const ProblemSpec& spec,
                                       const std::function<double(double)>& f) {
    const TimeGrid& g = spec.grid;
    PathMatrix values(1, g.first_node(), g.steps());
    for (int k = g.first_node(); k < 0; ++k) values(0, k) = spec.initial_control(g.time(k));
    for (int k = 0; k <= g.steps(); ++k) values(0, k) = f(g.time(k));
    return ControlPath(g, std::move(values), false);
}

ControlPath ControlPath::ensemble(const ProblemSpec& spec, std::size_t n_paths, double fill) {
    const TimeGrid& g = spec.grid;
    PathMatrix values(n_paths, g.first_node(), g.steps(), fill);
    for (std::size_t i = 0; i < n_paths; ++i)
        for (int k = g.first_node(); k < 0; ++k) values(i, k) = spec.initial_control(g.time(k));
    return ControlPath(g, std::move(values), true);
}

void ControlPath::check_domain(const ControlDomain& domain) const {
    for (std::size_t i = 0; i < values_.n_paths(); ++i) {
        for (int k = values_.first_node(); k <= values_.last_node(); ++k) {
            const double v = values_(i, k);
            if (!domain.contains(v)) {
                std::ostringstream msg;
                msg << "control value " << v << " on path " << i << " at node " << k
                    << " is outside U = " << domain.describe();
                throw DomainError(msg.str());
            }
        }
    }
}

}  // namespace sdmp
