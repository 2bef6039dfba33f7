#include "sdmp/timegrid.hpp"

#include <cmath>
#include <sstream>

#include "sdmp/errors.hpp"

namespace sdmp {

namespace {
constexpr double kNodeTolerance = 1e-9;
}

TimeGrid TimeGrid::make(double horizon, double delay, int steps_per_delay) {
    std::ostringstream msg;
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        msg << "horizon T must be positive and finite, got T=" << horizon;
        throw ConfigError(msg.str());
    }
    if (!(delay > 0.0) || delay > horizon) {
        msg << "delay must satisfy 0 < delta <= T, got delta=" << delay << ", T=" << horizon;
        throw ConfigError(msg.str());
    }
    if (steps_per_delay < 1) {
        msg << "steps per delay m must be >= 1, got m=" << steps_per_delay;
        throw ConfigError(msg.str());
    }
    const double dt = delay / steps_per_delay;
    const double ratio = horizon / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > kNodeTolerance * rounded) {
        msg.precision(17);
        msg << "step dt=delta/m=" << dt << " (delta=" << delay << ", m=" << steps_per_delay
            << ") does not divide T=" << horizon << ": T/dt=" << ratio << " is not an integer";
        throw ConfigError(msg.str());
    }
    return TimeGrid(horizon, delay, steps_per_delay, static_cast<int>(rounded));
}

bool TimeGrid::is_node(double t) const {
    const double r = t / dt_;
    const double k = std::round(r);
    return std::abs(r - k) <= kNodeTolerance * std::max(1.0, std::abs(k)) && k >= first_node() &&
           k <= last_node();
}

int TimeGrid::index_of(double t) const {
    if (!is_node(t)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "time " << t << " is not a node of the grid with dt=" << dt_;
        throw ConfigError(msg.str());
    }
    return static_cast<int>(std::round(t / dt_));
}

TimeGrid TimeGrid::refined(int factor) const {
    if (factor < 1) throw ConfigError("refinement factor must be >= 1");
    return make(horizon_, delay_, m_ * factor);
}

}  // namespace sdmp
