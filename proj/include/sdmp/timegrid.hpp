#pragma once

#include <cstddef>

namespace sdmp {

// Uniform partition of [-delta, T + delta] whose step divides the delay
// exactly: dt = delta / m. Node k sits at time k * dt, for k in [-m, N + m]
// with N = T / dt, so the delayed node of k is always k - m.
class TimeGrid {
public:
    // Throws ConfigError when T / dt is not integral or the inputs are out of range.
    static TimeGrid make(double horizon, double delay, int steps_per_delay);

    double horizon() const { return horizon_; }
    double delay() const { return delay_; }
    int steps_per_delay() const { return m_; }
    double dt() const { return dt_; }
    // Number of steps on [0, T].
    int steps() const { return n_; }

    int first_node() const { return -m_; }
    int last_node() const { return n_ + m_; }
    std::size_t node_count() const { return static_cast<std::size_t>(n_ + 2 * m_ + 1); }

    double time(int k) const { return static_cast<double>(k) * delay_ / static_cast<double>(m_); }
    int delayed(int k) const { return k - m_; }
    int advanced(int k) const { return k + m_; }

    // Index of the node at time t. Throws ConfigError if t is not a node.
    int index_of(double t) const;
    bool is_node(double t) const;

    // Same T and delta with `factor` times more steps per delay.
    TimeGrid refined(int factor) const;

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.horizon_ == b.horizon_ && a.delay_ == b.delay_ && a.m_ == b.m_;
    }

private:
    TimeGrid(double horizon, double delay, int m, int n)
        : horizon_(horizon), delay_(delay), m_(m), n_(n), dt_(delay / m) {}

    double horizon_;
    double delay_;
    int m_;
    int n_;
    double dt_;
};

}  // namespace sdmp
