#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sdmp {

// Monte Carlo estimate of a mean with its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

// Running sum and sum of squares. Merging in a fixed order keeps results
// independent of how samples were partitioned.
struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    void merge(const Moments& o) {
        sum += o.sum;
        sum_sq += o.sum_sq;
        n += o.n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        const double nn = static_cast<double>(n);
        const double v = (sum_sq - sum * sum / nn) / (nn - 1.0);
        return v > 0.0 ? v : 0.0;
    }
    Estimate estimate() const {
        return {mean(), n ? std::sqrt(variance() / static_cast<double>(n)) : 0.0, n};
    }
};

inline Estimate estimate_of(std::span<const double> xs) {
    Moments m;
    for (double x : xs) m.add(x);
    return m.estimate();
}

// Least-squares slope of log(y) against log(x). Entries with y <= 0 are skipped;
// returns NaN when fewer than two points remain.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace sdmp
