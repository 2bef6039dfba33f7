#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sdmp/domain.hpp"

namespace sdmp {

// Arguments of b, sigma and L: (t, x(t), x(t - delta), v(t), v(t - delta)).
struct Point {
    double t = 0.0;
    double x = 0.0;
    double xd = 0.0;
    double v = 0.0;
    double vd = 0.0;
};

// A coefficient and its first and second partials in (x, x_delta).
struct Partials {
    double value = 0.0;
    double d_x = 0.0;
    double d_xd = 0.0;
    double d_xx = 0.0;
    double d_xxd = 0.0;
    double d_xdxd = 0.0;
};

// Everything the forward, variational and adjoint equations read at one
// evaluation point Theta(t) (or Theta^eps(t) when evaluated at a spiked control).
struct ThetaRecord {
    Partials b;
    Partials sigma;
    Partials cost;
};

struct TerminalRecord {
    double value = 0.0;
    double d_x = 0.0;
    double d_xx = 0.0;
};

// Declared uniform bounds (infinity when none is claimed). They are metadata:
// uniform boundedness cannot be decided from evaluators, so check_derivatives
// only compares them against sampled magnitudes.
struct CoefficientBounds {
    static constexpr double kNone = std::numeric_limits<double>::infinity();
    std::array<double, 6> b{kNone, kNone, kNone, kNone, kNone, kNone};
    std::array<double, 6> sigma{kNone, kNone, kNone, kNone, kNone, kNone};
    std::array<double, 6> cost{kNone, kNone, kNone, kNone, kNone, kNone};
    std::array<double, 3> terminal{kNone, kNone, kNone};
    // Declared lower bound on |sigma_{x_delta}|; 0 means none.
    double sigma_xd_lower = 0.0;
};

// Deterministic coefficient functions b, sigma, L, h with user-declared
// derivatives. Implementations must be pure.
class Coefficients {
public:
    virtual ~Coefficients() = default;

    virtual std::string name() const = 0;
    virtual ThetaRecord evaluate(const Point& p) const = 0;
    virtual TerminalRecord terminal(double x) const = 0;
    virtual CoefficientBounds bounds() const { return {}; }
};

using CoefficientsPtr = std::shared_ptr<const Coefficients>;

// Evaluates at Theta(t) and throws EvaluationError naming the first non-finite entry.
ThetaRecord theta_eval(const Coefficients& coeffs, const Point& p);

struct AuditOptions {
    std::size_t n_samples = 1000;
    std::uint64_t seed = 1;
    double step = 1e-5;
    double tolerance = 1e-4;
    double horizon = 1.0;
    double state_range = 3.0;
    double control_range = 3.0;
    // Sampled controls are projected onto this set.
    ControlDomain domain = ControlDomain::real_line();
};

struct AuditEntry {
    std::string name;
    // max |finite difference - declared| / max(1, |declared|)
    double max_error = 0.0;
    double max_magnitude = 0.0;
    double declared_bound = CoefficientBounds::kNone;
    bool error_flag = false;
    bool bound_flag = false;
};

struct DerivativeReport {
    std::vector<AuditEntry> entries;
    double min_abs_sigma_xd = std::numeric_limits<double>::infinity();
    bool sigma_xd_flag = false;

    bool passed() const;
    const AuditEntry& entry(const std::string& name) const;
};

// Central finite-difference audit of every declared derivative at random
// points. Mismatches are flagged in the report, never thrown.
DerivativeReport check_derivatives(const Coefficients& coeffs, const AuditOptions& options);

}  // namespace sdmp
