#include "sdmp/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "sdmp/errors.hpp"

namespace sdmp {

namespace {

void require_finite(double value, const char* coefficient, const char* partial, const Point& p) {
    if (std::isfinite(value)) return;
    std::string msg = std::string("non-finite ") + coefficient + partial + " at (t=" +
                      std::to_string(p.t) + ", x=" + std::to_string(p.x) +
                      ", x_delta=" + std::to_string(p.xd) + ", v=" + std::to_string(p.v) +
                      ", v_delta=" + std::to_string(p.vd) + ")";
    throw EvaluationError(msg);
}

void require_finite(const Partials& c, const char* name, const Point& p) {
    require_finite(c.value, name, "", p);
    require_finite(c.d_x, name, "_x", p);
    require_finite(c.d_xd, name, "_xd", p);
    require_finite(c.d_xx, name, "_xx", p);
    require_finite(c.d_xxd, name, "_xxd", p);
    require_finite(c.d_xdxd, name, "_xdxd", p);
}

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : gen_(seed) {}
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::mt19937_64 gen_;
};

struct Tracker {
    AuditEntry entry;

    void compare(double declared, double fd) {
        const double err = std::abs(fd - declared) / std::max(1.0, std::abs(declared));
        entry.max_error = std::max(entry.max_error, err);
    }
    void magnitude(double declared) {
        entry.max_magnitude = std::max(entry.max_magnitude, std::abs(declared));
    }
};

}  // namespace

ThetaRecord theta_eval(const Coefficients& coeffs, const Point& p) {
    ThetaRecord r = coeffs.evaluate(p);
    // x - x is NaN exactly when x is infinite or NaN.
    double probe = 0.0;
    for (const Partials* c : {&r.b, &r.sigma, &r.cost})
        probe += (c->value - c->value) + (c->d_x - c->d_x) + (c->d_xd - c->d_xd) +
                 (c->d_xx - c->d_xx) + (c->d_xxd - c->d_xxd) + (c->d_xdxd - c->d_xdxd);
    if (probe == 0.0) return r;
    require_finite(r.b, "b", p);
    require_finite(r.sigma, "sigma", p);
    require_finite(r.cost, "L", p);
    return r;
}

bool DerivativeReport::passed() const {
    if (sigma_xd_flag) return false;
    return std::none_of(entries.begin(), entries.end(),
                        [](const AuditEntry& e) { return e.error_flag || e.bound_flag; });
}

const AuditEntry& DerivativeReport::entry(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw std::out_of_range("no audit entry named " + name);
}

DerivativeReport check_derivatives(const Coefficients& coeffs, const AuditOptions& opt) {
    if (opt.n_samples < 1) throw ConfigError("check_derivatives needs n_samples >= 1");
    const double h = opt.step;
    const CoefficientBounds bounds = coeffs.bounds();

    // Per coefficient: d_x, d_xd, d_xx, d_xxd (both orders), d_xdxd.
    static constexpr const char* kSuffix[] = {"_x", "_xd", "_xx", "_xxd", "_xdxd"};
    static constexpr const char* kName[] = {"b", "sigma", "L"};
    std::vector<Tracker> trackers;
    for (int c = 0; c < 3; ++c) {
        const auto& bound = c == 0 ? bounds.b : (c == 1 ? bounds.sigma : bounds.cost);
        for (int d = 0; d < 5; ++d) {
            Tracker t;
            t.entry.name = std::string(kName[c]) + kSuffix[d];
            t.entry.declared_bound = bound[static_cast<std::size_t>(d + 1)];
            trackers.push_back(t);
        }
    }
    Tracker hx, hxx;
    hx.entry.name = "h_x";
    hx.entry.declared_bound = bounds.terminal[1];
    hxx.entry.name = "h_xx";
    hxx.entry.declared_bound = bounds.terminal[2];

    auto part = [](const ThetaRecord& r, int c) -> const Partials& {
        return c == 0 ? r.b : (c == 1 ? r.sigma : r.cost);
    };

    DerivativeReport report;
    Sampler rng(opt.seed);
    for (std::size_t s = 0; s < opt.n_samples; ++s) {
        Point p;
        p.t = rng.uniform(0.0, opt.horizon);
        p.x = rng.uniform(-opt.state_range, opt.state_range);
        p.xd = rng.uniform(-opt.state_range, opt.state_range);
        p.v = opt.domain.project(rng.uniform(-opt.control_range, opt.control_range));
        p.vd = opt.domain.project(rng.uniform(-opt.control_range, opt.control_range));

        Point xp = p, xm = p, dp = p, dm = p;
        xp.x += h;
        xm.x -= h;
        dp.xd += h;
        dm.xd -= h;
        const ThetaRecord r0 = theta_eval(coeffs, p);
        const ThetaRecord rxp = theta_eval(coeffs, xp);
        const ThetaRecord rxm = theta_eval(coeffs, xm);
        const ThetaRecord rdp = theta_eval(coeffs, dp);
        const ThetaRecord rdm = theta_eval(coeffs, dm);

        for (int c = 0; c < 3; ++c) {
            const Partials& f0 = part(r0, c);
            const Partials& fxp = part(rxp, c);
            const Partials& fxm = part(rxm, c);
            const Partials& fdp = part(rdp, c);
            const Partials& fdm = part(rdm, c);
            auto& t = trackers;
            const std::size_t base = static_cast<std::size_t>(c) * 5;
            t[base + 0].compare(f0.d_x, (fxp.value - fxm.value) / (2 * h));
            t[base + 1].compare(f0.d_xd, (fdp.value - fdm.value) / (2 * h));
            t[base + 2].compare(f0.d_xx, (fxp.d_x - fxm.d_x) / (2 * h));
            t[base + 3].compare(f0.d_xxd, (fdp.d_x - fdm.d_x) / (2 * h));
            t[base + 3].compare(f0.d_xxd, (fxp.d_xd - fxm.d_xd) / (2 * h));
            t[base + 4].compare(f0.d_xdxd, (fdp.d_xd - fdm.d_xd) / (2 * h));
            t[base + 0].magnitude(f0.d_x);
            t[base + 1].magnitude(f0.d_xd);
            t[base + 2].magnitude(f0.d_xx);
            t[base + 3].magnitude(f0.d_xxd);
            t[base + 4].magnitude(f0.d_xdxd);
        }
        report.min_abs_sigma_xd = std::min(report.min_abs_sigma_xd, std::abs(r0.sigma.d_xd));

        const TerminalRecord h0 = coeffs.terminal(p.x);
        const TerminalRecord hp = coeffs.terminal(p.x + h);
        const TerminalRecord hm = coeffs.terminal(p.x - h);
        hx.compare(h0.d_x, (hp.value - hm.value) / (2 * h));
        hxx.compare(h0.d_xx, (hp.d_x - hm.d_x) / (2 * h));
        hx.magnitude(h0.d_x);
        hxx.magnitude(h0.d_xx);
    }

    trackers.push_back(hx);
    trackers.push_back(hxx);
    for (auto& t : trackers) {
        t.entry.error_flag = t.entry.max_error > opt.tolerance;
        t.entry.bound_flag = t.entry.max_magnitude > t.entry.declared_bound;
        report.entries.push_back(t.entry);
    }
    report.sigma_xd_flag =
        bounds.sigma_xd_lower > 0.0 && report.min_abs_sigma_xd < bounds.sigma_xd_lower;
    return report;
}

}  // namespace sdmp
