#include "sdmp/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdmp/errors.hpp"

namespace sdmp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ControlDomain::ControlDomain(Kind kind, std::vector<Interval> parts) : kind_(kind) {
    if (parts.empty()) throw ConfigError("control domain must be nonempty");
    for (const auto& p : parts) {
        if (std::isnan(p.lo) || std::isnan(p.hi) || p.lo > p.hi)
            throw ConfigError("control domain interval must satisfy lo <= hi");
        if (p.lo == kInf || p.hi == -kInf) throw ConfigError("control domain interval is empty");
    }
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
        return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });
    for (const auto& p : parts) {
        if (!parts_.empty() && p.lo <= parts_.back().hi)
            parts_.back().hi = std::max(parts_.back().hi, p.hi);
        else
            parts_.push_back(p);
    }
}

ControlDomain ControlDomain::real_line() { return ControlDomain(Kind::RealLine, {{-kInf, kInf}}); }

ControlDomain ControlDomain::intervals(std::vector<Interval> parts) {
    return ControlDomain(Kind::Intervals, std::move(parts));
}

ControlDomain ControlDomain::points(std::vector<double> values) {
    std::vector<Interval> parts;
    parts.reserve(values.size());
    for (double v : values) {
        if (!std::isfinite(v)) throw ConfigError("control domain points must be finite");
        parts.push_back({v, v});
    }
    return ControlDomain(Kind::Points, std::move(parts));
}

ControlDomain ControlDomain::punctured_unit() {
    return intervals({{-kInf, -1.0}, {1.0, kInf}});
}

bool ControlDomain::contains(double v) const {
    if (std::isnan(v)) return false;
    return std::any_of(parts_.begin(), parts_.end(),
                       [v](const Interval& p) { return p.lo <= v && v <= p.hi; });
}

double ControlDomain::project(double v) const {
    if (std::isnan(v)) throw DomainError("cannot project NaN onto the control domain");
    double best = 0.0;
    double best_dist = kInf;
    bool found = false;
    for (const auto& p : parts_) {
        const double c = std::clamp(v, p.lo, p.hi);
        const double d = std::abs(v - c);
        if (!found || d < best_dist || (d == best_dist && c > best)) {
            best = c;
            best_dist = d;
            found = true;
        }
    }
    return best;
}

bool ControlDomain::is_punctured_unit() const {
    return parts_.size() == 2 && parts_[0].lo == -kInf && parts_[0].hi == -1.0 &&
           parts_[1].lo == 1.0 && parts_[1].hi == kInf;
}

std::string ControlDomain::describe() const {
    if (kind_ == Kind::RealLine) return "R";
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) out << " U ";
        const auto& p = parts_[i];
        if (p.lo == p.hi) {
            out << "{" << p.lo << "}";
            continue;
        }
        out << (std::isinf(p.lo) ? "(" : "[");
        if (std::isinf(p.lo)) out << "-inf"; else out << p.lo;
        out << ", ";
        if (std::isinf(p.hi)) out << "inf"; else out << p.hi;
        out << (std::isinf(p.hi) ? ")" : "]");
    }
    return out.str();
}

bool operator==(const ControlDomain& a, const ControlDomain& b) {
    if (a.kind_ != b.kind_ || a.parts_.size() != b.parts_.size()) return false;
    for (std::size_t i = 0; i < a.parts_.size(); ++i)
        if (a.parts_[i].lo != b.parts_[i].lo || a.parts_[i].hi != b.parts_[i].hi) return false;
    return true;
}

}  // namespace sdmp
