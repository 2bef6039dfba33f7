#pragma once

#include <string>
#include <vector>

namespace sdmp {

// Closed interval [lo, hi]; either end may be infinite. A point is [p, p].
struct Interval {
    double lo;
    double hi;
};

// Admissible control set U, not necessarily convex: the real line, a finite
// union of closed intervals, or a finite point set. Stored as a sorted list of
// disjoint closed intervals.
class ControlDomain {
public:
    enum class Kind { RealLine, Intervals, Points };

    static ControlDomain real_line();
    static ControlDomain intervals(std::vector<Interval> parts);
    static ControlDomain points(std::vector<double> values);
    // (-inf, -1] U [1, inf), the non-convex set of the delayed LQ problem.
    static ControlDomain punctured_unit();

    Kind kind() const { return kind_; }
    const std::vector<Interval>& parts() const { return parts_; }

    bool contains(double v) const;
    // Nearest point of U; at equal distance the larger value wins.
    double project(double v) const;

    bool is_punctured_unit() const;
    std::string describe() const;

    friend bool operator==(const ControlDomain& a, const ControlDomain& b);

private:
    ControlDomain(Kind kind, std::vector<Interval> parts);

    Kind kind_;
    std::vector<Interval> parts_;
};

inline double project_to_domain(double v, const ControlDomain& domain) { return domain.project(v); }

}  // namespace sdmp
