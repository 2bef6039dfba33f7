#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdmp/coefficients.hpp"
#include "sdmp/domain.hpp"
#include "sdmp/timegrid.hpp"

namespace sdmp {

// Per-path values on the grid nodes [first_node, last_node], path-major.
class PathMatrix {
public:
    PathMatrix() = default;
    PathMatrix(std::size_t n_paths, int first_node, int last_node, double fill = 0.0);

    std::size_t n_paths() const { return n_paths_; }
    int first_node() const { return first_; }
    int last_node() const { return last_; }
    std::size_t width() const { return width_; }

    double& operator()(std::size_t path, int node) { return data_[offset(path, node)]; }
    double operator()(std::size_t path, int node) const { return data_[offset(path, node)]; }

    std::span<double> row(std::size_t path) {
        return {data_.data() + path * width_, width_};
    }
    std::span<const double> row(std::size_t path) const {
        return {data_.data() + path * width_, width_};
    }
    const std::vector<double>& data() const { return data_; }

    friend bool operator==(const PathMatrix& a, const PathMatrix& b) = default;

private:
    std::size_t offset(std::size_t path, int node) const {
        return path * width_ + static_cast<std::size_t>(node - first_);
    }

    std::size_t n_paths_ = 0;
    int first_ = 0;
    int last_ = -1;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

// Scalar function of time for the initial segments on [-delta, 0].
using InitialPath = std::function<double(double)>;

// b, sigma, L, h together with U, the initial segments xi and eta, and the grid.
struct ProblemSpec {
    CoefficientsPtr coefficients;
    ControlDomain domain = ControlDomain::real_line();
    InitialPath initial_state = [](double) { return 0.0; };
    InitialPath initial_control = [](double) { return 0.0; };
    TimeGrid grid = TimeGrid::make(1.0, 1.0, 1);

    // Checks xi, eta finite and eta in U at every node of [-delta, 0].
    void validate() const;
    const Coefficients& coeffs() const { return *coefficients; }
};

// Control values on nodes [-m, N]. Nodes k < 0 carry eta; node k >= 0 carries
// the control on [t_k, t_{k+1}). Either one deterministic row shared by all
// paths, or one row per path.
class ControlPath {
public:
    // v(t) = value on [0, T], eta on [-delta, 0).
    static ControlPath constant(const ProblemSpec& spec, double value);
    // v(t_k) = f(t_k) for k >= 0.
    static ControlPath deterministic(const ProblemSpec& spec, const std::function<double(double)>& f);
    // Per-path rows initialised from eta and `fill`.
    static ControlPath ensemble(const ProblemSpec& spec, std::size_t n_paths, double fill);

    bool per_path() const { return per_path_; }
    // True when values at node k depend on increments with index < k only.
    // Deterministic controls are adapted; ensemble builders assert it.
    bool adapted() const { return adapted_; }
    void set_adapted(bool a) { adapted_ = a; }

    const TimeGrid& grid() const { return grid_; }
    std::size_t rows() const { return values_.n_paths(); }

    double at(std::size_t path, int node) const {
        return values_(per_path_ ? path : 0, node);
    }
    double& at(std::size_t path, int node) { return values_(per_path_ ? path : 0, node); }
    std::span<const double> row(std::size_t path) const { return values_.row(per_path_ ? path : 0); }
    std::span<double> row(std::size_t path) { return values_.row(per_path_ ? path : 0); }
    const PathMatrix& values() const { return values_; }

    // Throws DomainError naming the first value outside U.
    void check_domain(const ControlDomain& domain) const;

    friend bool operator==(const ControlPath& a, const ControlPath& b) {
        return a.per_path_ == b.per_path_ && a.values_ == b.values_;
    }

private:
    ControlPath(const TimeGrid& grid, PathMatrix values, bool per_path)
        : grid_(grid), values_(std::move(values)), per_path_(per_path) {}

    TimeGrid grid_;
    PathMatrix values_;
    bool per_path_ = false;
    bool adapted_ = true;
};

}  // namespace sdmp
