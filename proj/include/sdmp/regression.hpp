#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

namespace sdmp {

struct RegressionOptions {
    int degree = 2;       // total polynomial degree of the basis
    double ridge = 1e-8;  // added to the diagonal of the normalised Gram matrix

    friend bool operator==(const RegressionOptions&, const RegressionOptions&) = default;
};

// Polynomials up to a total degree in the standardised features
// (x(t_k), x(t_k - delta)). Features that are constant across the fitting
// sample are dropped, so at steps where the state is deterministic the basis
// is the constant function alone.
class Basis {
public:
    Basis() = default;
    // `xd` may be empty for a basis in x only.
    Basis(std::span<const double> x, std::span<const double> xd, int degree);

    std::size_t size() const { return powers_.size(); }
    void row(double x, double xd, double* out) const;
    double eval(const Eigen::VectorXd& beta, double x, double xd) const;

private:
    std::vector<double> mean_, scale_;
    std::vector<int> source_;  // 0 = x, 1 = xd, per active feature
    std::vector<std::pair<int, int>> powers_;
};

// A fitted conditional expectation, callable at any state.
struct FittedFunction {
    Basis basis;
    Eigen::VectorXd beta;
    double operator()(double x, double xd) const { return basis.eval(beta, x, xd); }
};

// Least-squares conditional expectation at one time step: projects targets
// onto the basis with a ridge-regularised normal-equation solve.
class Regressor {
public:
    // Throws SolverError naming `time_index` when the normal equations are singular.
    Regressor(std::span<const double> x, std::span<const double> xd,
              const RegressionOptions& options, int time_index);

    std::size_t n_paths() const { return static_cast<std::size_t>(design_.rows()); }
    std::size_t n_basis() const { return static_cast<std::size_t>(design_.cols()); }

    // fitted = design * argmin |design * beta - y|^2 / n + ridge |beta|^2.
    void project(std::span<const double> y, std::span<double> fitted) const;
    Eigen::VectorXd coefficients(std::span<const double> y) const;
    FittedFunction fit(std::span<const double> y) const { return {basis_, coefficients(y)}; }

private:
    Basis basis_;
    Eigen::MatrixXd design_;
    Eigen::LDLT<Eigen::MatrixXd> solver_;
};

}  // namespace sdmp
