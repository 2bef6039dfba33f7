#include "sdmp/regression.hpp"

#include <cmath>

#include "sdmp/errors.hpp"

namespace sdmp {

namespace {

// Mean and population standard deviation; false when numerically constant.
bool moments(std::span<const double> v, double& mean, double& sd) {
    const double n = static_cast<double>(v.size());
    mean = 0.0;
    for (double a : v) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : v) var += (a - mean) * (a - mean);
    sd = std::sqrt(var / n);
    return sd > 1e-12 * (1.0 + std::abs(mean));
}

}  // namespace

Basis::Basis(std::span<const double> x, std::span<const double> xd, int degree) {
    if (degree < 0) throw ConfigError("regression degree must be non-negative");
    double mean = 0.0, sd = 0.0;
    if (!x.empty() && moments(x, mean, sd)) {
        mean_.push_back(mean);
        scale_.push_back(1.0 / sd);
        source_.push_back(0);
    }
    if (!xd.empty() && moments(xd, mean, sd)) {
        mean_.push_back(mean);
        scale_.push_back(1.0 / sd);
        source_.push_back(1);
    }
    for (int total = 0; total <= degree; ++total) {
        for (int a = total; a >= 0; --a) {
            const int b = total - a;
            if (a > 0 && source_.empty()) continue;
            if (b > 0 && source_.size() < 2) continue;
            powers_.emplace_back(a, b);
        }
    }
}

void Basis::row(double x, double xd, double* out) const {
    double z[2] = {0.0, 0.0};
    for (std::size_t j = 0; j < source_.size(); ++j)
        z[j] = ((source_[j] == 0 ? x : xd) - mean_[j]) * scale_[j];
    for (std::size_t c = 0; c < powers_.size(); ++c) {
        double v = 1.0;
        for (int j = 0; j < powers_[c].first; ++j) v *= z[0];
        for (int j = 0; j < powers_[c].second; ++j) v *= z[1];
        out[c] = v;
    }
}

double Basis::eval(const Eigen::VectorXd& beta, double x, double xd) const {
    double buf[64];
    row(x, xd, buf);
    double s = 0.0;
    for (std::size_t c = 0; c < powers_.size(); ++c) s += beta[static_cast<Eigen::Index>(c)] * buf[c];
    return s;
}

Regressor::Regressor(std::span<const double> x, std::span<const double> xd,
                     const RegressionOptions& options, int time_index) {
    if (options.degree < 0) throw ConfigError("regression degree must be non-negative");
    if (options.degree > 9) throw ConfigError("regression degree must be at most 9");
    if (options.ridge < 0.0) throw ConfigError("regression ridge must be non-negative");
    const std::size_t n = x.size();
    if (n == 0) throw SolverError(time_index, "no paths to regress on");
    if (!xd.empty() && xd.size() != n) throw ConfigError("regression feature lengths differ");

    basis_ = Basis(x, xd, options.degree);
    const std::size_t p = basis_.size();
    // Row-major fill, then transpose into the column-major design.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(
        static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < n; ++i)
        basis_.row(x[i], xd.empty() ? 0.0 : xd[i], rows.data() + i * p);
    design_ = rows;
    Eigen::MatrixXd gram = design_.transpose() * design_ / static_cast<double>(n);
    gram.diagonal().array() += options.ridge;
    solver_.compute(gram);
    const auto diag = solver_.vectorD();
    const double scale = diag.cwiseAbs().maxCoeff();
    if (solver_.info() != Eigen::Success || !(diag.minCoeff() > 1e-13 * scale))
        throw SolverError(time_index, "singular regression normal equations (" +
                                          std::to_string(p) + " basis functions, " +
                                          std::to_string(n) + " paths)");
}

Eigen::VectorXd Regressor::coefficients(std::span<const double> y) const {
    const Eigen::Map<const Eigen::VectorXd> yy(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd rhs = design_.transpose() * yy / static_cast<double>(y.size());
    return solver_.solve(rhs);
}

void Regressor::project(std::span<const double> y, std::span<double> fitted) const {
    const Eigen::VectorXd beta = coefficients(y);
    Eigen::Map<Eigen::VectorXd> out(fitted.data(), static_cast<Eigen::Index>(fitted.size()));
    out.noalias() = design_ * beta;
}

}  // namespace sdmp
