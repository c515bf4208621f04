#pragma once

// Small generic numerical kernels shared by the modules. They are written
// against "anything with +, * by scalar" so that the same stepper serves
// scalars, Eigen vectors and stacked matrix systems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pdmp::numerics {

/// One classical Runge-Kutta step of size h for x' = rhs(x).
template <typename Value, typename Rhs>
Value rk4_step(const Value& x, double h, Rhs&& rhs) {
  const Value k1 = rhs(x);
  const Value k2 = rhs(Value(x + (0.5 * h) * k1));
  const Value k3 = rhs(Value(x + (0.5 * h) * k2));
  const Value k4 = rhs(Value(x + h * k3));
  return Value(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Derived-from-x finite-difference step: base * max(1, |x|).
inline double relative_step(double x, double base) {
  return base * std::max(1.0, std::abs(x));
}

/// Central finite-difference Jacobian of f: R^n -> R^m at x.
template <typename Fn>
Eigen::MatrixXd fd_jacobian(Fn&& f, const Eigen::VectorXd& x, double base_step,
                            bool relative = true) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd probe = x;
  Eigen::MatrixXd jac;
  for (Eigen::Index l = 0; l < n; ++l) {
    const double h = relative ? relative_step(x[l], base_step) : base_step;
    probe[l] = x[l] + h;
    const Eigen::VectorXd up = f(probe);
    probe[l] = x[l] - h;
    const Eigen::VectorXd down = f(probe);
    probe[l] = x[l];
    if (l == 0) jac.resize(up.size(), n);
    jac.col(l) = (up - down) / (2.0 * h);
  }
  return jac;
}

/// Central finite-difference gradient of a scalar function.
template <typename Fn>
Eigen::VectorXd fd_gradient(Fn&& f, const Eigen::VectorXd& x, double base_step = 1e-6) {
  Eigen::VectorXd probe = x;
  Eigen::VectorXd grad(x.size());
  for (Eigen::Index l = 0; l < x.size(); ++l) {
    const double h = relative_step(x[l], base_step);
    probe[l] = x[l] + h;
    const double up = f(probe);
    probe[l] = x[l] - h;
    const double down = f(probe);
    probe[l] = x[l];
    grad[l] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Adaptive Simpson quadrature of f on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 50);

/// Mean and standard error of independent values.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(std::span<const double> values);

/// Batch-means estimate: splits the sequence into `batches` contiguous blocks
/// of (nearly) equal length and reports the grand mean with the spread of the
/// block means. Requires at least `batches` values.
MeanSe batch_means(std::span<const double> values, std::size_t batches);

/// Linear-interpolation quantile (type 7) of unsorted data.
double quantile(std::vector<double> data, double p);

/// sqrt(a^2 + b^2): the standard error of a difference of independent estimates.
inline double combined_se(double a, double b) { return std::hypot(a, b); }

}  // namespace pdmp::numerics
