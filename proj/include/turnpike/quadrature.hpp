#pragma once

#include <Eigen/Core>
#include <functional>

namespace turnpike {

/// Adaptive Simpson quadrature of f over [a, b], absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12);

/// Prefix integrals of uniformly sampled values: out[k] approximates the
/// integral from x_0 to x_k with spacing h. Fourth order at even nodes
/// (Simpson pairs); odd nodes use a one-shot half-panel rule, so their error
/// stays local instead of accumulating.
Eigen::VectorXd prefix_integral(const Eigen::VectorXd& values, double h);

}  // namespace turnpike
