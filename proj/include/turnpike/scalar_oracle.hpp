#pragma once

#include <functional>

#include "turnpike/coefficient.hpp"

namespace turnpike {

/// Introductory scalar problem: y(0) = -1, y' = y + exp(t) u, cost
/// integral of u^2/2 + |u| + gamma*|y| over [0, T].
struct Example1Params {
  double gamma = 1.0;
  double horizon = 2.0;
};

/// Throws std::domain_error naming the violated inequality. Feasibility
/// requires T > t0(gamma) and gamma*e^T >= 1 + gamma*e^{t0}.
void validate(const Example1Params& p);

/// Unique root t0 > 0 of (t - 1) e^t = 1/gamma - 1. The left side is
/// strictly increasing from -1, so the root exists for every gamma > 0.
/// Residual of the returned root is below 1e-12.
double solve_t0(double gamma);

/// Optimal control gamma*(e^{t0} - e^t) for t <= t0, zero afterwards.
double example1_control(const Example1Params& p, double t);

/// State driven by the optimal control:
/// gamma*t*e^{t+t0} - gamma*e^{2t} + (gamma-1)*e^t below t0, zero afterwards.
double example1_state(const Example1Params& p, double t);

/// Integral of the optimal control over [0, T]; equals 1 for every gamma.
double example1_moment_check(const Example1Params& p);

/// Cost of the optimal pair, by adaptive quadrature of the closed forms.
double example1_objective(const Example1Params& p);

/// General scalar problem y' = f y + g u, y(0) = alpha < 0, y(T) = 0, with
/// cost integral of u^2/2 + |u| + gamma*|y|. f, g continuous and positive.
struct ScalarProblem {
  Coefficient f;
  Coefficient g;
  double alpha = -1.0;
  double gamma = 1.0;
  double horizon = 1.0;
};

/// Closed-form optimum of the general scalar problem, evaluated through a
/// dense internal grid. The callable members interpolate linearly between
/// grid nodes; t0 is the arrival time and lambda the moment multiplier.
struct ScalarOracleSolution {
  double t0 = 0.0;
  double lambda = 0.0;
  std::function<double(double)> control;
  std::function<double(double)> state;
  std::function<double(double)> F;  // exp of the prefix integral of f
  std::function<double(double)> H;  // prefix integral of F
  double moment_residual = 0.0;     // |moment(lambda) + alpha| under the internal quadrature
};

ScalarOracleSolution general_solution(const ScalarProblem& p);

/// Tracking weight gamma(t1) and multiplier lambda1 that place the control
/// support end exactly at t1. gamma of the input problem is ignored.
struct GammaThreshold {
  double gamma_t1 = 0.0;
  double lambda1 = 0.0;
  /// g' <= f*g checked by finite differences; a violation voids the
  /// monotone-support guarantee but the numbers are still returned.
  bool derivative_assumption_holds = true;
};

GammaThreshold gamma_threshold(const ScalarProblem& p, double t1);

}  // namespace turnpike
