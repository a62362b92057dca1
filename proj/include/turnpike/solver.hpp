#pragma once

#include <Eigen/Core>
#include <optional>

#include "turnpike/dynamics.hpp"
#include "turnpike/objectives.hpp"

namespace turnpike {

struct SolverConfig {
  int max_iters = 200000;
  double tol_gap = 1e-8;  // relative primal-dual gap
  /// Step sizes; zero means 0.99 / |K| from a power-method estimate.
  double tau = 0.0;
  double sigma = 0.0;
  double over_relaxation = 1.0;  // theta, used when accelerate is off
  /// Strong convexity of the control cost permits the accelerated step
  /// schedule; turning it off recovers the fixed-step iteration.
  bool accelerate = true;
  /// Reset the accelerated schedule every so many iterations (warm start at
  /// the current iterate). Quadratic growth of the objective then turns the
  /// O(1/k^2) gap decay into a linear rate. 0 picks a period from the
  /// estimated operator norm; negative disables restarts.
  int restart_every = 0;
  unsigned power_seed = 1;
  int power_iters = 50;
  int gap_check_interval = 25;
  double terminal_feas_tol = 1e-9;  // relative, pinned solves only
};

struct SolveReport {
  Eigen::MatrixXd u_opt;  // m x N
  Eigen::MatrixXd x_opt;  // n x (N+1)
  double objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  double control_quadratic = 0.0;
  double control_l1 = 0.0;
  double tracking = 0.0;
  Eigen::VectorXd dual;            // final stacked dual variable
  double terminal_residual = 0.0;  // |x_N - pin| when a terminal pin is set
};

/// First-order primal-dual splitting on min_u G(u) + F(K u + c): G is the
/// control cost (closed-form prox), K maps controls to the stacked tracked
/// outputs (applied matrix-free via simulate and an adjoint sweep), F the
/// tracking penalty (dual projection). An optional terminal pin x_N =
/// target enters as an extra affine block with a free dual variable; its
/// feasibility is reported separately from the gap.
SolveReport solve_primal_dual(const DiscreteLinearSystem& sys, const ObjectiveSpec& spec,
                              const SolverConfig& cfg,
                              const std::optional<Eigen::VectorXd>& terminal_pin = {});

/// Exact reference for tiny scalar instances (N <= 5, pointwise-L1
/// tracking): enumerates every sign/activity pattern of the control and
/// the tracked nodes, solves the induced equality-constrained quadratic
/// program, and keeps the candidate with the best true objective.
SolveReport brute_force_oracle(const DiscreteLinearSystem& sys, const ObjectiveSpec& spec);

/// Norm of a minimum-norm subgradient of the objective at u. When dual is
/// null, the certificate optimizes the dual variable over its set by
/// projected gradient; near-zero values certify optimality.
double subgradient_certificate(const DiscreteLinearSystem& sys, const ObjectiveSpec& spec,
                               const Eigen::MatrixXd& u, const Eigen::VectorXd* dual = nullptr);

}  // namespace turnpike
