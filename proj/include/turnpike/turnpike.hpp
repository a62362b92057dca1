#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "turnpike/dynamics.hpp"
#include "turnpike/objectives.hpp"
#include "turnpike/solver.hpp"

namespace turnpike {

struct TurnpikeReport {
  /// First node from which the state stays within tol of x_d.
  std::optional<int> arrival_index;
  /// Last step whose control deviates from u_d by more than tol.
  std::optional<int> support_end_index;
  Eigen::VectorXd deviation_profile;  // per-node X-norm distance to x_d
  std::optional<double> predicted_t0;
  double gamma_used = 0.0;
  double tolerance = 0.0;
};

/// Backward scan so that "arrived" means the state stays there for good.
TurnpikeReport detect(const Eigen::MatrixXd& x, const Eigen::MatrixXd& u,
                      const Eigen::VectorXd& x_d, const Eigen::VectorXd& u_d, double tol = 1e-5,
                      double state_norm_weight = 1.0);

struct PQEquivalenceReport {
  SolveReport p_report;  // max-norm window tracking
  SolveReport q_report;  // point penalty at the window start
  double v_p = 0.0;
  double v_q = 0.0;
  double max_window_deviation = 0.0;  // of the P solution, X-norm
  double c1_hat = 0.0;
  double threshold = 0.0;  // c1_hat * |u_exact - u_d| in the dt-weighted norm
  double gamma = 0.0;
  bool guaranteed = false;  // gamma exceeds the threshold
};

/// Solves the max-norm problem P and the point-penalty problem Q on the
/// same system and window and compares their values. When gamma is below
/// the controllability threshold the comparison still runs but is flagged
/// as not guaranteed.
PQEquivalenceReport check_pq_equivalence(const DiscreteLinearSystem& sys, double gamma, int k0,
                                         const Eigen::VectorXd& x_d, const Eigen::VectorXd& u_d,
                                         const SolverConfig& cfg, double state_norm_weight = 1.0);

struct SweepRow {
  double gamma = 0.0;
  std::optional<int> arrival_index;
  std::optional<int> support_end_index;
  double objective = 0.0;
  bool converged = false;
  std::string error;  // non-empty when the solve failed; the sweep continues
};

/// One solve per gamma (ascending); the tracking weight of the base spec is
/// replaced by each grid value.
std::vector<SweepRow> threshold_sweep(const DiscreteLinearSystem& sys, const ObjectiveSpec& base,
                                      const std::vector<double>& gammas,
                                      const Eigen::VectorXd& x_d, const Eigen::VectorXd& u_d,
                                      const SolverConfig& cfg, double detect_tol = 1e-5);

/// Helper shared by the sweep and scenarios: returns base with the tracking
/// weight replaced.
ObjectiveSpec with_tracking_gamma(const ObjectiveSpec& base, double gamma);

}  // namespace turnpike
