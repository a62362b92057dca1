#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "turnpike/coefficient.hpp"
#include "turnpike/time_grid.hpp"

namespace turnpike {

/// Time-varying linear update x_{k+1} = A_k x_k + B_k u_k with fixed x_0.
/// Step matrices are stored once when the system is time invariant, or per
/// step otherwise; A(k)/B(k) hide the difference.
class DiscreteLinearSystem {
 public:
  DiscreteLinearSystem(TimeGrid grid, std::vector<Eigen::MatrixXd> a_steps,
                       std::vector<Eigen::MatrixXd> b_steps, Eigen::VectorXd x0);

  const TimeGrid& grid() const { return grid_; }
  int state_dim() const { return static_cast<int>(x0_.size()); }
  int control_dim() const { return static_cast<int>(b_[0].cols()); }
  const Eigen::MatrixXd& A(int k) const { return a_[a_.size() == 1 ? 0 : k]; }
  const Eigen::MatrixXd& B(int k) const { return b_[b_.size() == 1 ? 0 : k]; }
  const Eigen::VectorXd& x0() const { return x0_; }
  void set_initial_state(const Eigen::VectorXd& x0);

 private:
  TimeGrid grid_;
  std::vector<Eigen::MatrixXd> a_;
  std::vector<Eigen::MatrixXd> b_;
  Eigen::VectorXd x0_;
};

/// Rolls the system forward; u has one column per step, the result one
/// column per node including x_0.
Eigen::MatrixXd simulate(const DiscreteLinearSystem& sys, const Eigen::MatrixXd& u);

/// Implicit Euler transcription of y' = f y + g u:
/// y_{k+1} = (y_k + dt g(t_{k+1}) u_k) / (1 - dt f(t_{k+1})).
/// Control u_k acts on the step ending at t_{k+1}. Requires dt*f < 1 at
/// every node.
DiscreteLinearSystem from_scalar_ode(const Coefficient& f, const Coefficient& g,
                                     const TimeGrid& grid, double alpha);

/// One face of the 2x2 hyperbolic domain: the inflow component is set to
/// reflect * (outflow at the same face) + control_gain * u + constant.
struct FaceCondition {
  double reflect = 0.0;
  double control_gain = 0.0;
  double constant = 0.0;
};

struct DiagHyperbolicConfig {
  double d_plus = 1.0;    // speed of r_plus, > 0
  double d_minus = -1.0;  // speed of r_minus, < 0
  double eta0 = 0.0;      // source factor, <= 0
  Eigen::Matrix2d coupling = Eigen::Matrix2d::Zero();  // positive semidefinite
  double length = 1.0;
  int cells = 50;
  FaceCondition left;   // x = 0, feeds r_plus
  FaceCondition right;  // x = L, feeds r_minus
  /// Append displacement coordinates integrating (r_plus + r_minus)/2 in
  /// time (wave mode: r = (y_t - c y_x, y_t + c y_x)).
  bool with_displacement = false;
  double displacement_scale = 0.5;  // y_t = scale * (r_plus + r_minus)
};

/// Where each field lives inside the stacked state vector. Inflow node
/// values are slaved to the boundary conditions and are not part of the
/// state: r_plus is stored at nodes 1..nx, r_minus at nodes 0..nx-1.
struct HyperbolicLayout {
  int cells = 0;
  int rplus_offset = 0;        // r_plus(node j) at rplus_offset + j - 1, j = 1..nx
  int rminus_offset = 0;       // r_minus(node j) at rminus_offset + j, j = 0..nx-1
  int constant_index = -1;     // auxiliary always-one coordinate, -1 if absent
  int displacement_offset = -1;  // y(node j) at displacement_offset + j - 1, j = 1..nx
  int state_dim = 0;

  int rplus_index(int node) const { return rplus_offset + node - 1; }
  int rminus_index(int node) const { return rminus_offset + node; }
  int rplus_outflow_index() const { return rplus_index(cells); }
  int rminus_outflow_index() const { return rminus_index(0); }
  int displacement_index(int node) const { return displacement_offset + node - 1; }
};

/// Transport r_t + D r_x = eta0 M r at CFL 1 for the faster speed: that
/// component moves by an exact index shift, the slower one by linear
/// interpolation, and the source acts through a per-node implicit solve.
/// The grid must satisfy dt = dx / max(d_plus, |d_minus|) exactly.
std::pair<DiscreteLinearSystem, HyperbolicLayout> from_diag_hyperbolic(
    const DiagHyperbolicConfig& cfg, const TimeGrid& grid);

/// Neumann-controlled wave y_tt = c^2 y_xx on (0, L) with y(t, 0) = 0 and
/// y_x(t, L) = u(t), in Riemann variables r_plus = y_t - c y_x (rightward)
/// and r_minus = y_t + c y_x (leftward); both move at CFL 1.
std::pair<DiscreteLinearSystem, HyperbolicLayout> wave_neumann_system(
    double length, double wave_speed, int cells, int steps, bool with_displacement = false);

/// K maps stacked controls u_0..u_{k0-1} to x_{k0} minus the free response.
Eigen::MatrixXd controllability_operator(const DiscreteLinearSystem& sys, int target_index);

struct ControllabilityReport {
  int operator_rank = 0;
  double sigma_min = 0.0;
  double c1_hat = 0.0;          // max(1, norm of the free-response map) / sigma_min
  Eigen::MatrixXd u_exact;      // m columns per step covered by the operator
  double residual = 0.0;        // terminal / trace mismatch norm
};

/// Minimal-norm control steering x_0 to x_target at node k0, by SVD of the
/// controllability operator. Throws if K is numerically rank deficient
/// (sigma_min <= 1e-10 sigma_max), reporting the singular value range.
ControllabilityReport min_norm_exact_control(const DiscreteLinearSystem& sys,
                                             const Eigen::VectorXd& x_target, int target_index);

/// Selection of state coordinates observed on a time window.
struct TraceOperator {
  std::vector<int> coords;
  int window_begin = 0;
  int window_end = 0;  // inclusive

  int z_dim() const { return static_cast<int>(coords.size()); }
  int window_length() const { return window_end - window_begin + 1; }
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

/// Minimal-norm control (over all N steps) matching the trace of the state
/// to z_target on the window; z_target has one column per window node.
ControllabilityReport min_norm_nodal_control(const DiscreteLinearSystem& sys,
                                             const TraceOperator& trace,
                                             const Eigen::MatrixXd& z_target);

/// Steers to the holdable pair (x_d, u_d) by node k0 and holds with the
/// constant control afterwards. Requires A_k x_d + B_k u_d = x_d for all
/// k >= k0; the check failure message carries the largest deviation.
Eigen::MatrixXd holdable_extension(const DiscreteLinearSystem& sys, const Eigen::VectorXd& x_d,
                                   const Eigen::VectorXd& u_d, int arrival_index);

}  // namespace turnpike
