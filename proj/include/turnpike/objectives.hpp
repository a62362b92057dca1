#pragma once

#include <Eigen/Core>
#include <variant>
#include <vector>

#include "turnpike/dynamics.hpp"
#include "turnpike/time_grid.hpp"

namespace turnpike {

/// Weighted pointwise L1 tracking: gamma * sum_k w_k dt |x_k - x_d|_1,
/// optionally restricted to a coordinate subset.
struct PointwiseL1Tracking {
  double gamma = 1.0;
  Eigen::VectorXd node_weights;  // size N+1, w_k >= 0
  Eigen::VectorXd target;
  std::vector<int> coords;  // empty = all coordinates
};

/// gamma * max over the window of the state deviation norm.
struct MaxNormWindowTracking {
  double gamma = 1.0;
  int window_begin = 0;
  int window_end = 0;  // inclusive
  Eigen::VectorXd target;
  std::vector<int> coords;
};

/// gamma * sqrt(sum over the window of dt |trace(x_k) - target|^2).
struct GroupL2WindowTracking {
  double gamma = 1.0;
  TraceOperator trace;
  Eigen::VectorXd target;  // desired trace, constant over the window
};

/// gamma * |x_{k0} - x_d| at a single node.
struct PointPenaltyTracking {
  double gamma = 1.0;
  int node = 0;
  Eigen::VectorXd target;
  std::vector<int> coords;
};

using Tracking = std::variant<PointwiseL1Tracking, MaxNormWindowTracking, GroupL2WindowTracking,
                              PointPenaltyTracking>;

/// Composite objective: right-rectangle control cost
/// sum_k dt (|u_k - u_ref_k|^2 / 2 + l1w |u_k|_1) plus one tracking term.
/// state_norm_weight is the per-coordinate quadrature weight of the state
/// norm (dx for PDE states, 1 otherwise); L2-type norms scale with its
/// square root, L1-type norms linearly.
struct ObjectiveSpec {
  TimeGrid grid;
  Eigen::MatrixXd u_ref;  // m x N, or m x 1 broadcast across steps
  double control_l1_weight = 0.0;
  double state_norm_weight = 1.0;
  Tracking tracking;

  Eigen::VectorXd u_ref_col(int k) const {
    return u_ref.cols() == 1 ? u_ref.col(0) : u_ref.col(k);
  }
};

struct ObjectiveParts {
  double control_quadratic = 0.0;
  double control_l1 = 0.0;
  double tracking = 0.0;
  double total() const { return control_quadratic + control_l1 + tracking; }
};

ObjectiveParts evaluate_parts(const ObjectiveSpec& spec, const Eigen::MatrixXd& u,
                              const Eigen::MatrixXd& x);
double evaluate(const ObjectiveSpec& spec, const Eigen::MatrixXd& u, const Eigen::MatrixXd& x);

/// Harmonic weights of the singular tracking term: w_k = 1/((k - k0) dt)
/// for k > k0, zero at k0 and before.
Eigen::VectorXd singular_weights(const TimeGrid& grid, int k0);

/// Gradient of the smooth control cost: dt (u_k - u_ref_k).
Eigen::MatrixXd smooth_gradient(const ObjectiveSpec& spec, const Eigen::MatrixXd& u);

/// Adjoint-based gradient of 1/2 |z(u)|^2 where z stacks the tracked
/// outputs; exists to validate the adjoint pass against finite differences.
Eigen::MatrixXd squared_tracking_gradient(const ObjectiveSpec& spec,
                                          const DiscreteLinearSystem& sys,
                                          const Eigen::MatrixXd& u);

struct ProxResult {
  Eigen::MatrixXd point;
  double objective_contribution = 0.0;
};

/// Proximal map of the control cost: argmin_p G(p) + |p - v|^2 / (2 tau)
/// with G the per-step dt-weighted quadratic-plus-L1 term. Separable, so
/// the solution is a soft threshold followed by the quadratic shrink.
ProxResult prox_control_term(const Eigen::MatrixXd& v, double tau, const ObjectiveSpec& spec);

/// Stacked linear view of the tracking term. Each block selects (and
/// scales) some coordinates of one trajectory node minus their target; the
/// penalty is a convex function of the stack whose conjugate is the
/// indicator of the dual set handled by project_dual.
class TrackingMap {
 public:
  struct Block {
    int node = 0;
    double scale = 1.0;
    std::vector<int> coords;  // empty = all coordinates
    Eigen::VectorXd target;
    double l1_bound = 0.0;  // per-coordinate clamp radius (WeightedL1 only)
    int offset = 0;
    int dim = 0;
  };

  enum class Penalty { WeightedL1, MaxOfBlockNorms, StackedL2, Affine };

  Penalty penalty = Penalty::StackedL2;
  double radius = 0.0;  // penalty factor = dual ball radius (non-L1 kinds)
  std::vector<Block> blocks;
  int total_dim = 0;

  /// z(x): stacked scale * (sel(x_node) - target) over all blocks.
  Eigen::VectorXd extract(const Eigen::MatrixXd& x) const;
  /// Penalty value at a stacked point (Affine blocks contribute zero).
  double value(const Eigen::VectorXd& z) const;
  /// Projection onto the dual set, in place.
  void project_dual(Eigen::Ref<Eigen::VectorXd> p) const;
};

/// Tracking geometry of a spec; terminal pins are appended by the solver.
TrackingMap build_tracking_map(const ObjectiveSpec& spec, int state_dim);

/// K^T p: pulls a stacked dual variable back to control space through the
/// adjoint dynamics (costate sweep).
Eigen::MatrixXd adjoint_apply(const DiscreteLinearSystem& sys, const TrackingMap& map,
                              const Eigen::VectorXd& p);

/// Value of the tracking term along a trajectory.
double tracking_value(const ObjectiveSpec& spec, const Eigen::MatrixXd& x);

/// Projects a stacked dual variable onto the dual set of the tracking term.
Eigen::VectorXd project_dual_tracking(const Eigen::VectorXd& p, const ObjectiveSpec& spec,
                                      int state_dim);

}  // namespace turnpike
