#include "turnpike/turnpike.hpp"

#include <cmath>
#include <stdexcept>

namespace turnpike {

TurnpikeReport detect(const Eigen::MatrixXd& x, const Eigen::MatrixXd& u,
                      const Eigen::VectorXd& x_d, const Eigen::VectorXd& u_d, double tol,
                      double state_norm_weight) {
  if (!(tol > 0.0)) throw std::invalid_argument("detect: tolerance must be positive");
  if (x.rows() != x_d.size() || u.rows() != u_d.size() || x.cols() != u.cols() + 1) {
    throw std::invalid_argument("detect: inconsistent dimensions");
  }
  const int nodes = static_cast<int>(x.cols());
  const double root_w = std::sqrt(state_norm_weight);

  TurnpikeReport rep;
  rep.tolerance = tol;
  rep.deviation_profile.resize(nodes);
  for (int k = 0; k < nodes; ++k) rep.deviation_profile[k] = root_w * (x.col(k) - x_d).norm();

  int last_out = -1;
  for (int k = nodes - 1; k >= 0; --k) {
    if (rep.deviation_profile[k] > tol) {
      last_out = k;
      break;
    }
  }
  if (last_out == nodes - 1) {
    rep.arrival_index = std::nullopt;  // never settles
  } else {
    rep.arrival_index = last_out + 1;
  }

  for (int k = static_cast<int>(u.cols()) - 1; k >= 0; --k) {
    if ((u.col(k) - u_d).norm() > tol) {
      rep.support_end_index = k;
      break;
    }
  }
  return rep;
}

PQEquivalenceReport check_pq_equivalence(const DiscreteLinearSystem& sys, double gamma, int k0,
                                         const Eigen::VectorXd& x_d, const Eigen::VectorXd& u_d,
                                         const SolverConfig& cfg, double state_norm_weight) {
  const int steps = sys.grid().steps;
  if (k0 < 1 || k0 >= steps) {
    throw std::invalid_argument("check_pq_equivalence: need 1 <= k0 < N");
  }
  const double dt = sys.grid().dt();

  PQEquivalenceReport out;
  out.gamma = gamma;
  const ControllabilityReport steer = min_norm_exact_control(sys, x_d, k0);
  out.c1_hat = steer.c1_hat;
  double dist_sq = 0.0;
  for (int k = 0; k < k0; ++k) dist_sq += dt * (steer.u_exact.col(k) - u_d).squaredNorm();
  out.threshold = steer.c1_hat * std::sqrt(dist_sq);
  out.guaranteed = gamma > out.threshold;

  ObjectiveSpec base;
  base.grid = sys.grid();
  base.u_ref = u_d;
  base.control_l1_weight = 0.0;
  base.state_norm_weight = state_norm_weight;

  ObjectiveSpec p_spec = base;
  p_spec.tracking = MaxNormWindowTracking{gamma, k0, steps, x_d, {}};
  ObjectiveSpec q_spec = base;
  q_spec.tracking = PointPenaltyTracking{gamma, k0, x_d, {}};

  out.p_report = solve_primal_dual(sys, p_spec, cfg);
  out.q_report = solve_primal_dual(sys, q_spec, cfg);
  out.v_p = out.p_report.objective;
  out.v_q = out.q_report.objective;

  out.max_window_deviation = 0.0;
  const double root_w = std::sqrt(state_norm_weight);
  for (int k = k0; k <= steps; ++k) {
    out.max_window_deviation =
        std::max(out.max_window_deviation, root_w * (out.p_report.x_opt.col(k) - x_d).norm());
  }
  return out;
}

ObjectiveSpec with_tracking_gamma(const ObjectiveSpec& base, double gamma) {
  ObjectiveSpec spec = base;
  std::visit([gamma](auto& tr) { tr.gamma = gamma; }, spec.tracking);
  return spec;
}

std::vector<SweepRow> threshold_sweep(const DiscreteLinearSystem& sys, const ObjectiveSpec& base,
                                      const std::vector<double>& gammas,
                                      const Eigen::VectorXd& x_d, const Eigen::VectorXd& u_d,
                                      const SolverConfig& cfg, double detect_tol) {
  for (size_t i = 1; i < gammas.size(); ++i) {
    if (gammas[i] < gammas[i - 1]) {
      throw std::invalid_argument("threshold_sweep: gamma grid must be ascending");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(gammas.size());
  for (double gamma : gammas) {
    SweepRow row;
    row.gamma = gamma;
    try {
      const SolveReport rep = solve_primal_dual(sys, with_tracking_gamma(base, gamma), cfg);
      const TurnpikeReport tp =
          detect(rep.x_opt, rep.u_opt, x_d, u_d, detect_tol, base.state_norm_weight);
      row.arrival_index = tp.arrival_index;
      row.support_end_index = tp.support_end_index;
      row.objective = rep.objective;
      row.converged = rep.converged;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace turnpike
