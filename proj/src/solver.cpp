#include "turnpike/solver.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace turnpike {

namespace {

double soft_threshold(double v, double r) {
  if (v > r) return v - r;
  if (v < -r) return v + r;
  return 0.0;
}

Eigen::MatrixXd broadcast_reference(const ObjectiveSpec& spec, int m, int steps) {
  if (spec.u_ref.rows() != m) {
    throw std::invalid_argument("solve: u_ref rows must match the control dimension");
  }
  if (spec.u_ref.cols() == 1) return spec.u_ref.replicate(1, steps);
  if (spec.u_ref.cols() != steps) {
    throw std::invalid_argument("solve: u_ref must have 1 or N columns");
  }
  return spec.u_ref;
}

/// Fenchel conjugate of the control cost at s, evaluated together with the
/// maximizer v* = soft(u_ref + s/dt, l1w).
double control_conjugate(const ObjectiveSpec& spec, const Eigen::MatrixXd& uref,
                         const Eigen::MatrixXd& s) {
  const double dt = spec.grid.dt();
  const double w = spec.control_l1_weight;
  double total = 0.0;
  for (int k = 0; k < s.cols(); ++k) {
    for (int i = 0; i < s.rows(); ++i) {
      const double a = uref(i, k);
      const double v = soft_threshold(a + s(i, k) / dt, w);
      total += s(i, k) * v - dt * (0.5 * (v - a) * (v - a) + w * std::abs(v));
    }
  }
  return total;
}

struct Splitting {
  TrackingMap track;
  TrackingMap all;  // track blocks plus the optional terminal pin
  int track_dim = 0;
  int pin_dim = 0;

  Eigen::VectorXd outputs(const DiscreteLinearSystem& sys, const Eigen::MatrixXd& u) const {
    return all.extract(simulate(sys, u));
  }
};

Splitting build_splitting(const DiscreteLinearSystem& sys, const ObjectiveSpec& spec,
                          const std::optional<Eigen::VectorXd>& pin) {
  Splitting s;
  s.track = build_tracking_map(spec, sys.state_dim());
  s.all = s.track;
  s.track_dim = s.track.total_dim;
  if (pin) {
    if (pin->size() != sys.state_dim()) {
      throw std::invalid_argument("solve: terminal pin has wrong dimension");
    }
    TrackingMap::Block b;
    b.node = sys.grid().steps;
    b.scale = 1.0;
    b.target = *pin;
    b.dim = sys.state_dim();
    b.offset = s.all.total_dim;
    s.all.blocks.push_back(std::move(b));
    s.all.total_dim += sys.state_dim();
    s.pin_dim = sys.state_dim();
  }
  return s;
}

double estimate_operator_norm(const DiscreteLinearSystem& sys_zero, const Splitting& split,
                              int m, int steps, unsigned seed, int iters) {
  if (split.all.total_dim == 0) return 0.0;
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd v(m, steps);
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < m; ++i) v(i, k) = dist(rng);
  }
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd z = split.outputs(sys_zero, v);
    const Eigen::MatrixXd w = adjoint_apply(sys_zero, split.all, z);
    lambda = w.norm();  // Rayleigh quotient of K^T K at the unit vector v
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return std::sqrt(lambda);
}

}  // namespace

SolveReport solve_primal_dual(const DiscreteLinearSystem& sys, const ObjectiveSpec& spec,
                              const SolverConfig& cfg,
                              const std::optional<Eigen::VectorXd>& terminal_pin) {
  const int m = sys.control_dim();
  const int steps = sys.grid().steps;
  if (spec.grid.steps != steps || std::abs(spec.grid.horizon - sys.grid().horizon) >
                                      1e-12 * std::max(1.0, sys.grid().horizon)) {
    throw std::invalid_argument("solve: objective and system disagree on the grid");
  }
  const Eigen::MatrixXd uref = broadcast_reference(spec, m, steps);
  const double dt = spec.grid.dt();

  const Splitting split = build_splitting(sys, spec, terminal_pin);
  DiscreteLinearSystem sys_zero = sys;
  sys_zero.set_initial_state(Eigen::VectorXd::Zero(sys.state_dim()));

  const double opnorm =
      estimate_operator_norm(sys_zero, split, m, steps, cfg.power_seed, cfg.power_iters);
  double tau = cfg.tau > 0.0 ? cfg.tau : (opnorm > 0.0 ? 0.99 / opnorm : 1.0);
  double sigma = cfg.sigma > 0.0 ? cfg.sigma : (opnorm > 0.0 ? 0.99 / opnorm : 1.0);
  if (tau * sigma * opnorm * opnorm >= 1.0) {
    std::ostringstream os;
    os << "solve: step sizes violate tau*sigma*|K|^2 < 1 (tau=" << tau << ", sigma=" << sigma
       << ", |K|=" << opnorm << ")";
    throw std::invalid_argument(os.str());
  }

  // Offsets of the affine output map, for the dual value <p, c>.
  const Eigen::VectorXd offsets = split.outputs(sys, Eigen::MatrixXd::Zero(m, steps));

  const double mu = dt;  // strong convexity of the control cost
  const double tau0 = tau, sigma0 = sigma;
  int restart_period = cfg.restart_every;
  if (restart_period == 0 && cfg.accelerate) {
    // one contraction cycle needs roughly |K| sqrt(2/mu) iterations
    const double suggested = 2.5 * opnorm * std::sqrt(2.0 / mu);
    restart_period = static_cast<int>(std::clamp(suggested, 100.0, 20000.0));
  }
  Eigen::MatrixXd u = uref;
  Eigen::MatrixXd u_bar = u;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(split.all.total_dim);
  Eigen::MatrixXd ktp = Eigen::MatrixXd::Zero(m, steps);

  const double pin_scale = terminal_pin ? 1.0 + terminal_pin->norm() : 1.0;
  SolveReport rep;
  int iter = 0;
  bool converged = false;
  double gap = std::numeric_limits<double>::infinity();
  double feas = 0.0;

  const auto prox_g = [&](const Eigen::MatrixXd& v, double step) {
    Eigen::MatrixXd out(m, steps);
    const double sdt = step * dt;
    for (int k = 0; k < steps; ++k) {
      for (int i = 0; i < m; ++i) {
        out(i, k) =
            soft_threshold(v(i, k) + sdt * uref(i, k), sdt * spec.control_l1_weight) / (1.0 + sdt);
      }
    }
    return out;
  };

  for (iter = 0; iter < cfg.max_iters; ++iter) {
    if (split.all.total_dim > 0) {
      const Eigen::VectorXd z_bar = split.outputs(sys, u_bar);
      p += sigma * z_bar;
      split.track.project_dual(p.head(split.track_dim));
      ktp = adjoint_apply(sys, split.all, p);
    }
    const Eigen::MatrixXd u_new = prox_g(u - tau * ktp, tau);

    double theta = cfg.over_relaxation;
    if (cfg.accelerate) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * mu * tau);
      tau *= theta;
      sigma /= theta;
    }
    u_bar = u_new + theta * (u_new - u);
    u = u_new;
    if (cfg.accelerate && restart_period > 0 && (iter + 1) % restart_period == 0) {
      tau = tau0;
      sigma = sigma0;
      u_bar = u;
    }

    if ((iter + 1) % cfg.gap_check_interval == 0 || iter + 1 == cfg.max_iters) {
      if (!u.allFinite() || !p.allFinite()) {
        std::ostringstream os;
        os << "solve: iterates diverged (non-finite values at iteration " << iter + 1 << ")";
        throw std::runtime_error(os.str());
      }
      const Eigen::VectorXd z = split.outputs(sys, u);
      double primal = 0.0;
      for (int k = 0; k < steps; ++k) {
        primal += dt * (0.5 * (u.col(k) - uref.col(k)).squaredNorm() +
                        spec.control_l1_weight * u.col(k).lpNorm<1>());
      }
      primal += split.track.value(z.head(split.track_dim));
      feas = split.pin_dim > 0 ? z.tail(split.pin_dim).norm() : 0.0;
      if (split.pin_dim > 0) {
        primal += p.tail(split.pin_dim).dot(z.tail(split.pin_dim));  // Lagrangian term
      }
      const double dual = -control_conjugate(spec, uref, -ktp) + p.dot(offsets);
      gap = (primal - dual) / (1.0 + std::abs(primal));
      if (gap <= cfg.tol_gap && feas <= cfg.terminal_feas_tol * pin_scale) {
        converged = true;
        ++iter;
        break;
      }
    }
  }

  rep.u_opt = u;
  rep.x_opt = simulate(sys, u);
  const ObjectiveParts parts = evaluate_parts(spec, u, rep.x_opt);
  rep.objective = parts.total();
  rep.control_quadratic = parts.control_quadratic;
  rep.control_l1 = parts.control_l1;
  rep.tracking = parts.tracking;
  rep.gap = gap;
  rep.iterations = iter;
  rep.converged = converged;
  rep.dual = p.head(split.track_dim);
  rep.terminal_residual = feas;
  return rep;
}

namespace {

struct ScalarTranscription {
  Eigen::VectorXd free_response;      // phi_k, k = 0..N
  Eigen::MatrixXd influence;          // psi(k, j) = dx_k / du_j
};

ScalarTranscription scalar_influence(const DiscreteLinearSystem& sys) {
  const int steps = sys.grid().steps;
  ScalarTranscription t;
  t.free_response.resize(steps + 1);
  t.influence = Eigen::MatrixXd::Zero(steps + 1, steps);
  t.free_response[0] = sys.x0()[0];
  for (int k = 0; k < steps; ++k) {
    const double a = sys.A(k)(0, 0);
    const double b = sys.B(k)(0, 0);
    t.free_response[k + 1] = a * t.free_response[k];
    t.influence.row(k + 1) = a * t.influence.row(k);
    t.influence(k + 1, k) = b;
  }
  return t;
}

}  // namespace

SolveReport brute_force_oracle(const DiscreteLinearSystem& sys, const ObjectiveSpec& spec) {
  if (sys.state_dim() != 1 || sys.control_dim() != 1) {
    throw std::invalid_argument("brute_force_oracle: only scalar state and control supported");
  }
  const auto* tracking = std::get_if<PointwiseL1Tracking>(&spec.tracking);
  if (!tracking) {
    throw std::invalid_argument("brute_force_oracle: only pointwise-L1 tracking supported");
  }
  const int steps = sys.grid().steps;
  if (steps > 5) throw std::invalid_argument("brute_force_oracle: instance too large (N > 5)");
  if (spec.grid.steps != steps) {
    throw std::invalid_argument("brute_force_oracle: objective and system disagree on the grid");
  }

  const double dt = spec.grid.dt();
  const Eigen::MatrixXd uref = broadcast_reference(spec, 1, steps);
  const ScalarTranscription tr = scalar_influence(sys);

  std::vector<int> tracked;  // nodes with an active weight; node 0 is fixed
  for (int k = 1; k <= steps; ++k) {
    if (tracking->gamma * tracking->node_weights[k] > 0.0) tracked.push_back(k);
  }
  const double target = tracking->target.size() ? tracking->target[0] : 0.0;
  const bool enumerate_controls = spec.control_l1_weight > 0.0;

  long control_patterns = 1;
  if (enumerate_controls) {
    for (int k = 0; k < steps; ++k) control_patterns *= 3;
  }
  long tracked_patterns = 1;
  for (size_t i = 0; i < tracked.size(); ++i) tracked_patterns *= 3;

  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_u;
  long candidates = 0;

  std::vector<int> cstate(steps), tstate(tracked.size());
  for (long cp = 0; cp < control_patterns; ++cp) {
    long c = cp;
    for (int k = 0; k < steps; ++k) {
      cstate[k] = enumerate_controls ? static_cast<int>(c % 3) : 1;
      c /= 3;
    }
    std::vector<int> free_controls;
    for (int k = 0; k < steps; ++k) {
      if (cstate[k] != 0) free_controls.push_back(k);
    }
    const int nf = static_cast<int>(free_controls.size());

    for (long tp = 0; tp < tracked_patterns; ++tp) {
      long t = tp;
      for (size_t i = 0; i < tracked.size(); ++i) {
        tstate[i] = static_cast<int>(t % 3);
        t /= 3;
      }
      ++candidates;

      // Quadratic model on the free controls under this sign pattern.
      Eigen::VectorXd lin = Eigen::VectorXd::Zero(nf);
      for (int i = 0; i < nf; ++i) {
        const int k = free_controls[i];
        lin[i] = -dt * uref(0, k);
        if (enumerate_controls) {
          lin[i] += dt * spec.control_l1_weight * (cstate[k] == 1 ? 1.0 : -1.0);
        }
      }
      std::vector<int> pinned;
      for (size_t i = 0; i < tracked.size(); ++i) {
        const int node = tracked[i];
        const double bound =
            tracking->gamma * tracking->node_weights[node] * dt * spec.state_norm_weight;
        if (tstate[i] == 0) {
          pinned.push_back(node);
        } else {
          const double sign = tstate[i] == 1 ? 1.0 : -1.0;
          for (int j = 0; j < nf; ++j) lin[j] += bound * sign * tr.influence(node, free_controls[j]);
        }
      }

      const int nc = static_cast<int>(pinned.size());
      Eigen::MatrixXd constraints(nc, nf);
      Eigen::VectorXd rhs(nc);
      for (int r = 0; r < nc; ++r) {
        for (int j = 0; j < nf; ++j) constraints(r, j) = tr.influence(pinned[r], free_controls[j]);
        rhs[r] = target - tr.free_response[pinned[r]];
      }

      Eigen::VectorXd sol;
      if (nf == 0) {
        if (nc > 0 && rhs.lpNorm<Eigen::Infinity>() > 1e-9) continue;
        sol.resize(0);
      } else if (nc == 0) {
        sol = -lin / dt;  // Hessian is dt * identity
      } else {
        // Feasible point + null-space reduction keeps redundant pin rows
        // from poisoning the pattern.
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(constraints);
        const Eigen::VectorXd u_part = cod.solve(rhs);
        if ((constraints * u_part - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * (1.0 + rhs.norm())) {
          continue;  // inconsistent pins
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(constraints);
        const Eigen::MatrixXd kernel = lu.kernel();
        if (lu.rank() == nf) {
          sol = u_part;
        } else {
          const Eigen::MatrixXd zhz = dt * (kernel.transpose() * kernel);
          const Eigen::VectorXd rhs_v = -kernel.transpose() * (dt * u_part + lin);
          sol = u_part + kernel * zhz.ldlt().solve(rhs_v);
        }
      }

      Eigen::MatrixXd u_full = Eigen::MatrixXd::Zero(1, steps);
      for (int j = 0; j < nf; ++j) u_full(0, free_controls[j]) = sol[j];
      const double value = evaluate(spec, u_full, simulate(sys, u_full));
      if (value < best) {
        best = value;
        best_u = u_full;
      }
    }
  }

  SolveReport rep;
  rep.u_opt = best_u;
  rep.x_opt = simulate(sys, best_u);
  const ObjectiveParts parts = evaluate_parts(spec, best_u, rep.x_opt);
  rep.objective = parts.total();
  rep.control_quadratic = parts.control_quadratic;
  rep.control_l1 = parts.control_l1;
  rep.tracking = parts.tracking;
  rep.gap = 0.0;
  rep.iterations = static_cast<int>(candidates);
  rep.converged = true;
  return rep;
}

double subgradient_certificate(const DiscreteLinearSystem& sys, const ObjectiveSpec& spec,
                               const Eigen::MatrixXd& u, const Eigen::VectorXd* dual) {
  const int m = sys.control_dim();
  const int steps = sys.grid().steps;
  const Eigen::MatrixXd uref = broadcast_reference(spec, m, steps);
  const double dt = spec.grid.dt();
  const double w1 = dt * spec.control_l1_weight;

  const TrackingMap map = build_tracking_map(spec, sys.state_dim());
  DiscreteLinearSystem sys_zero = sys;
  sys_zero.set_initial_state(Eigen::VectorXd::Zero(sys.state_dim()));

  // Minimum-norm subgradient given a dual candidate: the L1 subgradient is
  // free on exact zeros of u, so it clamps the residual toward zero there.
  const auto residual_norm = [&](const Eigen::VectorXd& p) {
    const Eigen::MatrixXd ktp = adjoint_apply(sys, map, p);
    double sq = 0.0;
    for (int k = 0; k < steps; ++k) {
      for (int i = 0; i < m; ++i) {
        double r = dt * (u(i, k) - uref(i, k)) + ktp(i, k);
        if (std::abs(u(i, k)) > 1e-14) {
          r += w1 * (u(i, k) > 0.0 ? 1.0 : -1.0);
        } else {
          r = std::max(0.0, std::abs(r) - w1);
        }
        sq += r * r;
      }
    }
    return std::sqrt(sq);
  };

  Eigen::VectorXd p;
  if (dual) {
    if (dual->size() != map.total_dim) {
      throw std::invalid_argument("subgradient_certificate: dual has wrong dimension");
    }
    p = *dual;
    map.project_dual(p);
    return residual_norm(p);
  }

  // No dual supplied: pick a subgradient of the tracking term at the
  // current trajectory, then polish by projected gradient on the residual.
  const Eigen::VectorXd z = map.extract(simulate(sys, u));
  p = Eigen::VectorXd::Zero(map.total_dim);
  switch (map.penalty) {
    case TrackingMap::Penalty::WeightedL1:
      for (const auto& b : map.blocks) {
        for (int i = 0; i < b.dim; ++i) {
          const double zi = z[b.offset + i];
          p[b.offset + i] = zi > 0.0 ? b.l1_bound : (zi < 0.0 ? -b.l1_bound : 0.0);
        }
      }
      break;
    case TrackingMap::Penalty::MaxOfBlockNorms: {
      int best = -1;
      double best_norm = 0.0;
      for (size_t i = 0; i < map.blocks.size(); ++i) {
        const double nb = z.segment(map.blocks[i].offset, map.blocks[i].dim).norm();
        if (nb > best_norm) {
          best_norm = nb;
          best = static_cast<int>(i);
        }
      }
      if (best >= 0 && best_norm > 0.0) {
        const auto& b = map.blocks[static_cast<size_t>(best)];
        p.segment(b.offset, b.dim) = map.radius / best_norm * z.segment(b.offset, b.dim);
      }
      break;
    }
    case TrackingMap::Penalty::StackedL2:
      if (z.norm() > 0.0) p = map.radius / z.norm() * z;
      break;
    case TrackingMap::Penalty::Affine:
      break;
  }
  map.project_dual(p);

  const double l = [&] {
    Splitting split;
    split.track = map;
    split.all = map;
    split.track_dim = map.total_dim;
    return estimate_operator_norm(sys_zero, split, m, steps, 1, 30);
  }();
  const double step = l > 0.0 ? 1.0 / (l * l) : 1.0;

  double best = residual_norm(p);
  Eigen::VectorXd best_p = p;
  int stale = 0;
  for (int it = 0; it < 20000 && map.total_dim > 0 && best > 1e-12 && stale < 800; ++it) {
    // Gradient of 1/2 |r(p)|^2 in p is K r for the smooth selection of r.
    const Eigen::MatrixXd ktp = adjoint_apply(sys, map, p);
    Eigen::MatrixXd r(m, steps);
    for (int k = 0; k < steps; ++k) {
      for (int i = 0; i < m; ++i) {
        double v = dt * (u(i, k) - uref(i, k)) + ktp(i, k);
        if (std::abs(u(i, k)) > 1e-14) {
          v += w1 * (u(i, k) > 0.0 ? 1.0 : -1.0);
        } else {
          v = v > w1 ? v - w1 : (v < -w1 ? v + w1 : 0.0);
        }
        r(i, k) = v;
      }
    }
    p -= step * map.extract(simulate(sys_zero, r));
    map.project_dual(p);
    const double cur = residual_norm(p);
    if (cur < best * (1.0 - 1e-9)) {
      best = cur;
      best_p = p;
      stale = 0;
    } else {
      ++stale;
    }
  }
  return best;
}

}  // namespace turnpike
