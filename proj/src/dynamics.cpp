#include "turnpike/dynamics.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace turnpike {

DiscreteLinearSystem::DiscreteLinearSystem(TimeGrid grid, std::vector<Eigen::MatrixXd> a_steps,
                                           std::vector<Eigen::MatrixXd> b_steps,
                                           Eigen::VectorXd x0)
    : grid_(grid), a_(std::move(a_steps)), b_(std::move(b_steps)), x0_(std::move(x0)) {
  const auto count_ok = [&](size_t s) {
    return s == 1 || s == static_cast<size_t>(grid_.steps);
  };
  if (a_.empty() || b_.empty() || !count_ok(a_.size()) || !count_ok(b_.size())) {
    throw std::invalid_argument("DiscreteLinearSystem: need 1 or N step matrices");
  }
  const int n = static_cast<int>(x0_.size());
  const int m = static_cast<int>(b_[0].cols());
  for (size_t k = 0; k < a_.size(); ++k) {
    if (a_[k].rows() != n || a_[k].cols() != n || !a_[k].allFinite()) {
      std::ostringstream os;
      os << "DiscreteLinearSystem: bad A at step " << k << " (expected " << n << "x" << n << ")";
      throw std::invalid_argument(os.str());
    }
  }
  for (size_t k = 0; k < b_.size(); ++k) {
    if (b_[k].rows() != n || b_[k].cols() != m || !b_[k].allFinite()) {
      std::ostringstream os;
      os << "DiscreteLinearSystem: bad B at step " << k << " (expected " << n << "x" << m << ")";
      throw std::invalid_argument(os.str());
    }
  }
  if (!x0_.allFinite()) throw std::invalid_argument("DiscreteLinearSystem: x0 has non-finite entries");
}

void DiscreteLinearSystem::set_initial_state(const Eigen::VectorXd& x0) {
  if (x0.size() != x0_.size() || !x0.allFinite()) {
    throw std::invalid_argument("set_initial_state: wrong dimension or non-finite entries");
  }
  x0_ = x0;
}

Eigen::MatrixXd simulate(const DiscreteLinearSystem& sys, const Eigen::MatrixXd& u) {
  const int n = sys.state_dim();
  const int m = sys.control_dim();
  const int steps = sys.grid().steps;
  if (u.rows() != m || u.cols() != steps) {
    std::ostringstream os;
    os << "simulate: control is " << u.rows() << "x" << u.cols() << ", expected " << m << "x"
       << steps << " (mismatch from step " << std::min<int>(steps, static_cast<int>(u.cols()))
       << ")";
    throw std::invalid_argument(os.str());
  }
  Eigen::MatrixXd x(n, steps + 1);
  x.col(0) = sys.x0();
  for (int k = 0; k < steps; ++k) {
    x.col(k + 1).noalias() = sys.A(k) * x.col(k);
    x.col(k + 1).noalias() += sys.B(k) * u.col(k);
  }
  return x;
}

DiscreteLinearSystem from_scalar_ode(const Coefficient& f, const Coefficient& g,
                                     const TimeGrid& grid, double alpha) {
  const double dt = grid.dt();
  std::vector<Eigen::MatrixXd> a(grid.steps), b(grid.steps);
  for (int k = 0; k < grid.steps; ++k) {
    const double t_next = grid.node(k + 1);
    const double fk = f(t_next);
    const double denom = 1.0 - dt * fk;
    if (!(denom > 0.0)) {
      std::ostringstream os;
      os << "from_scalar_ode: dt*f(" << t_next << ") = " << dt * fk
         << " >= 1; use a finer grid (need dt < " << 1.0 / fk << ")";
      throw std::invalid_argument(os.str());
    }
    a[k] = Eigen::MatrixXd::Constant(1, 1, 1.0 / denom);
    b[k] = Eigen::MatrixXd::Constant(1, 1, dt * g(t_next) / denom);
  }
  Eigen::VectorXd x0(1);
  x0 << alpha;
  return DiscreteLinearSystem(grid, std::move(a), std::move(b), std::move(x0));
}

namespace {

void validate_hyperbolic(const DiagHyperbolicConfig& cfg, const TimeGrid& grid) {
  if (!(cfg.d_plus > 0.0) || !(cfg.d_minus < 0.0)) {
    throw std::invalid_argument("from_diag_hyperbolic: need d_plus > 0 > d_minus");
  }
  if (cfg.eta0 > 0.0) throw std::invalid_argument("from_diag_hyperbolic: eta0 must be <= 0");
  if (cfg.cells < 2) throw std::invalid_argument("from_diag_hyperbolic: need at least two cells");
  const Eigen::Matrix2d& m = cfg.coupling;
  const double asym = std::abs(m(0, 1) - m(1, 0));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (asym > 1e-12 || m(0, 0) < -1e-12 || m(1, 1) < -1e-12 || det < -1e-12) {
    throw std::invalid_argument("from_diag_hyperbolic: coupling must be symmetric psd");
  }
  const double dx = cfg.length / cfg.cells;
  const double vmax = std::max(cfg.d_plus, -cfg.d_minus);
  const double required = dx / vmax;
  if (std::abs(grid.dt() - required) > 1e-12 * required) {
    std::ostringstream os;
    os << "from_diag_hyperbolic: CFL mismatch, grid dt = " << grid.dt() << " but dx/max-speed = "
       << required;
    throw std::invalid_argument(os.str());
  }
}

/// One lifted step of the hyperbolic system; linear in (state, control) by
/// construction so A and B materialize from unit vectors.
struct HyperbolicStepper {
  DiagHyperbolicConfig cfg;
  HyperbolicLayout lay;
  double dt = 0.0;
  double s_plus = 1.0;   // shift fraction of r_plus, 1 = exact copy
  double s_minus = 1.0;  // shift fraction of r_minus
  Eigen::Matrix2d source_inverse = Eigen::Matrix2d::Identity();

  Eigen::VectorXd step(const Eigen::VectorXd& x, double u) const {
    const int nx = lay.cells;
    const double z = lay.constant_index >= 0 ? x[lay.constant_index] : 0.0;
    // Full node fields at the old time; inflow nodes come from the faces.
    Eigen::VectorXd rp(nx + 1), rm(nx + 1);
    for (int j = 1; j <= nx; ++j) rp[j] = x[lay.rplus_index(j)];
    for (int j = 0; j < nx; ++j) rm[j] = x[lay.rminus_index(j)];
    rm[nx] = cfg.right.reflect * rp[nx] + cfg.right.control_gain * u + cfg.right.constant * z;
    rp[0] = cfg.left.reflect * rm[0] + cfg.left.control_gain * u + cfg.left.constant * z;

    Eigen::VectorXd out = Eigen::VectorXd::Zero(lay.state_dim);
    if (lay.constant_index >= 0) out[lay.constant_index] = z;

    // Transport: exact shift when the fraction is exactly one, otherwise
    // upwind linear interpolation toward the inflow side.
    Eigen::VectorXd rp_new(nx + 1), rm_new(nx + 1);
    rp_new[0] = 0.0;  // not part of the state
    for (int j = 1; j <= nx; ++j) {
      rp_new[j] = s_plus == 1.0 ? rp[j - 1] : s_plus * rp[j - 1] + (1.0 - s_plus) * rp[j];
    }
    rm_new[nx] = 0.0;
    for (int j = 0; j < nx; ++j) {
      rm_new[j] = s_minus == 1.0 ? rm[j + 1] : s_minus * rm[j + 1] + (1.0 - s_minus) * rm[j];
    }

    // Implicit source on interior nodes, where both components are state.
    if (cfg.eta0 != 0.0) {
      for (int j = 1; j < nx; ++j) {
        const Eigen::Vector2d rhs(rp_new[j], rm_new[j]);
        const Eigen::Vector2d sol = source_inverse * rhs;
        rp_new[j] = sol[0];
        rm_new[j] = sol[1];
      }
    }

    for (int j = 1; j <= nx; ++j) out[lay.rplus_index(j)] = rp_new[j];
    for (int j = 0; j < nx; ++j) out[lay.rminus_index(j)] = rm_new[j];

    if (lay.displacement_offset >= 0) {
      // y_t = scale * (r_plus + r_minus) integrated by a backward rectangle;
      // at x = L the minus component is slaved to the face condition.
      const double rm_at_L =
          cfg.right.reflect * rp_new[nx] + cfg.right.control_gain * u + cfg.right.constant * z;
      for (int j = 1; j <= nx; ++j) {
        const double rm_j = j < nx ? rm_new[j] : rm_at_L;
        out[lay.displacement_index(j)] =
            x[lay.displacement_index(j)] + dt * cfg.displacement_scale * (rp_new[j] + rm_j);
      }
    }
    return out;
  }
};

}  // namespace

std::pair<DiscreteLinearSystem, HyperbolicLayout> from_diag_hyperbolic(
    const DiagHyperbolicConfig& cfg, const TimeGrid& grid) {
  validate_hyperbolic(cfg, grid);
  const int nx = cfg.cells;
  const bool needs_constant = cfg.left.constant != 0.0 || cfg.right.constant != 0.0;

  HyperbolicLayout lay;
  lay.cells = nx;
  lay.rplus_offset = 0;
  lay.rminus_offset = nx;
  int dim = 2 * nx;
  if (needs_constant) lay.constant_index = dim++;
  if (cfg.with_displacement) {
    lay.displacement_offset = dim;
    dim += nx;
  }
  lay.state_dim = dim;

  HyperbolicStepper stepper;
  stepper.cfg = cfg;
  stepper.lay = lay;
  stepper.dt = grid.dt();
  const double dx = cfg.length / nx;
  const double vmax = std::max(cfg.d_plus, -cfg.d_minus);
  stepper.s_plus = cfg.d_plus >= -cfg.d_minus ? 1.0 : cfg.d_plus * grid.dt() / dx;
  stepper.s_minus = -cfg.d_minus >= cfg.d_plus ? 1.0 : -cfg.d_minus * grid.dt() / dx;
  (void)vmax;
  if (cfg.eta0 != 0.0) {
    stepper.source_inverse =
        (Eigen::Matrix2d::Identity() - grid.dt() * cfg.eta0 * cfg.coupling).inverse();
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    a.col(i) = stepper.step(Eigen::VectorXd::Unit(dim, i), 0.0);
  }
  Eigen::MatrixXd b(dim, 1);
  b.col(0) = stepper.step(Eigen::VectorXd::Zero(dim), 1.0);

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
  if (lay.constant_index >= 0) x0[lay.constant_index] = 1.0;

  DiscreteLinearSystem sys(grid, {std::move(a)}, {std::move(b)}, std::move(x0));
  return {std::move(sys), lay};
}

std::pair<DiscreteLinearSystem, HyperbolicLayout> wave_neumann_system(double length,
                                                                      double wave_speed, int cells,
                                                                      int steps,
                                                                      bool with_displacement) {
  if (!(wave_speed > 0.0)) throw std::invalid_argument("wave_neumann_system: speed must be > 0");
  DiagHyperbolicConfig cfg;
  cfg.d_plus = wave_speed;
  cfg.d_minus = -wave_speed;
  cfg.eta0 = 0.0;
  cfg.length = length;
  cfg.cells = cells;
  // r_plus = y_t - c y_x, r_minus = y_t + c y_x. y(t,0) = 0 reflects with
  // coefficient -1; y_x(t,L) = u injects 2 c u into the minus component.
  cfg.left = FaceCondition{-1.0, 0.0, 0.0};
  cfg.right = FaceCondition{1.0, 2.0 * wave_speed, 0.0};
  cfg.with_displacement = with_displacement;
  cfg.displacement_scale = 0.5;
  const double dx = length / cells;
  const TimeGrid grid(steps * (dx / wave_speed), steps);
  return from_diag_hyperbolic(cfg, grid);
}

Eigen::MatrixXd controllability_operator(const DiscreteLinearSystem& sys, int target_index) {
  const int n = sys.state_dim();
  const int m = sys.control_dim();
  if (target_index < 1 || target_index > sys.grid().steps) {
    throw std::invalid_argument("controllability_operator: target index out of range");
  }
  Eigen::MatrixXd k(n, m * target_index);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);  // A_{k0-1} ... A_{j+1}
  for (int j = target_index - 1; j >= 0; --j) {
    k.middleCols(j * m, m).noalias() = phi * sys.B(j);
    if (j > 0) phi = phi * sys.A(j);
  }
  return k;
}

namespace {

Eigen::MatrixXd transition_product(const DiscreteLinearSystem& sys, int upto) {
  const int n = sys.state_dim();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < upto; ++k) phi = sys.A(k) * phi;
  return phi;
}

ControllabilityReport least_norm_report(const Eigen::MatrixXd& k, const Eigen::VectorXd& rhs,
                                        double free_map_norm, const char* what) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  const int full = static_cast<int>(k.rows());
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > 1e-10 * smax) ++rank;
  }
  if (rank < full || smax == 0.0) {
    std::ostringstream os;
    os << what << ": operator rank " << rank << " < " << full << " (sigma_max = " << smax
       << ", sigma_min = " << (sv.size() ? sv[sv.size() - 1] : 0.0) << ")";
    throw std::runtime_error(os.str());
  }
  const double smin = sv[sv.size() - 1];
  Eigen::VectorXd coefs = svd.matrixU().transpose() * rhs;
  coefs.array() /= sv.array();
  ControllabilityReport rep;
  rep.operator_rank = rank;
  rep.sigma_min = smin;
  rep.c1_hat = std::max(1.0, free_map_norm) / smin;
  Eigen::VectorXd u = svd.matrixV() * coefs;
  rep.residual = (k * u - rhs).norm();
  rep.u_exact = u;  // caller reshapes
  return rep;
}

double spectral_norm(const Eigen::MatrixXd& m) {
  return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues()[0];
}

}  // namespace

ControllabilityReport min_norm_exact_control(const DiscreteLinearSystem& sys,
                                             const Eigen::VectorXd& x_target, int target_index) {
  const int m = sys.control_dim();
  if (x_target.size() != sys.state_dim()) {
    throw std::invalid_argument("min_norm_exact_control: target has wrong dimension");
  }
  const Eigen::MatrixXd k = controllability_operator(sys, target_index);
  const Eigen::MatrixXd phi = transition_product(sys, target_index);
  const Eigen::VectorXd rhs = x_target - phi * sys.x0();
  ControllabilityReport rep =
      least_norm_report(k, rhs, spectral_norm(phi), "min_norm_exact_control");
  rep.u_exact = Eigen::Map<const Eigen::MatrixXd>(rep.u_exact.data(), m, target_index).eval();
  return rep;
}

Eigen::VectorXd TraceOperator::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) z[static_cast<int>(i)] = x[coords[i]];
  return z;
}

ControllabilityReport min_norm_nodal_control(const DiscreteLinearSystem& sys,
                                             const TraceOperator& trace,
                                             const Eigen::MatrixXd& z_target) {
  const int n = sys.state_dim();
  const int m = sys.control_dim();
  const int steps = sys.grid().steps;
  const int zd = trace.z_dim();
  if (trace.window_begin < 0 || trace.window_end > steps || trace.window_begin > trace.window_end ||
      zd == 0) {
    throw std::invalid_argument("min_norm_nodal_control: bad trace window");
  }
  for (int c : trace.coords) {
    if (c < 0 || c >= n) throw std::invalid_argument("min_norm_nodal_control: trace coordinate out of range");
  }
  if (z_target.rows() != zd || z_target.cols() != trace.window_length()) {
    throw std::invalid_argument("min_norm_nodal_control: z_target must be z_dim x window length");
  }

  const int rows = zd * trace.window_length();
  Eigen::MatrixXd k_pi = Eigen::MatrixXd::Zero(rows, m * steps);
  Eigen::MatrixXd free_map = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd rhs(rows);

  // Forward recursion on the influence matrix G_k = dx_k / du and on the
  // free-response transition, harvesting trace rows inside the window.
  Eigen::MatrixXd influence = Eigen::MatrixXd::Zero(n, m * steps);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd free_state = sys.x0();
  const auto harvest = [&](int node) {
    if (node < trace.window_begin || node > trace.window_end) return;
    const int row0 = (node - trace.window_begin) * zd;
    for (int i = 0; i < zd; ++i) {
      const int c = trace.coords[static_cast<size_t>(i)];
      k_pi.row(row0 + i) = influence.row(c);
      free_map.row(row0 + i) = phi.row(c);
      rhs[row0 + i] = z_target(i, node - trace.window_begin) - free_state[c];
    }
  };
  harvest(0);
  for (int k = 0; k < steps; ++k) {
    influence.leftCols(m * k) = sys.A(k) * influence.leftCols(m * k);
    influence.middleCols(m * k, m) = sys.B(k);
    phi = sys.A(k) * phi;
    free_state = sys.A(k) * free_state;
    harvest(k + 1);
  }

  ControllabilityReport rep =
      least_norm_report(k_pi, rhs, spectral_norm(free_map), "min_norm_nodal_control");
  rep.u_exact = Eigen::Map<const Eigen::MatrixXd>(rep.u_exact.data(), m, steps).eval();
  return rep;
}

Eigen::MatrixXd holdable_extension(const DiscreteLinearSystem& sys, const Eigen::VectorXd& x_d,
                                   const Eigen::VectorXd& u_d, int arrival_index) {
  const int steps = sys.grid().steps;
  if (arrival_index < 1 || arrival_index > steps) {
    throw std::invalid_argument("holdable_extension: arrival index out of range");
  }
  double worst = 0.0;
  for (int k = arrival_index; k < steps; ++k) {
    const double dev = (sys.A(k) * x_d + sys.B(k) * u_d - x_d).norm();
    worst = std::max(worst, dev);
  }
  if (worst > 1e-9 * (1.0 + x_d.norm())) {
    std::ostringstream os;
    os << "holdable_extension: (x_d, u_d) is not holdable, max |A x_d + B u_d - x_d| = " << worst;
    throw std::runtime_error(os.str());
  }
  const ControllabilityReport steer = min_norm_exact_control(sys, x_d, arrival_index);
  Eigen::MatrixXd u(sys.control_dim(), steps);
  u.leftCols(arrival_index) = steer.u_exact;
  for (int k = arrival_index; k < steps; ++k) u.col(k) = u_d;
  return u;
}

}  // namespace turnpike
