#include "turnpike/scalar_oracle.hpp"

#include <Eigen/Core>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "turnpike/quadrature.hpp"

namespace turnpike {

namespace {

bool finite(double v) { return std::isfinite(v); }

[[noreturn]] void fail_domain(const std::string& msg) { throw std::domain_error(msg); }

}  // namespace

double solve_t0(double gamma) {
  if (!finite(gamma) || gamma <= 0.0) {
    fail_domain("solve_t0: gamma must be a finite positive number");
  }
  const double rhs = 1.0 / gamma - 1.0;
  const auto residual = [rhs](double t) { return (t - 1.0) * std::exp(t) - rhs; };
  double lo = 1e-12, hi = 10.0;
  while (residual(hi) < 0.0 && hi < 1e3) hi *= 2.0;
  if (residual(hi) < 0.0) fail_domain("solve_t0: failed to bracket the root");
  for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void validate(const Example1Params& p) {
  if (!finite(p.gamma) || p.gamma <= 0.0) fail_domain("Example1Params: gamma must be positive");
  if (!finite(p.horizon) || p.horizon <= 0.0) fail_domain("Example1Params: horizon must be positive");
  const double t0 = solve_t0(p.gamma);
  if (!(p.horizon > t0)) {
    std::ostringstream os;
    os << "Example1Params: horizon " << p.horizon << " violates T > t0 = " << t0;
    fail_domain(os.str());
  }
  if (!(p.gamma * std::exp(p.horizon) >= 1.0 + p.gamma * std::exp(t0))) {
    std::ostringstream os;
    os << "Example1Params: feasibility gamma*e^T >= 1 + gamma*e^{t0} violated (gamma=" << p.gamma
       << ", T=" << p.horizon << ", t0=" << t0 << ")";
    fail_domain(os.str());
  }
}

namespace {

void check_time(const Example1Params& p, double t) {
  if (!finite(t) || t < 0.0 || t > p.horizon) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << p.horizon << "]";
    fail_domain(os.str());
  }
}

}  // namespace

double example1_control(const Example1Params& p, double t) {
  validate(p);
  check_time(p, t);
  const double t0 = solve_t0(p.gamma);
  if (t > t0) return 0.0;
  return p.gamma * (std::exp(t0) - std::exp(t));
}

double example1_state(const Example1Params& p, double t) {
  validate(p);
  check_time(p, t);
  const double t0 = solve_t0(p.gamma);
  if (t >= t0) return 0.0;
  const double g = p.gamma;
  return g * t * std::exp(t + t0) - g * std::exp(2.0 * t) + (g - 1.0) * std::exp(t);
}

double example1_moment_check(const Example1Params& p) {
  validate(p);
  const double t0 = solve_t0(p.gamma);
  const double g = p.gamma;
  // u-hat vanishes beyond t0, so the integral stops there.
  return adaptive_simpson([&](double t) { return g * (std::exp(t0) - std::exp(t)); }, 0.0, t0,
                          1e-13);
}

double example1_objective(const Example1Params& p) {
  validate(p);
  const double t0 = solve_t0(p.gamma);
  const double g = p.gamma;
  const auto integrand = [&](double t) {
    const double u = g * (std::exp(t0) - std::exp(t));
    const double y = g * t * std::exp(t + t0) - g * std::exp(2.0 * t) + (g - 1.0) * std::exp(t);
    return 0.5 * u * u + u + g * std::abs(y);
  };
  return adaptive_simpson(integrand, 0.0, t0, 1e-12);
}

namespace {

constexpr int kPanels = 4096;  // Simpson panels of the internal grid

/// Dense samples of the general problem's building blocks. The node arrays
/// carry prefix integrals; off-node queries finish with a partial Simpson
/// panel so every evaluation keeps the O(h^4) quadrature accuracy.
struct OracleGrid {
  Coefficient f, g;
  double horizon = 0.0;
  double h = 0.0;
  Eigen::VectorXd t, fv, gv, cumf, F, H, g_over_F;

  double cumf_at(double x) const {
    const int i = clamp_index(x);
    const double a = t[i];
    if (x == a) return cumf[i];
    const double mid = 0.5 * (a + x);
    return cumf[i] + (x - a) / 6.0 * (f(a) + 4.0 * f(mid) + f(x));
  }
  double F_at(double x) const { return std::exp(cumf_at(x)); }
  double H_at(double x) const {
    const int i = clamp_index(x);
    const double a = t[i];
    if (x == a) return H[i];
    const double mid = 0.5 * (a + x);
    return H[i] + (x - a) / 6.0 * (F[i] + 4.0 * F_at(mid) + F_at(x));
  }

  int clamp_index(double x) const {
    int i = static_cast<int>(std::floor(x / h));
    if (i < 0) i = 0;
    const int last = static_cast<int>(t.size()) - 1;
    if (i > last) i = last;
    return i;
  }
};

std::shared_ptr<const OracleGrid> build_grid(const Coefficient& f, const Coefficient& g,
                                             double horizon) {
  if (!finite(horizon) || horizon <= 0.0) fail_domain("ScalarProblem: horizon must be positive");
  auto grid = std::make_shared<OracleGrid>();
  grid->f = f;
  grid->g = g;
  grid->horizon = horizon;
  const int n = 2 * kPanels + 1;
  grid->h = horizon / (n - 1);
  grid->t.resize(n);
  grid->fv.resize(n);
  grid->gv.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ti = horizon * i / (n - 1);
    grid->t[i] = ti;
    grid->fv[i] = f(ti);
    grid->gv[i] = g(ti);
    if (!(grid->fv[i] > 0.0) || !finite(grid->fv[i])) {
      std::ostringstream os;
      os << "ScalarProblem: f(" << ti << ") = " << grid->fv[i] << " is not positive";
      fail_domain(os.str());
    }
    if (!(grid->gv[i] > 0.0) || !finite(grid->gv[i])) {
      std::ostringstream os;
      os << "ScalarProblem: g(" << ti << ") = " << grid->gv[i] << " is not positive";
      fail_domain(os.str());
    }
  }
  grid->cumf = prefix_integral(grid->fv, grid->h);
  grid->F = grid->cumf.array().exp();
  grid->H = prefix_integral(grid->F, grid->h);
  grid->g_over_F = grid->gv.array() / grid->F.array();
  return grid;
}

void validate_problem(const ScalarProblem& p) {
  if (!finite(p.alpha) || p.alpha >= 0.0) fail_domain("ScalarProblem: alpha must be negative");
  if (!finite(p.gamma) || p.gamma <= 0.0) fail_domain("ScalarProblem: gamma must be positive");
}

/// Expression inside max{0, .}; the control support is where it is positive.
double shape_at(const OracleGrid& g, double gamma, double lambda, double x) {
  const double gx = g.g(x);
  const double Fx = g.F_at(x);
  return -1.0 - gamma * gx * g.H_at(x) / Fx + lambda * gx / Fx;
}

Eigen::VectorXd control_nodes(const OracleGrid& g, double gamma, double lambda) {
  Eigen::VectorXd u(g.t.size());
  for (int i = 0; i < g.t.size(); ++i) {
    const double e = -1.0 - gamma * g.gv[i] * g.H[i] / g.F[i] + lambda * g.g_over_F[i];
    u[i] = std::max(0.0, e);
  }
  return u;
}

double moment_of(const OracleGrid& g, double gamma, double lambda) {
  const Eigen::VectorXd u = control_nodes(g, gamma, lambda);
  const Eigen::VectorXd integrand = u.array() * g.g_over_F.array();
  return prefix_integral(integrand, g.h)[g.t.size() - 1];
}

}  // namespace

ScalarOracleSolution general_solution(const ScalarProblem& p) {
  validate_problem(p);
  auto grid = build_grid(p.f, p.g, p.horizon);
  const double target = -p.alpha;
  const double gamma = p.gamma;

  // The moment integral is nondecreasing in lambda and zero at lambda = 0,
  // so an expanding bracket plus bisection is exact.
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (moment_of(*grid, gamma, hi) < target) {
    hi *= 2.0;
    if (++guard > 90) {
      throw std::runtime_error("general_solution: moment equation unattainable for any lambda");
    }
  }
  double lambda = hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double m = moment_of(*grid, gamma, mid);
    if (std::abs(m - target) <= 1e-13) {
      lambda = mid;
      lo = hi = mid;
      break;
    }
    (m < target ? lo : hi) = mid;
    lambda = 0.5 * (lo + hi);
    if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
  }

  const Eigen::VectorXd u_nodes = control_nodes(*grid, gamma, lambda);
  const Eigen::VectorXd b_integrand = u_nodes.array() * grid->g_over_F.array();
  const auto b_nodes = std::make_shared<Eigen::VectorXd>(prefix_integral(b_integrand, grid->h));
  const double moment_residual = std::abs((*b_nodes)[grid->t.size() - 1] - target);

  // Arrival time: last sign change of the shape expression. Once the moment
  // equation holds this coincides with min{t : alpha + B(t) = 0}.
  const int n = static_cast<int>(grid->t.size());
  int last_pos = -1;
  for (int i = n - 1; i >= 0; --i) {
    if (u_nodes[i] > 0.0) {
      last_pos = i;
      break;
    }
  }
  double t0 = 0.0;
  if (last_pos < 0) {
    t0 = 0.0;  // control never active; only reachable for alpha -> 0-
  } else if (last_pos == n - 1) {
    t0 = grid->horizon;
  } else {
    double a = grid->t[last_pos], b = grid->t[last_pos + 1];
    for (int i = 0; i < 120 && b - a > 1e-16 * std::max(1.0, b); ++i) {
      const double mid = 0.5 * (a + b);
      (shape_at(*grid, gamma, lambda, mid) > 0.0 ? a : b) = mid;
    }
    t0 = 0.5 * (a + b);
  }

  const double alpha = p.alpha;
  auto b_at = [grid, b_nodes, gamma, lambda](double x) {
    const int i = grid->clamp_index(x);
    const double a = grid->t[i];
    if (x == a) return (*b_nodes)[i];
    const double mid = 0.5 * (a + x);
    const auto integrand = [&](double s) {
      return std::max(0.0, shape_at(*grid, gamma, lambda, s)) * grid->g(s) / grid->F_at(s);
    };
    return (*b_nodes)[i] + (x - a) / 6.0 * (integrand(a) + 4.0 * integrand(mid) + integrand(x));
  };

  ScalarOracleSolution sol;
  sol.t0 = t0;
  sol.lambda = lambda;
  sol.moment_residual = moment_residual;
  sol.control = [grid, gamma, lambda](double x) {
    return std::max(0.0, shape_at(*grid, gamma, lambda, x));
  };
  sol.state = [grid, b_at, alpha](double x) { return grid->F_at(x) * (alpha + b_at(x)); };
  sol.F = [grid](double x) { return grid->F_at(x); };
  sol.H = [grid](double x) { return grid->H_at(x); };
  return sol;
}

GammaThreshold gamma_threshold(const ScalarProblem& p, double t1) {
  if (!finite(p.alpha) || p.alpha >= 0.0) fail_domain("ScalarProblem: alpha must be negative");
  auto grid = build_grid(p.f, p.g, p.horizon);
  if (!(t1 > 0.0) || !(t1 < p.horizon)) {
    fail_domain("gamma_threshold: t1 must lie strictly inside (0, T)");
  }

  const int n = static_cast<int>(grid->t.size());
  Eigen::VectorXd gf2(n), hgf2(n);
  for (int i = 0; i < n; ++i) {
    gf2[i] = grid->g_over_F[i] * grid->g_over_F[i];
    hgf2[i] = grid->H[i] * gf2[i];
  }
  const Eigen::VectorXd p_gf2 = prefix_integral(gf2, grid->h);
  const Eigen::VectorXd p_gf = prefix_integral(grid->g_over_F, grid->h);
  const Eigen::VectorXd p_hgf2 = prefix_integral(hgf2, grid->h);

  const auto value_at = [&](const Eigen::VectorXd& prefix, auto integrand, double x) {
    const int i = grid->clamp_index(x);
    const double a = grid->t[i];
    if (x == a) return prefix[i];
    const double mid = 0.5 * (a + x);
    return prefix[i] + (x - a) / 6.0 * (integrand(a) + 4.0 * integrand(mid) + integrand(x));
  };
  const auto gf_fun = [&](double s) { return grid->g(s) / grid->F_at(s); };
  const auto gf2_fun = [&](double s) {
    const double v = gf_fun(s);
    return v * v;
  };
  const auto hgf2_fun = [&](double s) { return grid->H_at(s) * gf2_fun(s); };

  const double i_gf2 = value_at(p_gf2, gf2_fun, t1);
  const double i_gf = value_at(p_gf, gf_fun, t1);
  const double i_hgf2 = value_at(p_hgf2, hgf2_fun, t1);
  const double f_t1 = grid->F_at(t1);
  const double g_t1 = grid->g(t1);
  const double h_t1 = grid->H_at(t1);

  const double condition = -p.alpha - f_t1 / g_t1 * i_gf2 + i_gf;
  if (!(condition > 1e-12)) {
    std::ostringstream os;
    os << "gamma_threshold: condition at t1 = " << t1 << " fails, left-hand side "
       << (condition < 0.0 ? "negative" : "not positive") << " (" << condition << ")";
    throw std::runtime_error(os.str());
  }
  const double denom = h_t1 * i_gf2 - i_hgf2;
  if (!(denom > 0.0)) {
    throw std::runtime_error("gamma_threshold: degenerate denominator, H not increasing?");
  }

  GammaThreshold out;
  out.gamma_t1 = condition / denom;
  out.lambda1 = (-p.alpha + i_gf + out.gamma_t1 * i_hgf2) / i_gf2;

  // g' <= f g, by central differences on the internal grid. Violations only
  // void the monotone-support guarantee, so they downgrade to a flag.
  out.derivative_assumption_holds = true;
  for (int i = 1; i + 1 < n; ++i) {
    const double gp = (grid->gv[i + 1] - grid->gv[i - 1]) / (2.0 * grid->h);
    const double bound = grid->fv[i] * grid->gv[i];
    if (gp > bound + 1e-6 * (1.0 + std::abs(bound))) {
      out.derivative_assumption_holds = false;
      break;
    }
  }
  return out;
}

}  // namespace turnpike
