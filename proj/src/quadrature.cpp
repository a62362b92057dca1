#include "turnpike/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace turnpike {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double fm, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b >= a)) throw std::invalid_argument("adaptive_simpson: interval must satisfy b >= a");
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(f, a, fa, b, fb, fm);
  return adaptive_step(f, a, fa, b, fb, fm, whole, tol, 48);
}

Eigen::VectorXd prefix_integral(const Eigen::VectorXd& values, double h) {
  const Eigen::Index n = values.size();
  if (n < 3) throw std::invalid_argument("prefix_integral: need at least three samples");
  if (!(h > 0.0)) throw std::invalid_argument("prefix_integral: spacing must be positive");
  Eigen::VectorXd out(n);
  out[0] = 0.0;
  for (Eigen::Index j = 2; j < n; j += 2) {
    out[j] = out[j - 2] + h / 3.0 * (values[j - 2] + 4.0 * values[j - 1] + values[j]);
  }
  for (Eigen::Index j = 1; j < n; j += 2) {
    if (j + 1 < n) {
      out[j] = out[j - 1] + h / 12.0 * (5.0 * values[j - 1] + 8.0 * values[j] - values[j + 1]);
    } else {
      out[j] = out[j - 1] + h / 12.0 * (-values[j - 2] + 8.0 * values[j - 1] + 5.0 * values[j]);
    }
  }
  return out;
}

}  // namespace turnpike
