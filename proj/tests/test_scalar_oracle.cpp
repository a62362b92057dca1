#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "turnpike/scalar_oracle.hpp"

using namespace turnpike;

namespace {

double root_residual(double gamma, double t0) {
  return std::abs((t0 - 1.0) * std::exp(t0) - (1.0 / gamma - 1.0));
}

// Classic RK4 on y' = rhs(t, y), fixed step count.
template <typename Rhs>
double rk4(Rhs rhs, double y0, double t_begin, double t_end, int steps) {
  double y = y0;
  const double h = (t_end - t_begin) / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = t_begin + h * i;
    const double k1 = rhs(t, y);
    const double k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = rhs(t + h, y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

TEST_CASE("t0 roots of (t-1)e^t = 1/gamma - 1") {
  CHECK(solve_t0(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  // recomputed by bisection to 1e-12 before freezing
  CHECK(solve_t0(2.0) == doctest::Approx(0.76803904701346557).epsilon(1e-12));
  CHECK(solve_t0(0.5) == doctest::Approx(1.27846454276107380).epsilon(1e-12));
  CHECK(solve_t0(10.0) == doctest::Approx(0.39165871526656813).epsilon(1e-12));
  for (double gamma : {0.5, 1.0, 2.0, 10.0}) {
    CHECK(root_residual(gamma, solve_t0(gamma)) <= 1e-12);
  }
}

TEST_CASE("t0 is strictly decreasing in gamma and vanishes in the limit") {
  double prev = std::numeric_limits<double>::infinity();
  for (double lg = -2.0; lg <= 6.0; lg += 0.5) {
    const double t0 = solve_t0(std::pow(10.0, lg));
    CHECK(t0 < prev);
    prev = t0;
  }
  CHECK(solve_t0(1e6) < 1e-2);
}

TEST_CASE("t0 domain errors") {
  CHECK_THROWS_AS(solve_t0(0.0), std::domain_error);
  CHECK_THROWS_AS(solve_t0(-1.0), std::domain_error);
  CHECK_THROWS_AS(solve_t0(std::nan("")), std::domain_error);
  CHECK_THROWS_AS(solve_t0(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("example 1 control values") {
  Example1Params p{1.0, 2.0};
  CHECK(example1_control(p, 0.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  CHECK(example1_control(p, 1.0) == 0.0);  // t0(1) = 1
  CHECK(example1_control(p, 1.5) == 0.0);
  for (int k = 0; k <= 100; ++k) CHECK(example1_control(p, 2.0 * k / 100) >= 0.0);
  CHECK_THROWS_AS(example1_control(p, -0.1), std::domain_error);
  CHECK_THROWS_AS(example1_control(p, 2.1), std::domain_error);
}

TEST_CASE("example 1 state values") {
  for (double gamma : {0.5, 1.0, 2.0}) {
    CHECK(example1_state({gamma, 3.0}, 0.0) == doctest::Approx(-1.0).epsilon(1e-12));
  }
  Example1Params p{1.0, 2.0};
  CHECK(example1_state(p, 1.0) == 0.0);
  // 0.5 e^{1.5} - e, frozen from the closed form
  CHECK(example1_state(p, 0.5) == doctest::Approx(-0.47743729329001282).epsilon(1e-12));
  for (int k = 0; k <= 200; ++k) CHECK(example1_state(p, 2.0 * k / 200) <= 1e-12);
}

TEST_CASE("example 1 state cross-checked by integrating the dynamics") {
  Example1Params p{1.0, 2.0};
  const double y =
      rk4([&](double t, double y) { return y + std::exp(t) * example1_control(p, t); }, -1.0, 0.0,
          0.5, 4000);
  CHECK(example1_state(p, 0.5) == doctest::Approx(y).epsilon(1e-9));
}

TEST_CASE("control integral equals one for every gamma") {
  for (double gamma : {0.5, 1.0, 2.0, 10.0}) {
    CHECK(example1_moment_check({gamma, 3.0}) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("example 1 objective values") {
  // adaptive quadrature of the closed forms, frozen at 1e-10
  CHECK(example1_objective({1.0, 2.0}) == doctest::Approx(2.0972640247326626).epsilon(1e-10));
  CHECK(example1_objective({2.0, 2.0}) == doctest::Approx(2.4907968100294503).epsilon(1e-10));
  CHECK(example1_objective({0.5, 2.0}) == doctest::Approx(1.8173997758454918).epsilon(1e-10));
}

TEST_CASE("example 1 objective agrees with a dense trapezoid sum") {
  const Example1Params p{1.0, 2.0};
  const double t0 = solve_t0(1.0);
  const int n = 1000000;
  double sum = 0.0;
  const auto f = [&](double t) {
    const double u = example1_control(p, t);
    return 0.5 * u * u + u + p.gamma * std::abs(example1_state(p, t));
  };
  for (int i = 0; i < n; ++i) {
    const double a = t0 * i / n, b = t0 * (i + 1) / n;
    sum += 0.5 * (f(a) + f(b)) * (b - a);
  }
  CHECK(example1_objective(p) == doctest::Approx(sum).epsilon(1e-9));
}

TEST_CASE("objective contribution beyond t0 vanishes") {
  const Example1Params p{2.0, 2.0};
  const double t0 = solve_t0(2.0);
  for (int k = 1; k <= 50; ++k) {
    const double t = t0 + (2.0 - t0) * k / 50;
    CHECK(example1_control(p, t) == 0.0);
    CHECK(example1_state(p, t) == 0.0);
  }
}

TEST_CASE("example 1 feasibility validation names the failed inequality") {
  CHECK_THROWS_WITH_AS(validate(Example1Params{1.0, 0.5}), doctest::Contains("t0"),
                       std::domain_error);
  // T = 1.2 > t0 = 1 but e^1.2 < 1 + e
  CHECK_THROWS_WITH_AS(validate(Example1Params{1.0, 1.2}), doctest::Contains("feasibility"),
                       std::domain_error);
  CHECK_THROWS_AS(validate(Example1Params{-1.0, 2.0}), std::domain_error);
  CHECK_NOTHROW(validate(Example1Params{1.0, 2.0}));
}

TEST_CASE("general solution reduces to example 1") {
  for (double gamma : {0.5, 1.0, 2.0}) {
    ScalarProblem p;
    p.f = Coefficient::constant(1.0);
    p.g = Coefficient::exponential(1.0, 1.0);
    p.alpha = -1.0;
    p.gamma = gamma;
    p.horizon = 2.0;
    const ScalarOracleSolution sol = general_solution(p);
    CHECK(sol.t0 == doctest::Approx(solve_t0(gamma)).epsilon(1e-8));
    const Example1Params ep{gamma, 2.0};
    for (int k = 0; k <= 200; ++k) {
      const double t = 2.0 * k / 200;
      CHECK(std::abs(sol.control(t) - example1_control(ep, t)) <= 1e-7);
    }
  }
}

TEST_CASE("general solution invariants on a dense grid") {
  ScalarProblem p;
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::constant(1.0);
  p.alpha = -1.0;
  p.gamma = 2.0;
  p.horizon = 3.0;
  const ScalarOracleSolution sol = general_solution(p);

  CHECK(sol.moment_residual <= 1e-10);
  CHECK(std::abs(sol.state(p.horizon)) <= 1e-8);
  for (int k = 0; k <= 600; ++k) {
    const double t = p.horizon * k / 600;
    CHECK(sol.control(t) >= 0.0);
    CHECK(sol.state(t) <= 1e-8);
    if (t >= sol.t0) {
      CHECK(sol.control(t) <= 1e-9);
      CHECK(std::abs(sol.state(t)) <= 1e-8);
      // stationarity inequality on the inactive arc
      const double g = p.g(t);
      const double e = -1.0 - p.gamma * g * sol.H(t) / sol.F(t) + sol.lambda * g / sol.F(t);
      CHECK(e <= 1e-9);
    }
  }
}

TEST_CASE("general solution for constant coefficients has a known closed form") {
  // f = g = 1, alpha = -1, gamma = 2: lambda = 2 + sqrt(7),
  // t0 = log((4 + sqrt(7))/3), from the quadratic for the moment equation.
  ScalarProblem p;
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::constant(1.0);
  p.alpha = -1.0;
  p.gamma = 2.0;
  p.horizon = 3.0;
  const ScalarOracleSolution sol = general_solution(p);
  CHECK(sol.lambda == doctest::Approx(2.0 + std::sqrt(7.0)).epsilon(1e-6));
  CHECK(sol.t0 == doctest::Approx(std::log((4.0 + std::sqrt(7.0)) / 3.0)).epsilon(1e-7));

  // terminal state by an independent integration of the dynamics
  const double y_end =
      rk4([&](double t, double y) { return y + sol.control(t); }, -1.0, 0.0, 3.0, 20000);
  CHECK(std::abs(y_end) <= 1e-6);
}

TEST_CASE("general solution near the vanishing initial state") {
  ScalarProblem p;
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::constant(1.0);
  p.alpha = -1e-10;
  p.gamma = 2.0;
  p.horizon = 1.0;
  const ScalarOracleSolution sol = general_solution(p);
  CHECK(sol.t0 < 1e-3);
}

TEST_CASE("general solution domain errors") {
  ScalarProblem p;
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::constant(1.0);
  p.alpha = 0.0;  // must be negative
  p.gamma = 2.0;
  p.horizon = 1.0;
  CHECK_THROWS_AS(general_solution(p), std::domain_error);
  p.alpha = -1.0;
  p.gamma = 0.0;
  CHECK_THROWS_AS(general_solution(p), std::domain_error);
  p.gamma = 2.0;
  p.f = Coefficient::polynomial({0.5, -1.0});  // crosses zero inside [0, 1]
  CHECK_THROWS_WITH_AS(general_solution(p), doctest::Contains("f("), std::domain_error);
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::polynomial({0.25, -1.0});
  CHECK_THROWS_WITH_AS(general_solution(p), doctest::Contains("g("), std::domain_error);
}

TEST_CASE("gamma threshold for constant coefficients") {
  ScalarProblem p;
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::constant(1.0);
  p.alpha = -1.0;
  p.gamma = 1.0;  // ignored by the threshold computation
  p.horizon = 2.0;
  const GammaThreshold th = gamma_threshold(p, 1.0);
  // frozen from direct quadrature of the printed formulas
  CHECK(th.gamma_t1 == doctest::Approx(0.84134718841558464).epsilon(1e-9));
  CHECK(th.lambda1 == doctest::Approx(4.1639534137386528).epsilon(1e-9));
  CHECK(th.derivative_assumption_holds);

  // identity lambda1 g/F = 1 + gamma(t1) g H / F at t1
  const ScalarOracleSolution ref = general_solution(p);
  const double f1 = ref.F(1.0), h1 = ref.H(1.0);
  CHECK(std::abs(th.lambda1 / f1 - (1.0 + th.gamma_t1 * h1 / f1)) <= 1e-9);

  // the threshold weight places the arrival exactly at t1
  ScalarProblem at = p;
  at.gamma = th.gamma_t1;
  const ScalarOracleSolution sol = general_solution(at);
  CHECK(sol.t0 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.control(1.0 + 1e-6) == 0.0);
  CHECK(sol.control(0.999) > 0.0);
}

TEST_CASE("gamma threshold derivative assumption flags") {
  ScalarProblem p;
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::exponential(1.0, 1.0);  // g' = g = f g, boundary case
  p.alpha = -1.0;
  p.horizon = 2.0;
  CHECK(gamma_threshold(p, 1.0).derivative_assumption_holds);

  p.g = Coefficient::exponential(1.0, 2.0);  // g' = 2g > f g
  const GammaThreshold th = gamma_threshold(p, 0.5);
  CHECK_FALSE(th.derivative_assumption_holds);
  CHECK(th.gamma_t1 > 0.0);  // numbers still returned
}

TEST_CASE("gamma threshold rejects infeasible split times") {
  ScalarProblem p;
  p.f = Coefficient::constant(1.0);
  p.g = Coefficient::constant(1.0);
  p.alpha = -1.0;
  p.horizon = 3.5;
  CHECK_THROWS_WITH_AS(gamma_threshold(p, 3.0), doctest::Contains("condition"),
                       std::runtime_error);
  CHECK_THROWS_AS(gamma_threshold(p, 0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_threshold(p, 3.5), std::domain_error);
}
