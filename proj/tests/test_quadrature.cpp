#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "turnpike/quadrature.hpp"

using namespace turnpike;

TEST_CASE("adaptive simpson on smooth integrands") {
  CHECK(adaptive_simpson([](double t) { return std::exp(t); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  CHECK(adaptive_simpson([](double t) { return std::sin(t); }, 0.0, M_PI) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(adaptive_simpson([](double) { return 3.0; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("adaptive simpson handles a kink") {
  const double v = adaptive_simpson([](double t) { return std::abs(t - 0.3); }, 0.0, 1.0, 1e-12);
  CHECK(v == doctest::Approx(0.5 * 0.09 + 0.5 * 0.49).epsilon(1e-10));
}

TEST_CASE("adaptive simpson rejects reversed intervals") {
  CHECK_THROWS_AS(adaptive_simpson([](double t) { return t; }, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("prefix integral matches the closed form at every node") {
  const int n = 257;
  const double h = 2.0 / (n - 1);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::exp(h * i);
  const Eigen::VectorXd out = prefix_integral(v, h);
  for (int i = 0; i < n; ++i) {
    CHECK(std::abs(out[i] - (std::exp(h * i) - 1.0)) <= 1e-9);
  }
}

TEST_CASE("prefix integral of a quadratic is exact") {
  const int n = 9;
  const double h = 0.5;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    const double t = h * i;
    v[i] = 3.0 * t * t - 2.0 * t + 1.0;
  }
  const Eigen::VectorXd out = prefix_integral(v, h);
  for (int i = 0; i < n; ++i) {
    const double t = h * i;
    CHECK(out[i] == doctest::Approx(t * t * t - t * t + t).epsilon(1e-14));
  }
}

TEST_CASE("prefix integral input validation") {
  Eigen::VectorXd two(2);
  two << 1.0, 2.0;
  CHECK_THROWS_AS(prefix_integral(two, 0.1), std::invalid_argument);
  Eigen::VectorXd three = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(prefix_integral(three, 0.0), std::invalid_argument);
}
