#pragma once

#include <stdexcept>

namespace turnpike {

/// Uniform grid on [0, T] with N + 1 nodes. Node k sits at k * T / N, which
/// makes node(steps) == horizon exact in floating point.
struct TimeGrid {
  double horizon = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double horizon_, int steps_) : horizon(horizon_), steps(steps_) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (steps < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
  }

  double dt() const { return horizon / steps; }
  double node(int k) const { return horizon * k / steps; }
  int nodes() const { return steps + 1; }
};

}  // namespace turnpike
