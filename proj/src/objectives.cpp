#include "turnpike/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace turnpike {

namespace {

double soft_threshold(double v, double r) {
  if (v > r) return v - r;
  if (v < -r) return v + r;
  return 0.0;
}

void check_control_dims(const ObjectiveSpec& spec, const Eigen::MatrixXd& u) {
  if (u.cols() != spec.grid.steps || (spec.u_ref.cols() != 1 && spec.u_ref.cols() != u.cols()) ||
      u.rows() != spec.u_ref.rows()) {
    std::ostringstream os;
    os << "objective: control is " << u.rows() << "x" << u.cols() << ", reference " << spec.u_ref.rows()
       << "x" << spec.u_ref.cols() << ", grid has " << spec.grid.steps << " steps";
    throw std::invalid_argument(os.str());
  }
}

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& coords) {
  if (coords.empty()) return x;
  Eigen::VectorXd out(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) out[static_cast<int>(i)] = x[coords[i]];
  return out;
}

int selected_dim(const std::vector<int>& coords, int state_dim) {
  return coords.empty() ? state_dim : static_cast<int>(coords.size());
}

void check_coords(const std::vector<int>& coords, int state_dim, const char* what) {
  for (int c : coords) {
    if (c < 0 || c >= state_dim) {
      std::ostringstream os;
      os << what << ": coordinate " << c << " out of range for state dimension " << state_dim;
      throw std::invalid_argument(os.str());
    }
  }
}

/// L1-ball projection of a nonnegative vector, sort based; ties resolve by
/// index order through the stable sort.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& v, double radius) {
  const double total = v.sum();
  if (total <= radius) return v;
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
  double running = 0.0, theta = 0.0;
  int count = 0;
  for (int idx : order) {
    running += v[idx];
    ++count;
    const double candidate = (running - radius) / count;
    if (candidate >= v[idx]) break;
    theta = candidate;
  }
  return (v.array() - theta).max(0.0);
}

}  // namespace

Eigen::VectorXd TrackingMap::extract(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd z(total_dim);
  for (const Block& b : blocks) {
    z.segment(b.offset, b.dim) = b.scale * (gather(x.col(b.node), b.coords) - b.target);
  }
  return z;
}

double TrackingMap::value(const Eigen::VectorXd& z) const {
  switch (penalty) {
    case Penalty::WeightedL1: {
      double v = 0.0;
      for (const Block& b : blocks) v += b.l1_bound * z.segment(b.offset, b.dim).lpNorm<1>();
      return v;
    }
    case Penalty::MaxOfBlockNorms: {
      double worst = 0.0;
      for (const Block& b : blocks) worst = std::max(worst, z.segment(b.offset, b.dim).norm());
      return radius * worst;
    }
    case Penalty::StackedL2:
      return radius * z.norm();
    case Penalty::Affine:
      return 0.0;
  }
  return 0.0;
}

void TrackingMap::project_dual(Eigen::Ref<Eigen::VectorXd> p) const {
  switch (penalty) {
    case Penalty::WeightedL1:
      for (const Block& b : blocks) {
        auto seg = p.segment(b.offset, b.dim);
        seg = seg.cwiseMax(-b.l1_bound).cwiseMin(b.l1_bound);
      }
      break;
    case Penalty::MaxOfBlockNorms: {
      Eigen::VectorXd norms(blocks.size());
      for (size_t i = 0; i < blocks.size(); ++i) {
        norms[static_cast<int>(i)] = p.segment(blocks[i].offset, blocks[i].dim).norm();
      }
      if (norms.sum() <= radius) break;
      const Eigen::VectorXd shrunk = project_l1_ball(norms, radius);
      for (size_t i = 0; i < blocks.size(); ++i) {
        const int j = static_cast<int>(i);
        auto seg = p.segment(blocks[i].offset, blocks[i].dim);
        seg *= norms[j] > 0.0 ? shrunk[j] / norms[j] : 0.0;
      }
      break;
    }
    case Penalty::StackedL2: {
      const double norm = p.norm();
      if (norm > radius) p *= radius / norm;
      break;
    }
    case Penalty::Affine:
      break;
  }
}

TrackingMap build_tracking_map(const ObjectiveSpec& spec, int state_dim) {
  TrackingMap map;
  const int steps = spec.grid.steps;
  const double dt = spec.grid.dt();
  const double sw = spec.state_norm_weight;
  if (!(sw > 0.0)) throw std::invalid_argument("ObjectiveSpec: state_norm_weight must be positive");

  int offset = 0;
  const auto push = [&](int node, double scale, const std::vector<int>& coords,
                        const Eigen::VectorXd& target, double l1_bound) {
    TrackingMap::Block b;
    b.node = node;
    b.scale = scale;
    b.coords = coords;
    b.target = target;
    b.l1_bound = l1_bound;
    b.dim = selected_dim(coords, state_dim);
    if (target.size() != b.dim) {
      throw std::invalid_argument("ObjectiveSpec: tracking target has wrong dimension");
    }
    b.offset = offset;
    offset += b.dim;
    map.blocks.push_back(std::move(b));
  };

  std::visit(
      [&](const auto& tr) {
        using T = std::decay_t<decltype(tr)>;
        if (tr.gamma < 0.0 || !std::isfinite(tr.gamma)) {
          throw std::invalid_argument("ObjectiveSpec: tracking gamma must be finite and >= 0");
        }
        if constexpr (std::is_same_v<T, PointwiseL1Tracking>) {
          map.penalty = TrackingMap::Penalty::WeightedL1;
          if (tr.node_weights.size() != steps + 1) {
            throw std::invalid_argument("PointwiseL1Tracking: need one weight per node");
          }
          check_coords(tr.coords, state_dim, "PointwiseL1Tracking");
          for (int k = 0; k <= steps; ++k) {
            const double w = tr.node_weights[k];
            if (!(w >= 0.0) || !std::isfinite(w)) {
              throw std::invalid_argument("PointwiseL1Tracking: weights must be finite and >= 0");
            }
            const double bound = tr.gamma * w * dt * sw;
            if (bound > 0.0) push(k, 1.0, tr.coords, tr.target, bound);
          }
        } else if constexpr (std::is_same_v<T, MaxNormWindowTracking>) {
          map.penalty = TrackingMap::Penalty::MaxOfBlockNorms;
          if (tr.window_begin < 0 || tr.window_end > steps || tr.window_begin > tr.window_end) {
            throw std::invalid_argument("MaxNormWindowTracking: bad window");
          }
          check_coords(tr.coords, state_dim, "MaxNormWindowTracking");
          map.radius = tr.gamma * std::sqrt(sw);
          for (int k = tr.window_begin; k <= tr.window_end; ++k) {
            push(k, 1.0, tr.coords, tr.target, 0.0);
          }
        } else if constexpr (std::is_same_v<T, GroupL2WindowTracking>) {
          map.penalty = TrackingMap::Penalty::StackedL2;
          const TraceOperator& trace = tr.trace;
          if (trace.window_begin < 0 || trace.window_end > steps ||
              trace.window_begin > trace.window_end || trace.coords.empty()) {
            throw std::invalid_argument("GroupL2WindowTracking: bad trace window");
          }
          check_coords(trace.coords, state_dim, "GroupL2WindowTracking");
          map.radius = tr.gamma;
          for (int k = trace.window_begin; k <= trace.window_end; ++k) {
            push(k, std::sqrt(dt), trace.coords, tr.target, 0.0);
          }
        } else {
          map.penalty = TrackingMap::Penalty::StackedL2;
          if (tr.node < 0 || tr.node > steps) {
            throw std::invalid_argument("PointPenaltyTracking: node out of range");
          }
          check_coords(tr.coords, state_dim, "PointPenaltyTracking");
          map.radius = tr.gamma * std::sqrt(sw);
          push(tr.node, 1.0, tr.coords, tr.target, 0.0);
        }
      },
      spec.tracking);
  map.total_dim = offset;
  return map;
}

double tracking_value(const ObjectiveSpec& spec, const Eigen::MatrixXd& x) {
  const TrackingMap map = build_tracking_map(spec, static_cast<int>(x.rows()));
  return map.value(map.extract(x));
}

ObjectiveParts evaluate_parts(const ObjectiveSpec& spec, const Eigen::MatrixXd& u,
                              const Eigen::MatrixXd& x) {
  check_control_dims(spec, u);
  if (x.cols() != spec.grid.steps + 1) {
    throw std::invalid_argument("objective: trajectory must have one column per node");
  }
  const double dt = spec.grid.dt();
  ObjectiveParts parts;
  for (int k = 0; k < spec.grid.steps; ++k) {
    parts.control_quadratic += 0.5 * dt * (u.col(k) - spec.u_ref_col(k)).squaredNorm();
    parts.control_l1 += dt * spec.control_l1_weight * u.col(k).lpNorm<1>();
  }
  parts.tracking = tracking_value(spec, x);
  return parts;
}

double evaluate(const ObjectiveSpec& spec, const Eigen::MatrixXd& u, const Eigen::MatrixXd& x) {
  return evaluate_parts(spec, u, x).total();
}

Eigen::VectorXd singular_weights(const TimeGrid& grid, int k0) {
  if (k0 < 0 || k0 >= grid.steps) {
    throw std::invalid_argument("singular_weights: need 0 <= k0 < N");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid.steps + 1);
  const double dt = grid.dt();
  for (int k = k0 + 1; k <= grid.steps; ++k) w[k] = 1.0 / ((k - k0) * dt);
  return w;
}

Eigen::MatrixXd smooth_gradient(const ObjectiveSpec& spec, const Eigen::MatrixXd& u) {
  check_control_dims(spec, u);
  const double dt = spec.grid.dt();
  Eigen::MatrixXd g(u.rows(), u.cols());
  for (int k = 0; k < u.cols(); ++k) g.col(k) = dt * (u.col(k) - spec.u_ref_col(k));
  return g;
}

Eigen::MatrixXd adjoint_apply(const DiscreteLinearSystem& sys, const TrackingMap& map,
                              const Eigen::VectorXd& p) {
  const int n = sys.state_dim();
  const int m = sys.control_dim();
  const int steps = sys.grid().steps;
  Eigen::MatrixXd grad(m, steps);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(n);
  // Blocks are ordered by node, so a reverse cursor injects each one as the
  // costate sweeps backwards.
  int cursor = static_cast<int>(map.blocks.size()) - 1;
  const auto inject = [&](int node) {
    while (cursor >= 0 && map.blocks[static_cast<size_t>(cursor)].node == node) {
      const TrackingMap::Block& b = map.blocks[static_cast<size_t>(cursor)];
      const auto seg = p.segment(b.offset, b.dim);
      if (b.coords.empty()) {
        lam += b.scale * seg;
      } else {
        for (int i = 0; i < b.dim; ++i) lam[b.coords[static_cast<size_t>(i)]] += b.scale * seg[i];
      }
      --cursor;
    }
  };
  inject(steps);
  for (int k = steps - 1; k >= 0; --k) {
    grad.col(k).noalias() = sys.B(k).transpose() * lam;
    lam = sys.A(k).transpose() * lam;
    inject(k);
  }
  return grad;
}

Eigen::MatrixXd squared_tracking_gradient(const ObjectiveSpec& spec,
                                          const DiscreteLinearSystem& sys,
                                          const Eigen::MatrixXd& u) {
  const TrackingMap map = build_tracking_map(spec, sys.state_dim());
  const Eigen::VectorXd z = map.extract(simulate(sys, u));
  return adjoint_apply(sys, map, z);
}

ProxResult prox_control_term(const Eigen::MatrixXd& v, double tau, const ObjectiveSpec& spec) {
  if (!(tau > 0.0)) throw std::invalid_argument("prox_control_term: tau must be positive");
  const double dt = spec.grid.dt();
  const double step = tau * dt;
  ProxResult out;
  out.point.resize(v.rows(), v.cols());
  for (int k = 0; k < v.cols(); ++k) {
    const Eigen::VectorXd ur = spec.u_ref_col(k);
    for (int i = 0; i < v.rows(); ++i) {
      const double shifted = v(i, k) + step * ur[i];
      const double p = soft_threshold(shifted, step * spec.control_l1_weight) / (1.0 + step);
      out.point(i, k) = p;
      out.objective_contribution +=
          dt * (0.5 * (p - ur[i]) * (p - ur[i]) + spec.control_l1_weight * std::abs(p));
    }
  }
  return out;
}

Eigen::VectorXd project_dual_tracking(const Eigen::VectorXd& p, const ObjectiveSpec& spec,
                                      int state_dim) {
  const TrackingMap map = build_tracking_map(spec, state_dim);
  if (p.size() != map.total_dim) {
    throw std::invalid_argument("project_dual_tracking: dual has wrong dimension");
  }
  Eigen::VectorXd out = p;
  map.project_dual(out);
  return out;
}

}  // namespace turnpike
