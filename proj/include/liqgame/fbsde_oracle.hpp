#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liqgame/market_model.hpp"
#include "liqgame/numerics/rk4.hpp"
#include "liqgame/unconstrained_nash.hpp"

namespace liqgame {

struct PicardConfig {
  std::size_t max_iterations = 500;
  double damping = 0.5;
  double tolerance = 1e-10;
  std::optional<std::size_t> grid_steps;  ///< overrides the spec's grid when set
};

struct PicardResult {
  EquilibriumTrajectory trajectory;
  std::vector<double> distances;  ///< sup distance between successive iterates
  bool converged = false;
  std::size_t iterations = 0;

  double final_distance() const { return distances.empty() ? 0.0 : distances.back(); }
};

enum class TerminalMode { kPenalty, kFuelConstraint };

namespace detail {

/// Node values of a forcing term plus cubic interpolants at interval midpoints,
/// which is what RK4 needs on a fixed grid.
class GridForcing {
 public:
  GridForcing(Vector nodes, const TimeGrid& grid) : nodes_(std::move(nodes)), h_(grid.h()) {
    const std::size_t m = grid.steps();
    mid_.resize(m);
    const Vector& f = nodes_;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == 0) {
        mid_[k] = (5.0 * f[0] + 15.0 * f[1] - 5.0 * f[2] + f[3]) / 16.0;
      } else if (k + 1 == m) {
        mid_[k] = (f[m - 3] - 5.0 * f[m - 2] + 15.0 * f[m - 1] + 5.0 * f[m]) / 16.0;
      } else {
        mid_[k] = (-f[k - 1] + 9.0 * f[k] + 9.0 * f[k + 1] - f[k + 2]) / 16.0;
      }
    }
  }

  double operator()(double t) const {
    const auto half_steps = static_cast<std::size_t>(std::llround(2.0 * t / h_));
    return half_steps % 2 == 0 ? nodes_[half_steps / 2] : mid_[half_steps / 2];
  }

 private:
  Vector nodes_;
  Vector mid_;
  double h_;
};

/// One player's linear problem q' = x / k, x' = sigma q - f(t), q(0) = q0,
/// closed by x(T) + d q(T) = 0 or by q(T) = 0, solved by superposing a
/// particular and a homogeneous forward RK4 shot.
inline std::pair<Vector, Vector> best_response(double k, double sigma, double d, double q0,
                                               const GridForcing& f, const TimeGrid& grid,
                                               TerminalMode mode) {
  auto particular = [&](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1] / k;
    dy[1] = sigma * y[0] - f(t);
  };
  auto homogeneous = [&](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1] / k;
    dy[1] = sigma * y[0];
  };
  const auto a = rk4_integrate(particular, Vector{q0, 0.0}, grid);
  const auto b = rk4_integrate(homogeneous, Vector{0.0, 1.0}, grid);
  const Vector& ya = a.back();
  const Vector& yb = b.back();
  double num = 0.0;
  double den = 0.0;
  if (mode == TerminalMode::kPenalty) {
    num = ya[1] + d * ya[0];
    den = yb[1] + d * yb[0];
  } else {
    num = ya[0];
    den = yb[0];
  }
  if (den == 0.0 || !std::isfinite(den)) {
    throw Error(ErrorCategory::kSingularMatrix, "shooting sensitivity is singular");
  }
  const double s = -num / den;
  Vector q(grid.nodes());
  Vector x(grid.nodes());
  for (std::size_t j = 0; j < q.size(); ++j) {
    q[j] = a[j][0] + s * b[j][0];
    x[j] = a[j][1] + s * b[j][1];
  }
  return {std::move(q), std::move(x)};
}

inline PicardResult picard_solve(const GameSpec& spec, const PicardConfig& cfg, TerminalMode mode) {
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "damping must lie in (0, 1]");
  }
  if (!(cfg.tolerance > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "tolerance must be positive");
  }
  GameSpec checked = validate_game(spec);
  if (cfg.grid_steps) checked.grid_steps = *cfg.grid_steps;
  if (checked.grid_steps < 3) {
    throw Error(ErrorCategory::kInvalidArgument, "Picard oracle needs at least 3 grid steps");
  }
  const ImpactMatrices im = build_impact_matrices(checked);
  const TimeGrid grid = checked.grid();
  const std::size_t n = im.players();
  const std::size_t nodes = grid.nodes();

  std::vector<Vector> q(nodes, initial_inventories(checked));
  std::vector<Vector> x(nodes, Vector(n, 0.0));

  std::vector<double> distances;
  bool converged = false;
  std::size_t iterations = 0;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    std::vector<Vector> q_new(nodes, Vector(n));
    std::vector<Vector> x_new(nodes, Vector(n));
    for (std::size_t i = 0; i < n; ++i) {
      Vector f(nodes);
      for (std::size_t k = 0; k < nodes; ++k) {
        double s = im.mu[i];
        for (std::size_t j = 0; j < n; ++j) s += im.C(i, j) * x[k][j];
        f[k] = s;
      }
      const auto [qi, xi] = best_response(im.K(i, i), im.Sigma(i, i), im.D(i, i),
                                          checked.players[i].q0, GridForcing(std::move(f), grid),
                                          grid, mode);
      for (std::size_t k = 0; k < nodes; ++k) {
        q_new[k][i] = qi[k];
        x_new[k][i] = xi[k];
      }
    }
    double dist = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        const double dq = q_new[k][i] - q[k][i];
        const double dx = x_new[k][i] - x[k][i];
        dist = std::max({dist, std::abs(dq), std::abs(dx / im.K(i, i))});
        q[k][i] += cfg.damping * dq;
        x[k][i] += cfg.damping * dx;
      }
    }
    distances.push_back(dist);
    iterations = it;
    if (!std::isfinite(dist) || dist > 1e100) break;
    if (dist < cfg.tolerance) {
      converged = true;
      break;
    }
  }
  return {make_trajectory(im, grid, std::move(q), std::move(x)), std::move(distances), converged,
          iterations};
}

}  // namespace detail

/// Damped Picard iteration on the forward-backward system with the penalty
/// terminal condition -x(T) = D q(T).  Each sweep freezes the cross-player
/// coupling C x at the previous iterate and solves every player's own linear
/// two-point problem exactly on the grid.
inline PicardResult picard_solve_unconstrained(const GameSpec& spec, const PicardConfig& cfg = {}) {
  return detail::picard_solve(spec, cfg, TerminalMode::kPenalty);
}

/// As picard_solve_unconstrained with the terminal condition q(T) = 0; the
/// free initial co-state is fixed by one exact Newton (shooting) step per
/// player and sweep.
inline PicardResult picard_solve_constrained(const GameSpec& spec, const PicardConfig& cfg = {}) {
  return detail::picard_solve(spec, cfg, TerminalMode::kFuelConstraint);
}

}  // namespace liqgame
