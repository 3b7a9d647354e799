#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liqgame/market_model.hpp"
#include "liqgame/numerics/quadrature.hpp"
#include "liqgame/unconstrained_nash.hpp"

namespace liqgame {

struct ConstrainedSolution {
  EquilibriumTrajectory trajectory;
  Vector x0;                        ///< initial co-state solved from q(T) = 0
  bool terminal_constraint = true;  ///< q(T) = 0 replaces the terminal penalty
};

namespace detail {

/// Generator of the affine system z' = B z + (0, -mu) lifted to one extra
/// constant coordinate, so that exp(t M) carries the particular response.
inline DenseMatrix augmented_generator(const ImpactMatrices& im) {
  const std::size_t n = im.players();
  DenseMatrix m(2 * n + 1, 2 * n + 1);
  m.set_block(0, 0, im.B);
  for (std::size_t i = 0; i < n; ++i) m(n + i, 2 * n) = -im.mu[i];
  return m;
}

}  // namespace detail

/// Fuel-constrained equilibrium as the linear two-point problem
///   z' = B z + (0, -mu),  q(0) = q0,  q(T) = 0.
/// x(0) is solved from the transition matrix over [0, T]; the trajectory is
/// then propagated with the exact one-step transition exp(h M).
inline ConstrainedSolution solve_constrained(const GameSpec& spec) {
  const GameSpec checked = validate_game(spec);
  const ImpactMatrices im = build_impact_matrices(checked);
  const TimeGrid grid = checked.grid();
  const std::size_t n = im.players();
  const DenseMatrix gen = detail::augmented_generator(im);
  const DenseMatrix phi = mat_exp(gen * grid.t_end());
  const Vector q0 = initial_inventories(checked);

  Vector rhs = multiply(phi.block(0, 0, n, n), q0);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = -(rhs[i] + phi(i, 2 * n));
  Vector x0;
  try {
    x0 = solve_dense(phi.block(0, n, n, n), rhs);
  } catch (const SingularMatrixError&) {
    throw Error(ErrorCategory::kSingularMatrix,
                "constrained representation fails: transition block Phi_qx is singular");
  }

  const DenseMatrix step = mat_exp(gen * grid.h());
  std::vector<Vector> q(grid.nodes());
  std::vector<Vector> x(grid.nodes());
  Vector z(2 * n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = q0[i];
    z[n + i] = x0[i];
  }
  z[2 * n] = 1.0;
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    if (k > 0) z = multiply(step, z);
    q[k].assign(z.begin(), z.begin() + static_cast<long>(n));
    x[k].assign(z.begin() + static_cast<long>(n), z.begin() + static_cast<long>(2 * n));
  }
  q[0] = q0;
  return {make_trajectory(im, grid, std::move(q), std::move(x)), std::move(x0), true};
}

/// Closed forms for N identical players under the fuel constraint, obtained
/// as A -> infinity in the penalised profile:
///   z(s) = e^{-m s} s sinhc(theta s),  E(t) = E0 z(T - t) / z(T).
namespace detail {

inline double constrained_profile(const CharacteristicRoots& r, double s) {
  return std::exp(-r.m * s) * s * sinhc(r.theta * s);
}

inline double constrained_profile_slope(const CharacteristicRoots& r, double s) {
  return std::exp(-r.m * s) * (std::cosh(r.theta * s) - r.m * s * sinhc(r.theta * s));
}

inline Vector constrained_average(const CharacteristicRoots& r, double e0, const TimeGrid& grid,
                                  bool rate) {
  const double T = grid.t_end();
  const double zT = constrained_profile(r, T);
  if (zT == 0.0 || !std::isfinite(zT)) {
    throw Error(ErrorCategory::kDegenerate, "degenerate constrained profile");
  }
  Vector e(grid.nodes());
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double s = T - grid.t(k);
    e[k] = rate ? -e0 * constrained_profile_slope(r, s) / zT
                : e0 * constrained_profile(r, s) / zT;
  }
  return e;
}

}  // namespace detail

inline Vector constrained_homogeneous_average(const PlayerParams& params, std::size_t n,
                                              double e0, const TimeGrid& grid) {
  detail::require_driftless(params);
  return detail::constrained_average(homogeneous_roots(params, n), e0, grid, false);
}

inline Vector constrained_mfg_average(const PlayerParams& params, double e0,
                                      const TimeGrid& grid) {
  detail::require_driftless(params);
  return detail::constrained_average(mfg_roots(params), e0, grid, false);
}

/// Mean-field trading rate under the fuel constraint, the time derivative of
/// constrained_mfg_average.
inline Vector constrained_mfg_rate(const PlayerParams& params, double e0, const TimeGrid& grid) {
  detail::require_driftless(params);
  return detail::constrained_average(mfg_roots(params), e0, grid, true);
}

struct SweepResult {
  std::string parameter;  ///< "A_multiplier" or "N"
  std::vector<double> values;
  std::vector<double> distances;  ///< NaN where the point failed
  std::vector<std::string> failures;  ///< empty string where the point succeeded
  std::optional<double> slope;        ///< least-squares log-log slope
  bool monotone_non_increasing = false;
  bool strictly_decreasing = false;

  bool any_failed() const {
    for (const std::string& f : failures)
      if (!f.empty()) return true;
    return false;
  }
};

namespace detail {

inline void finish_sweep(SweepResult& r) {
  r.monotone_non_increasing = !r.any_failed();
  r.strictly_decreasing = !r.any_failed();
  for (std::size_t i = 1; i < r.distances.size(); ++i) {
    if (!(r.distances[i] <= r.distances[i - 1])) r.monotone_non_increasing = false;
    if (!(r.distances[i] < r.distances[i - 1])) r.strictly_decreasing = false;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (r.failures[i].empty()) {
      xs.push_back(r.values[i]);
      ys.push_back(r.distances[i]);
    }
  }
  r.slope = log_log_slope(xs, ys);
}

inline double rate_distance(const EquilibriumTrajectory& a, const EquilibriumTrajectory& b) {
  std::vector<Vector> diff(a.nu.size());
  for (std::size_t k = 0; k < diff.size(); ++k) {
    diff[k].resize(a.nu[k].size());
    for (std::size_t i = 0; i < diff[k].size(); ++i) diff[k][i] = a.nu[k][i] - b.nu[k][i];
  }
  return discrete_l2_norm(diff, a.grid.h());
}

}  // namespace detail

/// Discrete L2 distance between penalised and constrained equilibrium rates
/// as every A_i is multiplied by each entry of `multipliers`.
inline SweepResult penalty_limit_sweep(const GameSpec& spec, const std::vector<double>& multipliers) {
  if (multipliers.empty()) {
    throw Error(ErrorCategory::kInvalidArgument, "penalty sweep needs at least one multiplier");
  }
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    if (!(multipliers[i] > 0.0) || (i > 0 && !(multipliers[i] > multipliers[i - 1]))) {
      throw Error(ErrorCategory::kInvalidArgument, "multipliers must be positive and increasing");
    }
  }
  const ConstrainedSolution limit = solve_constrained(spec);
  SweepResult r;
  r.parameter = "A_multiplier";
  for (double m : multipliers) {
    GameSpec scaled = spec;
    for (PlayerParams& p : scaled.players) p.terminal_penalty_A *= m;
    r.values.push_back(m);
    try {
      const EquilibriumTrajectory tr = solve_unconstrained(scaled);
      r.distances.push_back(detail::rate_distance(tr, limit.trajectory));
      r.failures.emplace_back();
    } catch (const Error& e) {
      r.distances.push_back(std::numeric_limits<double>::quiet_NaN());
      r.failures.emplace_back(e.what());
    }
  }
  detail::finish_sweep(r);
  return r;
}

/// Sup distance between the penalised average inventory E_N of N identical
/// players and the penalised mean-field inventory E, both from closed forms.
inline SweepResult mfg_gap_sweep(const PlayerParams& params, double e0,
                                 const std::vector<std::size_t>& n_values, double horizon_T,
                                 std::size_t grid_steps = 1000) {
  detail::require_driftless(params);
  if (n_values.empty()) {
    throw Error(ErrorCategory::kInvalidArgument, "population sweep needs at least one N");
  }
  const TimeGrid grid(horizon_T, grid_steps);
  const Vector mfg = mfg_benchmark(params, e0, grid);
  SweepResult r;
  r.parameter = "N";
  for (std::size_t n : n_values) {
    r.values.push_back(static_cast<double>(n));
    try {
      const Vector e = homogeneous_average(params, n, e0, grid);
      double gap = 0.0;
      for (std::size_t k = 0; k < e.size(); ++k) gap = std::max(gap, std::abs(e[k] - mfg[k]));
      r.distances.push_back(gap);
      r.failures.emplace_back();
    } catch (const Error& e) {
      r.distances.push_back(std::numeric_limits<double>::quiet_NaN());
      r.failures.emplace_back(e.what());
    }
  }
  detail::finish_sweep(r);
  return r;
}

/// Discrete L2 distance between the constrained average rate of N identical
/// players (all starting at E0) and the constrained mean-field rate.
inline SweepResult mfg_convergence_sweep(const PlayerParams& params, double e0,
                                         const std::vector<std::size_t>& n_values,
                                         double horizon_T, std::size_t grid_steps = 1000) {
  detail::require_driftless(params);
  if (n_values.empty()) {
    throw Error(ErrorCategory::kInvalidArgument, "population sweep needs at least one N");
  }
  PlayerParams p = params;
  p.q0 = e0;
  const TimeGrid grid(horizon_T, grid_steps);
  const Vector mfg_rate = constrained_mfg_rate(p, e0, grid);
  SweepResult r;
  r.parameter = "N";
  for (std::size_t n : n_values) {
    r.values.push_back(static_cast<double>(n));
    try {
      const ConstrainedSolution sol = solve_constrained(homogeneous_game(p, n, horizon_T, grid_steps));
      Vector diff(grid.nodes());
      for (std::size_t k = 0; k < diff.size(); ++k) {
        diff[k] = sol.trajectory.avg_nu[k] - mfg_rate[k];
      }
      r.distances.push_back(discrete_l2_norm(diff, grid.h()));
      r.failures.emplace_back();
    } catch (const Error& e) {
      r.distances.push_back(std::numeric_limits<double>::quiet_NaN());
      r.failures.emplace_back(e.what());
    }
  }
  detail::finish_sweep(r);
  return r;
}

}  // namespace liqgame
