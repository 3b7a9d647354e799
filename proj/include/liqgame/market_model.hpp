#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "liqgame/error.hpp"
#include "liqgame/numerics/time_grid.hpp"

namespace liqgame {

/// Constant parameters of one trader.  beta is identically zero in this scope.
struct PlayerParams {
  double alpha = 0.0;               ///< permanent impact
  double kappa = 0.0;               ///< temporary impact
  double lambda = 0.0;              ///< running inventory penalty
  double terminal_penalty_A = 0.0;  ///< terminal inventory penalty
  double mu = 0.0;                  ///< price drift
  double q0 = 0.0;                  ///< initial inventory

  friend bool operator==(const PlayerParams&, const PlayerParams&) = default;
};

struct GameSpec {
  double horizon_T = 0.0;
  std::vector<PlayerParams> players;
  std::size_t grid_steps = 1000;

  std::size_t size() const noexcept { return players.size(); }
  TimeGrid grid() const { return TimeGrid(horizon_T, grid_steps); }

  friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

/// N identical players sharing `params`.
inline GameSpec homogeneous_game(const PlayerParams& params, std::size_t n, double horizon_T,
                                 std::size_t grid_steps = 1000) {
  return GameSpec{horizon_T, std::vector<PlayerParams>(n, params), grid_steps};
}

inline GameSpec validate_game(const GameSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorCategory::kValidation, what); };
  if (!(std::isfinite(spec.horizon_T) && spec.horizon_T > 0.0)) {
    fail("horizon_T must be positive");
  }
  if (spec.grid_steps < 2) fail("grid_steps must be at least 2");
  if (spec.players.empty()) fail("players must be non-empty");
  for (std::size_t i = 0; i < spec.players.size(); ++i) {
    const PlayerParams& p = spec.players[i];
    const std::string who = " (player " + std::to_string(i + 1) + ")";
    for (double v : {p.alpha, p.kappa, p.lambda, p.terminal_penalty_A, p.mu, p.q0}) {
      if (!std::isfinite(v)) fail("parameters must be finite" + who);
    }
    if (!(p.alpha > 0.0)) fail("alpha must be positive" + who);
    if (!(p.kappa > 0.0)) fail("kappa must be positive" + who);
    if (!(p.lambda >= 0.0)) fail("lambda must be non-negative" + who);
    if (!(p.terminal_penalty_A > 0.0)) fail("A must be positive" + who);
  }
  return spec;
}

/// Strict concavity of each player's payoff: lambda > beta/(2N) and
/// A > alpha/(2N), with beta = 0.
inline std::vector<bool> check_concavity(const GameSpec& spec) {
  const double n = static_cast<double>(spec.size());
  constexpr double beta = 0.0;
  std::vector<bool> ok;
  ok.reserve(spec.size());
  for (const PlayerParams& p : spec.players) {
    ok.push_back(p.lambda > beta / (2.0 * n) && p.terminal_penalty_A > p.alpha / (2.0 * n));
  }
  return ok;
}

struct ConditionReport {
  std::vector<bool> concavity_ok_per_player;
  double alpha_max = 0.0;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  double lambda_min = 0.0;
  double thm35_lhs = 0.0;  ///< max alpha squared
  double thm35_rhs = 0.0;  ///< 16 min kappa (min lambda - beta/2N)
  bool thm35_ok = false;
  double thm44_rhs = 0.0;  ///< 4 min lambda min kappa
  bool thm44_ok = false;
  double underline_D = 0.0;  ///< min over players of 2A - alpha/N
  bool split_interval_nonempty = false;
  std::optional<double> chosen_a;
  std::optional<double> c1_at_a;
  std::optional<double> c2_at_inv_a;
};

/// c1(u) = min_i (1/(2 kappa_i) - u^2 / (8 kappa_i^2)).
inline double key_constant_c1(const GameSpec& spec, double u) {
  double best = INFINITY;
  for (const PlayerParams& p : spec.players) {
    best = std::min(best, 1.0 / (2.0 * p.kappa) - u * u / (8.0 * p.kappa * p.kappa));
  }
  return best;
}

/// c2(u) = min_i (2 lambda_i - beta_i/N - alpha_i^2 u^2 / 2), beta = 0.
inline double key_constant_c2(const GameSpec& spec, double u) {
  double best = INFINITY;
  for (const PlayerParams& p : spec.players) {
    best = std::min(best, 2.0 * p.lambda - p.alpha * p.alpha * u * u / 2.0);
  }
  return best;
}

inline ConditionReport check_existence_conditions(const GameSpec& spec) {
  ConditionReport r;
  r.concavity_ok_per_player = check_concavity(spec);
  const double n = static_cast<double>(spec.size());
  constexpr double beta_max = 0.0;

  r.alpha_max = 0.0;
  r.kappa_min = INFINITY;
  r.kappa_max = 0.0;
  r.lambda_min = INFINITY;
  r.underline_D = INFINITY;
  for (const PlayerParams& p : spec.players) {
    r.alpha_max = std::max(r.alpha_max, p.alpha);
    r.kappa_min = std::min(r.kappa_min, p.kappa);
    r.kappa_max = std::max(r.kappa_max, p.kappa);
    r.lambda_min = std::min(r.lambda_min, p.lambda);
    r.underline_D = std::min(r.underline_D, 2.0 * p.terminal_penalty_A - p.alpha / n);
  }

  const double lambda_eff = r.lambda_min - beta_max / (2.0 * n);
  r.thm35_lhs = r.alpha_max * r.alpha_max;
  r.thm35_rhs = 16.0 * r.kappa_min * lambda_eff;
  r.thm35_ok = r.thm35_lhs < r.thm35_rhs && r.underline_D > 0.0;
  r.thm44_rhs = 4.0 * r.lambda_min * r.kappa_min;
  r.thm44_ok = r.thm35_lhs < r.thm44_rhs && r.underline_D > 0.0;

  // The split point a must satisfy alpha_max^2/(4 lambda_eff) < a^2 < 4 kappa_min;
  // the geometric mean of the end points balances the two constants.  When
  // the interval is empty the same point is still reported, flagged.
  const double denom = 4.0 * lambda_eff;
  if (denom > 0.0) {
    const double lo = r.thm35_lhs / denom;
    const double hi = 4.0 * r.kappa_min;
    r.split_interval_nonempty = lo < hi;
    const double a = std::sqrt(std::sqrt(lo * hi));
    r.chosen_a = a;
    r.c1_at_a = key_constant_c1(spec, a);
    r.c2_at_inv_a = key_constant_c2(spec, 1.0 / a);
  }
  return r;
}

}  // namespace liqgame
