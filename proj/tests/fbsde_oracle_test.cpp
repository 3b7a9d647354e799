#include <cmath>

#include <gtest/gtest.h>

#include "liqgame/constrained_nash.hpp"
#include "liqgame/fbsde_oracle.hpp"
#include "support/oracles.hpp"
#include "support/tables.hpp"

namespace liqgame {
namespace {

using testing::sup_distance;

/// Table 3 with weak permanent impact and a heterogeneous start.
GameSpec weak_spec() {
  GameSpec s = testing::table3_weak(5);
  s.players[1].q0 = -0.3;
  s.players[4].q0 = 0.4;
  return s;
}

TEST(Picard, ZeroDataConvergesImmediately) {
  GameSpec s = testing::table2();
  for (PlayerParams& p : s.players) p.q0 = 0.0;
  for (const PicardResult& r : {picard_solve_unconstrained(s), picard_solve_constrained(s)}) {
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1u);
    EXPECT_EQ(r.final_distance(), 0.0);
  }
}

TEST(Picard, WeakInteractionMatchesUnconstrainedClosedForm) {
  const GameSpec s = weak_spec();
  ASSERT_TRUE(check_existence_conditions(s).thm35_ok);
  const PicardResult r = picard_solve_unconstrained(s);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 500u);
  const EquilibriumTrajectory exact = solve_unconstrained(s);
  EXPECT_LE(sup_distance(r.trajectory.q, exact.q), 1e-6);
  EXPECT_LE(sup_distance(r.trajectory.nu, exact.nu), 1e-6);
}

TEST(Picard, WeakInteractionMatchesConstrainedClosedForm) {
  const GameSpec s = weak_spec();
  const PicardResult r = picard_solve_constrained(s);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 500u);
  const ConstrainedSolution exact = solve_constrained(s);
  EXPECT_LE(sup_distance(r.trajectory.q, exact.trajectory.q), 1e-6);
  EXPECT_LE(sup_distance(r.trajectory.nu, exact.trajectory.nu), 1e-6);
}

TEST(Picard, TerminalConditionMatchesMode) {
  const GameSpec s = weak_spec();
  const PicardResult u = picard_solve_unconstrained(s);
  const PicardResult c = picard_solve_constrained(s);
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PlayerParams& p = s.players[i];
    const double penalty = 2.0 * p.kappa * u.trajectory.nu.back()[i] +
                           (2.0 * p.terminal_penalty_A - p.alpha / n) * u.trajectory.q.back()[i];
    EXPECT_LE(std::abs(penalty), 1e-8);
    EXPECT_LE(std::abs(c.trajectory.q.back()[i]), 1e-8);
  }
}

TEST(Picard, DampingDoesNotMoveFixedPoint) {
  const GameSpec s = weak_spec();
  PicardConfig full;
  full.damping = 1.0;
  const PicardResult a = picard_solve_unconstrained(s, full);
  const PicardResult b = picard_solve_unconstrained(s);
  ASSERT_TRUE(a.converged);
  ASSERT_TRUE(b.converged);
  EXPECT_LT(a.iterations, b.iterations);
  EXPECT_LE(sup_distance(a.trajectory.q, b.trajectory.q), 1e-9);
}

TEST(Picard, DistancesEventuallyDecrease) {
  const PicardResult r = picard_solve_unconstrained(weak_spec());
  ASSERT_GE(r.distances.size(), 11u);
  for (std::size_t i = r.distances.size() - 10; i < r.distances.size(); ++i) {
    EXPECT_LT(r.distances[i], r.distances[i - 1]);
  }
}

TEST(Picard, TableTwoConditionalCrossCheck) {
  const GameSpec s = testing::table2();
  const PicardResult u = picard_solve_unconstrained(s);
  if (u.converged) {
    EXPECT_LE(sup_distance(u.trajectory.q, solve_unconstrained(s).q), 1e-6);
  }
  const PicardResult c = picard_solve_constrained(s);
  if (c.converged) {
    EXPECT_LE(sup_distance(c.trajectory.q, solve_constrained(s).trajectory.q), 1e-6);
  }
}

TEST(Picard, NonConvergenceReportsFinalDistance) {
  PicardConfig cfg;
  cfg.max_iterations = 3;
  const PicardResult r = picard_solve_unconstrained(weak_spec(), cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_EQ(r.distances.size(), 3u);
  EXPECT_GT(r.final_distance(), cfg.tolerance);
}

TEST(Picard, RejectsBadConfig) {
  PicardConfig cfg;
  cfg.damping = 0.0;
  EXPECT_THROW(picard_solve_unconstrained(weak_spec(), cfg), Error);
  cfg.damping = 1.5;
  EXPECT_THROW(picard_solve_unconstrained(weak_spec(), cfg), Error);
  cfg = {};
  cfg.tolerance = 0.0;
  EXPECT_THROW(picard_solve_constrained(weak_spec(), cfg), Error);
}

TEST(Picard, GridOverride) {
  PicardConfig cfg;
  cfg.grid_steps = 200;
  const PicardResult r = picard_solve_unconstrained(weak_spec(), cfg);
  EXPECT_EQ(r.trajectory.grid.steps(), 200u);
}

TEST(GridForcing, ExactForCubics) {
  const TimeGrid grid(2.0, 10);
  auto f = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t - 0.25 * t * t * t; };
  Vector nodes(grid.nodes());
  for (std::size_t k = 0; k < nodes.size(); ++k) nodes[k] = f(grid.t(k));
  const detail::GridForcing g(nodes, grid);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double mid = grid.t(k) + 0.5 * grid.h();
    EXPECT_NEAR(g(mid), f(mid), 1e-14);
    EXPECT_EQ(g(grid.t(k)), nodes[k]);
  }
}

}  // namespace
}  // namespace liqgame
