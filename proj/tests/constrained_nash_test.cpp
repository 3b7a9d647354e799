#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "liqgame/constrained_nash.hpp"
#include "support/oracles.hpp"
#include "support/tables.hpp"

namespace liqgame {
namespace {

using testing::backward_residual;
using testing::sup_distance;

void expect_terminal_constraint(const GameSpec& s, const ConstrainedSolution& sol) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double scale = std::max(1.0, std::abs(s.players[i].q0));
    EXPECT_LE(std::abs(sol.trajectory.q.back()[i]), 1e-10 * scale) << "player " << i + 1;
    EXPECT_EQ(sol.trajectory.q.front()[i], s.players[i].q0);
  }
}

TEST(Constrained, ZeroDataGivesZero) {
  GameSpec s = testing::table2();
  for (PlayerParams& p : s.players) p.q0 = 0.0;
  const ConstrainedSolution sol = solve_constrained(s);
  EXPECT_EQ(norm_inf(sol.x0), 0.0);
  for (std::size_t k = 0; k < sol.trajectory.q.size(); ++k) {
    EXPECT_EQ(norm_inf(sol.trajectory.q[k]), 0.0);
    EXPECT_EQ(norm_inf(sol.trajectory.nu[k]), 0.0);
  }
  EXPECT_TRUE(sol.terminal_constraint);
}

TEST(Constrained, TerminalConstraintOnTables) {
  for (const GameSpec& s : {testing::table1(), testing::table2(), testing::table3(5)}) {
    expect_terminal_constraint(s, solve_constrained(s));
  }
}

TEST(Constrained, TerminalConstraintWithDrift) {
  GameSpec s = testing::table2();
  s.players[0].mu = 2e-6;
  s.players[3].mu = -1e-6;
  expect_terminal_constraint(s, solve_constrained(s));
}

TEST(Constrained, HomogeneousMatchesLimitClosedForm) {
  const GameSpec s = testing::table3(3);
  const ConstrainedSolution sol = solve_constrained(s);
  const CharacteristicRoots r = homogeneous_roots(testing::table3_player(), 3);
  const double T = s.horizon_T;
  std::vector<double> e(s.grid().nodes());
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double u = T - s.grid().t(k);
    e[k] = (std::exp(-r.r_minus() * u) - std::exp(-r.r_plus() * u)) /
           (std::exp(-r.r_minus() * T) - std::exp(-r.r_plus() * T));
  }
  EXPECT_LE(sup_distance(sol.trajectory.avg_q, e), 1e-7);
  EXPECT_LE(sup_distance(constrained_homogeneous_average(testing::table3_player(), 3, 1.0,
                                                         s.grid()),
                         e),
            1e-12);
}

TEST(Constrained, HugePenaltyApproachesConstraint) {
  GameSpec s = testing::table3(3);
  const ConstrainedSolution sol = solve_constrained(s);
  for (PlayerParams& p : s.players) p.terminal_penalty_A = 1e8;
  const EquilibriumTrajectory tr = solve_unconstrained(s);
  EXPECT_LE(sup_distance(tr.avg_q, sol.trajectory.avg_q), 1e-7);
}

TEST(Constrained, InteriorResidualIsSecondOrder) {
  for (GameSpec s : {testing::table1(), testing::table2(), testing::table3(5)}) {
    s.players[0].mu = 1e-6;
    s.grid_steps = 500;
    const double coarse = backward_residual(build_impact_matrices(s), solve_constrained(s).trajectory);
    s.grid_steps = 1000;
    const double fine = backward_residual(build_impact_matrices(s), solve_constrained(s).trajectory);
    EXPECT_GE(coarse / fine, 3.2);
    EXPECT_LE(coarse / fine, 4.8);
  }
}

TEST(Constrained, ResolveIsBitwiseIdentical) {
  const GameSpec s = testing::table2();
  const ConstrainedSolution a = solve_constrained(s);
  const ConstrainedSolution b = solve_constrained(s);
  EXPECT_EQ(a.x0, b.x0);
  EXPECT_EQ(a.trajectory.q, b.trajectory.q);
  EXPECT_EQ(a.trajectory.nu, b.trajectory.nu);
}

TEST(Constrained, RateIsDerivativeOfInventory) {
  const GameSpec s = testing::table1();
  const EquilibriumTrajectory& tr = solve_constrained(s).trajectory;
  const double h = tr.grid.h();
  for (std::size_t k = 1; k + 1 < tr.q.size(); k += 37) {
    for (std::size_t i = 0; i < 2; ++i) {
      const double d = (tr.q[k + 1][i] - tr.q[k - 1][i]) / (2.0 * h);
      EXPECT_NEAR(d, tr.nu[k][i], 1e-4 * std::max(1e-2, std::abs(tr.nu[k][i])));
    }
  }
}

TEST(ConstrainedClosedForm, MfgRateIsSlopeOfAverage) {
  const PlayerParams p = testing::table3_player();
  const TimeGrid grid(10.0, 2000);
  const Vector e = constrained_mfg_average(p, 1.0, grid);
  const Vector rate = constrained_mfg_rate(p, 1.0, grid);
  EXPECT_DOUBLE_EQ(e.front(), 1.0);
  EXPECT_EQ(e.back(), 0.0);
  const Vector d = differentiate(e, grid.h());
  EXPECT_LE(sup_distance(d, rate), 1e-5 * norm_inf(rate));
}

TEST(PenaltySweep, TableThreeStrictlyDecreasing) {
  const SweepResult r = penalty_limit_sweep(testing::table3(2), {1, 10, 100, 1e4, 1e6});
  EXPECT_FALSE(r.any_failed());
  EXPECT_TRUE(r.strictly_decreasing);
  EXPECT_TRUE(r.monotone_non_increasing);
  EXPECT_LE(r.distances.back(), 1e-4 * r.distances.front());
  EXPECT_EQ(r.parameter, "A_multiplier");
  ASSERT_TRUE(r.slope.has_value());
  EXPECT_LT(*r.slope, 0.0);
}

TEST(PenaltySweep, SingleMultiplierHasNoSlope) {
  const SweepResult r = penalty_limit_sweep(testing::table3(2), {1.0});
  EXPECT_EQ(r.distances.size(), 1u);
  EXPECT_GE(r.distances[0], 0.0);
  EXPECT_FALSE(r.slope.has_value());
}

TEST(PenaltySweep, ZeroDataGivesZeroDistances) {
  GameSpec s = testing::table3(2);
  for (PlayerParams& p : s.players) p.q0 = 0.0;
  const SweepResult r = penalty_limit_sweep(s, {1, 10, 100});
  for (double d : r.distances) EXPECT_EQ(d, 0.0);
  EXPECT_FALSE(r.slope.has_value());
}

TEST(PenaltySweep, RejectsBadMultipliers) {
  EXPECT_THROW(penalty_limit_sweep(testing::table3(2), {}), Error);
  EXPECT_THROW(penalty_limit_sweep(testing::table3(2), {1, 1}), Error);
  EXPECT_THROW(penalty_limit_sweep(testing::table3(2), {-1, 1}), Error);
}

TEST(MfgSweep, SmallPopulationsDecrease) {
  const SweepResult r = mfg_convergence_sweep(testing::table3_player(), 1.0, {1, 2, 3, 4, 5}, 10.0);
  EXPECT_FALSE(r.any_failed());
  EXPECT_TRUE(r.strictly_decreasing);
  EXPECT_EQ(r.parameter, "N");
}

TEST(MfgSweep, DeterministicRateIsOneOverN) {
  const SweepResult r =
      mfg_convergence_sweep(testing::table3_player(), 1.0, {2, 4, 8, 16, 32, 64}, 10.0);
  ASSERT_TRUE(r.slope.has_value());
  EXPECT_GE(*r.slope, -1.3);
  EXPECT_LE(*r.slope, -0.7);
  for (std::size_t i = 2; i < r.distances.size(); ++i) {
    EXPECT_GE(r.distances[i - 1] / r.distances[i], 1.8) << r.values[i];
  }
}

TEST(MfgGapSweep, FigureFourOrdering) {
  const SweepResult r = mfg_gap_sweep(testing::table3_player(), 1.0, {1, 2, 3, 4, 5}, 10.0);
  EXPECT_FALSE(r.any_failed());
  EXPECT_TRUE(r.strictly_decreasing);
}

TEST(MfgGapSweep, DeterministicRateIsOneOverN) {
  const SweepResult r =
      mfg_gap_sweep(testing::table3_player(), 1.0, {2, 4, 8, 16, 32, 64}, 10.0);
  EXPECT_TRUE(r.strictly_decreasing);
  ASSERT_TRUE(r.slope.has_value());
  EXPECT_GE(*r.slope, -1.3);
  EXPECT_LE(*r.slope, -0.7);
}

TEST(MfgSweep, SinglePopulationHasNoSlope) {
  const SweepResult r = mfg_convergence_sweep(testing::table3_player(), 1.0, {1}, 10.0);
  EXPECT_EQ(r.distances.size(), 1u);
  EXPECT_FALSE(r.slope.has_value());
}

TEST(MfgSweep, RejectsDrift) {
  PlayerParams p = testing::table3_player();
  p.mu = 1e-3;
  EXPECT_THROW(mfg_convergence_sweep(p, 1.0, {1, 2}, 10.0), Error);
  EXPECT_THROW(mfg_convergence_sweep(testing::table3_player(), 1.0, {}, 10.0), Error);
}

}  // namespace
}  // namespace liqgame
