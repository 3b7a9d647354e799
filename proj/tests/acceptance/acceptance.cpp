// Runs every acceptance criterion with pinned tolerances and prints one
// PASS/FAIL line per criterion.  Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "liqgame/constrained_nash.hpp"
#include "liqgame/fbsde_oracle.hpp"
#include "liqgame/io/csv.hpp"
#include "liqgame/stackelberg.hpp"
#include "liqgame/unconstrained_nash.hpp"
#include "support/oracles.hpp"
#include "support/tables.hpp"

namespace {

using namespace liqgame;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

/// Accumulates named checks; the first failing one is reported.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failed_.empty()) failed_ = what;
  }
  void note(const std::string& s) { notes_ += (notes_.empty() ? "" : "; ") + s; }
  Outcome done() const {
    return {failed_.empty(), failed_.empty() ? notes_ : "failed: " + failed_ + " (" + notes_ + ")"};
  }

 private:
  std::string failed_;
  std::string notes_;
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool rel_ok(double actual, double expected, double tol = 1e-12) {
  return std::abs(actual - expected) <= tol * std::abs(expected);
}

Outcome riccati_exactness() {
  Checks c;
  const auto t0 = Clock::now();
  std::vector<RiccatiSolution> sols;
  for (const GameSpec& s : {testing::table1(), testing::table2()}) {
    sols.push_back(solve_riccati(build_impact_matrices(s), s.grid()));
  }
  const double elapsed = seconds_since(t0);
  double terminal = 0.0;
  double residual = 0.0;
  const GameSpec specs[] = {testing::table1(), testing::table2()};
  for (std::size_t i = 0; i < 2; ++i) {
    const ImpactMatrices im = build_impact_matrices(specs[i]);
    terminal = std::max(terminal, (sols[i].G.back() + im.D).max_abs());
    residual = std::max(residual, testing::riccati_residual(im, sols[i].G, specs[i].grid()));
  }
  c.expect(terminal <= 1e-12, "||G(T)+D|| <= 1e-12");
  c.expect(residual <= 1e-8, "relative residual <= 1e-8");
  c.expect(elapsed < 1.0, "runtime < 1 s");
  c.note("||G(T)+D||=" + g(terminal) + " residual=" + g(residual) + " time=" + g(elapsed) + "s");
  return c.done();
}

Outcome terminal_condition() {
  Checks c;
  double worst = 0.0;
  for (const GameSpec& s : {testing::table1(), testing::table2()}) {
    const EquilibriumTrajectory tr = solve_unconstrained(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const PlayerParams& p = s.players[i];
      const double r = 2.0 * p.kappa * tr.nu.back()[i] +
                       (2.0 * p.terminal_penalty_A - p.alpha / s.size()) * tr.q.back()[i];
      worst = std::max(worst, std::abs(r) / std::max(1.0, std::abs(p.q0)));
    }
  }
  c.expect(worst <= 1e-8, "scaled terminal residual <= 1e-8");
  c.note("max scaled residual=" + g(worst));
  return c.done();
}

Outcome homogeneous_consistency() {
  Checks c;
  const GameSpec s = testing::table3(5);
  const EquilibriumTrajectory tr = solve_unconstrained(s);
  const Vector e5 = homogeneous_average(testing::table3_player(), 5, 1.0, s.grid());
  const double d = testing::sup_distance(tr.avg_q, e5);
  c.expect(d <= 1e-8, "sup |avg_q - E_5| <= 1e-8 |E0|");
  c.note("sup distance=" + g(d));
  return c.done();
}

Outcome figure_four() {
  Checks c;
  const auto t0 = Clock::now();
  const PlayerParams p = testing::table3_player();
  const TimeGrid grid(10.0, 1000);
  for (std::size_t n = 1; n <= 5; ++n) homogeneous_average(p, n, 1.0, grid);
  mfg_benchmark(p, 1.0, grid);
  const SweepResult shown = mfg_gap_sweep(p, 1.0, {1, 2, 3, 4, 5}, 10.0);
  const SweepResult ext = mfg_gap_sweep(p, 1.0, {2, 4, 8, 16, 32, 64}, 10.0);
  const double elapsed = seconds_since(t0);
  c.expect(shown.strictly_decreasing, "||E_N - E|| strictly decreasing for N = 1..5");
  c.expect(ext.slope && *ext.slope >= -1.3 && *ext.slope <= -0.7, "slope in [-1.3, -0.7]");
  c.expect(elapsed < 5.0, "runtime < 5 s");
  c.note("gaps N=1..5: " + g(shown.distances.front()) + " .. " + g(shown.distances.back()) +
         " slope=" + (ext.slope ? g(*ext.slope) : "none") + " time=" + g(elapsed) + "s");
  return c.done();
}

Outcome constrained_solve() {
  Checks c;
  double worst = 0.0;
  double ratio_lo = INFINITY;
  double ratio_hi = 0.0;
  for (GameSpec s : {testing::table1(), testing::table2(), testing::table3(5)}) {
    const ConstrainedSolution sol = solve_constrained(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      worst = std::max(worst, std::abs(sol.trajectory.q.back()[i]) /
                                  std::max(1.0, std::abs(s.players[i].q0)));
    }
    s.grid_steps = 500;
    const double coarse =
        testing::backward_residual(build_impact_matrices(s), solve_constrained(s).trajectory);
    s.grid_steps = 1000;
    const double fine =
        testing::backward_residual(build_impact_matrices(s), solve_constrained(s).trajectory);
    ratio_lo = std::min(ratio_lo, coarse / fine);
    ratio_hi = std::max(ratio_hi, coarse / fine);
  }
  c.expect(worst <= 1e-10, "|q(T)| <= 1e-10 scale-relative");
  c.expect(ratio_lo >= 3.2 && ratio_hi <= 4.8, "halving factor in [3.2, 4.8]");
  c.note("max |q(T)|=" + g(worst) + " halving factors in [" + g(ratio_lo) + ", " + g(ratio_hi) +
         "]");
  return c.done();
}

Outcome penalty_limit() {
  Checks c;
  const SweepResult r = penalty_limit_sweep(testing::table3(2), {1, 10, 100, 1e4, 1e6});
  c.expect(!r.any_failed(), "all sweep points solved");
  c.expect(r.strictly_decreasing, "distances strictly decreasing");
  const double ratio = r.distances.back() / r.distances.front();
  c.expect(ratio <= 1e-4, "final <= 1e-4 initial");
  c.note("final/initial=" + g(ratio));
  return c.done();
}

Outcome oracle_agreement() {
  Checks c;
  const GameSpec s = testing::table3_weak(5);
  c.expect(check_existence_conditions(s).thm35_ok, "spec satisfies the uniqueness condition");
  const PicardResult u = picard_solve_unconstrained(s);
  const PicardResult f = picard_solve_constrained(s);
  c.expect(u.converged && u.iterations <= 500, "penalty Picard converges within 500");
  c.expect(f.converged && f.iterations <= 500, "fuel Picard converges within 500");
  const EquilibriumTrajectory cu = solve_unconstrained(s);
  const EquilibriumTrajectory cf = solve_constrained(s).trajectory;
  const double du = std::max(testing::sup_distance(u.trajectory.q, cu.q),
                             testing::sup_distance(u.trajectory.nu, cu.nu));
  const double df = std::max(testing::sup_distance(f.trajectory.q, cf.q),
                             testing::sup_distance(f.trajectory.nu, cf.nu));
  c.expect(du <= 1e-6, "penalty sup distance <= 1e-6");
  c.expect(df <= 1e-6, "fuel sup distance <= 1e-6");
  c.note("iterations=" + std::to_string(u.iterations) + "/" + std::to_string(f.iterations) +
         " sup distances=" + g(du) + "/" + g(df));
  return c.done();
}

Outcome hierarchy() {
  Checks c;
  const HierarchyGameSpec s = testing::table4();
  const auto t0 = Clock::now();
  const HierarchySolution sol = solve_hierarchy_bvp(s);
  const double elapsed = seconds_since(t0);
  const HierarchyResiduals r = hierarchy_residuals(s, sol);
  const double h = s.grid().h();
  const double neumann = 10.0 * (1.0 + std::abs(sol.E.front()[2])) * h * h;
  c.expect(r.e1_start <= 1e-10 && r.e1_end <= 1e-10, "E1 boundary residuals <= 1e-10");
  c.expect(r.e2_start <= 1e-10 && r.e2_end <= 1e-10, "E2(0) = E2(T) = 0 within 1e-10");
  c.expect(r.e3_slope_start <= neumann && r.e3_slope_end <= neumann, "E3' boundary O(h^2)");
  bool monotone = true;
  for (std::size_t k = 1; k < sol.E.size(); ++k) monotone = monotone && sol.E[k][0] < sol.E[k - 1][0];
  c.expect(monotone, "E1 strictly decreasing");
  const HierarchySolution tr = solve_hierarchy_translated(s);
  double scale = 0.0;
  double diff = 0.0;
  for (std::size_t k = 0; k < sol.E.size(); ++k) {
    for (std::size_t j = 0; j < 3; ++j) {
      scale = std::max(scale, std::abs(sol.E[k][j]));
      diff = std::max(diff, std::abs(sol.E[k][j] - tr.E[k][j]));
    }
  }
  c.expect(diff <= 1e-8 * scale, "translated vs direct <= 1e-8 relative");
  HierarchyGameSpec fine = s;
  fine.grid_steps *= 2;
  const double ratio = r.interior / hierarchy_residuals(fine, solve_hierarchy_bvp(fine)).interior;
  c.expect(ratio >= 3.5 && ratio <= 4.5, "halving factor in [3.5, 4.5]");
  c.expect(elapsed < 2.0, "runtime < 2 s");
  c.note("E1(T)=" + g(sol.E.back()[0]) + " translated diff=" + g(diff / scale) +
         " halving factor=" + g(ratio) + " time=" + g(elapsed) + "s");
  return c.done();
}

Outcome condition_reports() {
  Checks c;
  struct Fixture {
    GameSpec spec;
    double a, c1, c2;
  };
  const Fixture games[] = {
      {testing::table1(), 0.010573712634405641195, -2036067.9774997896964,
       -1.180339887498948482e-6},
      {testing::table2(), 0.023643540225079395333, -10980339.887498948482,
       1.7639320225002103036e-8},
      {testing::table3_weak(5), 0.001, 48750.0, 1.95e-7},
  };
  for (const Fixture& f : games) {
    const ConditionReport r = check_existence_conditions(f.spec);
    c.expect(r.chosen_a && rel_ok(*r.chosen_a, f.a), "split point a");
    c.expect(r.c1_at_a && rel_ok(*r.c1_at_a, f.c1), "c1(a)");
    c.expect(r.c2_at_inv_a && rel_ok(*r.c2_at_inv_a, f.c2), "c2(1/a)");
  }
  const HierarchyCondition h = check_hierarchy_condition(testing::table4());
  c.expect(rel_ok(h.c_star, 4.3377777841777777778), "c* (Table 4)");
  c.expect(rel_ok(h.lambda_star, 0.03076558469438960029), "lambda* (Table 4)");
  c.expect(h.epsilon_g && rel_ok(*h.epsilon_g, -0.013467236743181591962), "eps_g (Table 4)");
  c.expect(!h.L_bar_norm_bound, "no operator bound when eps_g <= 0");
  HierarchyGameSpec weak = testing::table4();
  weak.follower.alpha = 3e-7;
  const HierarchyCondition w = check_hierarchy_condition(weak);
  c.expect(rel_ok(w.c_star, 1.7780337777784177778), "c* (weak follower)");
  c.expect(w.epsilon_g && rel_ok(*w.epsilon_g, 0.007533834658058869513), "eps_g (weak follower)");
  c.expect(w.L_bar_norm_bound && rel_ok(*w.L_bar_norm_bound, 0.025703931145240387933),
           "L-bar bound (weak follower)");
  c.note("c*=" + g(h.c_star) + " lambda*=" + g(h.lambda_star) + " eps_g=" + g(*h.epsilon_g) +
         "; weak follower L-bar=" + g(*w.L_bar_norm_bound));
  return c.done();
}

Outcome determinism(const std::string& cli) {
  Checks c;
  if (cli.empty()) {
    c.expect(false, "path of the liqgame executable not given");
    return c.done();
  }
  const fs::path root = fs::temp_directory_path() / "liqgame_acceptance";
  fs::remove_all(root);
  std::size_t compared = 0;
  for (const char* name : {"table1", "table2", "table3", "table4"}) {
    const std::string scenario = std::string(LIQGAME_SCENARIO_DIR) + "/" + name + ".json";
    for (const char* run : {"a", "b"}) {
      const fs::path out = root / run / name;
      const std::string cmd = "\"" + cli + "\" \"" + scenario + "\" --plot --out \"" +
                              out.string() + "\" > /dev/null";
      c.expect(std::system(cmd.c_str()) == 0, std::string("CLI run on ") + name);
    }
    for (const auto& entry : fs::directory_iterator(root / "a" / name)) {
      const fs::path other = root / "b" / name / entry.path().filename();
      c.expect(fs::exists(other) && io::read_text_file(entry.path().string()) ==
                                        io::read_text_file(other.string()),
               "byte-identical " + entry.path().filename().string());
      ++compared;
    }
  }
  c.expect(compared >= 8, "every scenario produced CSV and SVG");
  c.note(std::to_string(compared) + " files compared");
  fs::remove_all(root);
  return c.done();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Riccati exactness", riccati_exactness},
      {"Penalty terminal condition", terminal_condition},
      {"Homogeneous consistency", homogeneous_consistency},
      {"Figure 4 reproduction", figure_four},
      {"Constrained solve", constrained_solve},
      {"Penalty limit", penalty_limit},
      {"Oracle agreement", oracle_agreement},
      {"Hierarchy BVP", hierarchy},
      {"Condition reports", condition_reports},
      {"Determinism", [&] { return determinism(cli); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures;
}
