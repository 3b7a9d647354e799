#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liqgame/constrained_nash.hpp"
#include "liqgame/error.hpp"
#include "liqgame/fbsde_oracle.hpp"
#include "liqgame/io/csv.hpp"
#include "liqgame/io/json.hpp"
#include "liqgame/io/svg.hpp"
#include "liqgame/market_model.hpp"
#include "liqgame/stackelberg.hpp"
#include "liqgame/unconstrained_nash.hpp"

namespace liqgame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

inline const std::vector<std::string>& modes() {
  static const std::vector<std::string> m = {"check",   "unconstrained", "constrained", "hierarchy",
                                             "sweep-A", "sweep-N",       "oracle"};
  return m;
}

struct Options {
  std::string scenario_path;
  std::optional<std::string> mode;  ///< overrides the scenario's "mode"
  bool plot = false;
  std::string out_dir = "out";
  std::optional<std::size_t> grid_steps;  ///< overrides the scenario's grid_steps
};

inline int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kValidation:
    case ErrorCategory::kInvalidArgument: return kExitInput;
    case ErrorCategory::kIo: return kExitIo;
    default: return kExitSolver;
  }
}

/// One JSON object on one line, prefixed so it can be grepped from mixed output.
inline std::string error_line(const std::string& category, int code, const std::string& message) {
  const io::Json j{{"category", category}, {"exit", code}, {"message", message}};
  return "liqgame-error " + j.dump();
}

namespace detail {

/// A scenario document with the overrides applied.
class Scenario {
 public:
  Scenario(io::Json doc, const Options& opt) : doc_(std::move(doc)), opt_(opt) {
    io::detail::object(doc_, "scenario");
    if (opt.mode) {
      mode_ = *opt.mode;
    } else if (doc_.contains("mode") && doc_["mode"].is_string()) {
      mode_ = doc_["mode"].get<std::string>();
    } else {
      io::detail::invalid("scenario has no string \"mode\" and --mode was not given");
    }
    if (std::find(modes().begin(), modes().end(), mode_) == modes().end()) {
      io::detail::invalid("unknown mode \"" + mode_ + "\"");
    }
    stem_ = std::filesystem::path(opt.scenario_path).stem().string() + "_" + mode_;
    if (doc_.contains("outputs")) {
      const io::Json& outputs = io::detail::object(doc_["outputs"], "outputs");
      if (outputs.contains(mode_)) {
        if (!outputs[mode_].is_string()) io::detail::invalid("outputs." + mode_ + " must be a string");
        stem_ = outputs[mode_].get<std::string>();
      }
    }
  }

  const std::string& mode() const { return mode_; }
  const std::string& stem() const { return stem_; }
  const io::Json& doc() const { return doc_; }
  bool is_hierarchy() const { return doc_.contains("leader"); }

  /// "players" as listed, or "N" copies of "player".
  GameSpec game() const {
    GameSpec s;
    if (doc_.contains("players")) {
      s = io::game_from_json(doc_);
    } else if (doc_.contains("player")) {
      s.horizon_T = io::detail::number_at(doc_, "horizon_T", "scenario");
      if (doc_.contains("grid_steps")) s.grid_steps = io::detail::count(doc_["grid_steps"], "grid_steps");
      const std::size_t n = io::detail::count(io::detail::require(doc_, "N", "scenario"), "N");
      s.players.assign(n, io::player_from_json(doc_["player"], "player"));
    } else {
      io::detail::invalid("missing key \"players\" in scenario");
    }
    if (opt_.grid_steps) s.grid_steps = *opt_.grid_steps;
    return validate_game(s);
  }

  HierarchyGameSpec hierarchy() const {
    HierarchyGameSpec s = io::hierarchy_from_json(doc_);
    if (opt_.grid_steps) s.grid_steps = *opt_.grid_steps;
    return validate_hierarchy(s);
  }

  /// Parameters shared by identical players: "player", or all of "players".
  PlayerParams homogeneous_player() const {
    if (doc_.contains("player")) return io::player_from_json(doc_["player"], "player");
    const GameSpec s = io::game_from_json(doc_);
    if (s.players.empty()) io::detail::invalid("players must be non-empty");
    for (const PlayerParams& p : s.players) {
      if (!(p == s.players.front())) io::detail::invalid("sweep-N requires identical players");
    }
    return s.players.front();
  }

  std::size_t grid_steps() const {
    if (opt_.grid_steps) return *opt_.grid_steps;
    return doc_.contains("grid_steps") ? io::detail::count(doc_["grid_steps"], "grid_steps") : 1000;
  }

  double number(const char* key, double fallback) const {
    return doc_.contains(key) ? io::detail::number(doc_[key], key) : fallback;
  }

  std::vector<double> numbers(const char* key, std::vector<double> fallback) const {
    if (!doc_.contains(key)) return fallback;
    const io::Json& a = doc_[key];
    if (!a.is_array()) io::detail::invalid(std::string(key) + " must be an array");
    std::vector<double> v;
    for (const io::Json& x : a) v.push_back(io::detail::number(x, key));
    return v;
  }

  std::vector<std::size_t> counts(const char* key) const {
    const io::Json& a = io::detail::require(doc_, key, "scenario");
    if (!a.is_array()) io::detail::invalid(std::string(key) + " must be an array");
    std::vector<std::size_t> v;
    for (const io::Json& x : a) {
      const std::size_t n = io::detail::count(x, key);
      if (n == 0) io::detail::invalid(std::string(key) + " entries must be positive");
      v.push_back(n);
    }
    return v;
  }

 private:
  io::Json doc_;
  Options opt_;
  std::string mode_;
  std::string stem_;
};

class Writer {
 public:
  Writer(const Options& opt, std::ostream& out) : dir_(opt.out_dir), plot_(opt.plot), out_(out) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCategory::kIo, "cannot create output directory " + dir_.string());
  }

  bool plot() const { return plot_; }

  void csv(const std::string& name, const io::CsvTable& t) { text(name + ".csv", io::to_csv(t)); }

  void text(const std::string& file, const std::string& body) {
    const std::string path = (dir_ / file).string();
    io::write_text_file(path, body);
    out_ << "wrote: " << path << '\n';
  }

  void svg(const std::string& name, const std::vector<io::PlotSeries>& series,
           const io::PlotStyle& style) {
    if (plot_) text(name + ".svg", io::emit_svg(series, style));
  }

 private:
  std::filesystem::path dir_;
  bool plot_;
  std::ostream& out_;
};

inline std::string num(double v) { return io::format_double(v); }

inline void print_conditions(const ConditionReport& r, std::ostream& out) {
  out << "concavity:";
  for (bool b : r.concavity_ok_per_player) out << ' ' << (b ? "ok" : "fail");
  out << '\n';
  out << "uniqueness_condition: lhs=" << num(r.thm35_lhs) << " rhs=" << num(r.thm35_rhs)
      << " ok=" << (r.thm35_ok ? "true" : "false") << '\n';
  out << "limit_condition: rhs=" << num(r.thm44_rhs) << " ok=" << (r.thm44_ok ? "true" : "false")
      << '\n';
  out << "underline_D: " << num(r.underline_D) << '\n';
  if (r.chosen_a) {
    out << "split_point: a=" << num(*r.chosen_a) << " c1(a)=" << num(*r.c1_at_a)
        << " c2(1/a)=" << num(*r.c2_at_inv_a)
        << " interval_nonempty=" << (r.split_interval_nonempty ? "true" : "false") << '\n';
  }
  if (!r.thm35_ok) out << "warning: sufficient condition not met; solving anyway\n";
}

inline void print_hierarchy_condition(const HierarchyCondition& c, std::ostream& out) {
  out << "hierarchy_condition: c_star=" << num(c.c_star) << " lambda_star=" << num(c.lambda_star)
      << " satisfied=" << (c.satisfied ? "true" : "false") << '\n';
  out << "epsilon_g: " << (c.epsilon_g ? num(*c.epsilon_g) : "none") << '\n';
  out << "operator_bounds: T=" << (c.T_norm_bound ? num(*c.T_norm_bound) : "none")
      << " L_bar=" << (c.L_bar_norm_bound ? num(*c.L_bar_norm_bound) : "none")
      << " ultra_weak_ok=" << (c.ultra_weak_ok ? "true" : "false") << '\n';
  if (!c.satisfied) out << "warning: sufficient condition not met; solving anyway\n";
}

inline std::vector<io::PlotSeries> inventory_series(const EquilibriumTrajectory& tr) {
  std::vector<io::PlotSeries> s;
  const std::vector<double> t = tr.grid.times();
  for (std::size_t i = 0; i < tr.players(); ++i) {
    s.push_back({"q_" + std::to_string(i + 1), t, tr.player_series(tr.q, i)});
  }
  return s;
}

/// Drops failed or non-positive points so the log-log plot stays defined.
inline std::vector<io::PlotSeries> sweep_series(const SweepResult& r, const std::string& label) {
  io::PlotSeries s{label, {}, {}};
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (r.failures[i].empty() && r.distances[i] > 0.0) {
      s.x.push_back(r.values[i]);
      s.y.push_back(r.distances[i]);
    }
  }
  return {s};
}

inline void sweep_plot(Writer& w, const std::string& name, const SweepResult& r,
                       const std::string& title, std::ostream& out) {
  if (!w.plot()) return;
  const std::vector<io::PlotSeries> s = sweep_series(r, "distance");
  if (s.front().x.size() < 2) {
    out << "note: " << name << ".svg skipped (fewer than 2 positive points)\n";
    return;
  }
  w.svg(name, s, {title, r.parameter, "distance", true, true});
}

inline void print_sweep(const SweepResult& r, const std::string& what, std::ostream& out) {
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    out << what << ": " << r.parameter << '=' << num(r.values[i]) << " distance=" << num(r.distances[i]);
    if (!r.failures[i].empty()) out << " failed=\"" << r.failures[i] << '"';
    out << '\n';
  }
  out << what << "_slope: " << (r.slope ? num(*r.slope) : "none") << '\n';
  out << what << "_strictly_decreasing: " << (r.strictly_decreasing ? "true" : "false") << '\n';
}

inline void run_check(const Scenario& sc, Writer& w, std::ostream& out) {
  std::string body = "quantity,value\n";
  auto row = [&](const std::string& k, double v) { body += k + ',' + num(v) + '\n'; };
  if (sc.is_hierarchy()) {
    const HierarchyGameSpec s = sc.hierarchy();
    const HierarchyCondition c = check_hierarchy_condition(s);
    print_hierarchy_condition(c, out);
    const CoercivityReport cr = coercivity_probe(s, 400);
    out << "coercivity_min_ratio: " << num(cr.min_ratio) << " over " << cr.test_functions
        << " test functions\n";
    row("c_star", c.c_star);
    row("lambda_star", c.lambda_star);
    row("satisfied", c.satisfied ? 1.0 : 0.0);
    if (c.epsilon_g) row("epsilon_g", *c.epsilon_g);
    if (c.T_norm_bound) row("T_norm_bound", *c.T_norm_bound);
    if (c.L_bar_norm_bound) row("L_bar_norm_bound", *c.L_bar_norm_bound);
    row("ultra_weak_ok", c.ultra_weak_ok ? 1.0 : 0.0);
    row("coercivity_min_ratio", cr.min_ratio);
  } else {
    const GameSpec s = sc.game();
    const ConditionReport r = check_existence_conditions(s);
    print_conditions(r, out);
    for (std::size_t i = 0; i < r.concavity_ok_per_player.size(); ++i) {
      row("concave_" + std::to_string(i + 1), r.concavity_ok_per_player[i] ? 1.0 : 0.0);
    }
    row("uniqueness_lhs", r.thm35_lhs);
    row("uniqueness_rhs", r.thm35_rhs);
    row("uniqueness_ok", r.thm35_ok ? 1.0 : 0.0);
    row("limit_rhs", r.thm44_rhs);
    row("limit_ok", r.thm44_ok ? 1.0 : 0.0);
    row("underline_D", r.underline_D);
    if (r.chosen_a) {
      row("a", *r.chosen_a);
      row("c1_at_a", *r.c1_at_a);
      row("c2_at_inv_a", *r.c2_at_inv_a);
    }
  }
  w.text(sc.stem() + ".csv", body);
}

inline void run_unconstrained(const Scenario& sc, Writer& w, std::ostream& out) {
  const GameSpec s = sc.game();
  print_conditions(check_existence_conditions(s), out);
  const UnconstrainedSolution sol = solve_unconstrained_detailed(s);
  const EquilibriumTrajectory& tr = sol.trajectory;
  double terminal = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const PlayerParams& p = s.players[i];
    const double r = 2.0 * p.kappa * tr.nu.back()[i] +
                     (2.0 * p.terminal_penalty_A - p.alpha / s.size()) * tr.q.back()[i];
    terminal = std::max(terminal, std::abs(r) / std::max(1.0, std::abs(p.q0)));
  }
  out << "terminal_condition_residual_max: " << num(terminal) << '\n';
  out << "riccati_min_pivot_ratio: " << num(sol.min_pivot_ratio) << '\n';
  w.csv(sc.stem(), io::trajectory_table(tr));
  w.svg(sc.stem(), inventory_series(tr), {"Inventories, penalised terminal cost", "t", "q"});
}

inline void run_constrained(const Scenario& sc, Writer& w, std::ostream& out) {
  const GameSpec s = sc.game();
  print_conditions(check_existence_conditions(s), out);
  const ConstrainedSolution sol = solve_constrained(s);
  double terminal = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    terminal = std::max(terminal, std::abs(sol.trajectory.q.back()[i]) /
                                      std::max(1.0, std::abs(s.players[i].q0)));
  }
  out << "terminal_inventory_max: " << num(terminal) << '\n';
  w.csv(sc.stem(), io::trajectory_table(sol.trajectory));
  w.svg(sc.stem(), inventory_series(sol.trajectory), {"Inventories, q(T) = 0", "t", "q"});
}

inline void run_hierarchy(const Scenario& sc, Writer& w, std::ostream& out) {
  const HierarchyGameSpec s = sc.hierarchy();
  print_hierarchy_condition(check_hierarchy_condition(s), out);
  const HierarchySolution sol = solve_hierarchy_bvp(s);
  const HierarchyResiduals r = hierarchy_residuals(s, sol);
  out << "boundary_residuals: E1(0)=" << num(r.e1_start) << " E1(T)=" << num(r.e1_end)
      << " E2(0)=" << num(r.e2_start) << " E2(T)=" << num(r.e2_end)
      << " E3'(0)=" << num(r.e3_slope_start) << " E3'(T)=" << num(r.e3_slope_end) << '\n';
  out << "interior_residual_max: " << num(r.interior) << '\n';
  w.csv(sc.stem(), io::hierarchy_table(sol));
  const std::vector<double> t = sol.grid.times();
  std::vector<double> e1;
  std::vector<double> e2;
  for (const State3& e : sol.E) {
    e1.push_back(e[0]);
    e2.push_back(e[1]);
  }
  w.svg(sc.stem(), {{"leader E1", t, e1}, {"followers E2", t, e2}},
        {"Leader inventory and follower average", "t", "inventory"});
}

inline void run_sweep_a(const Scenario& sc, Writer& w, std::ostream& out) {
  const GameSpec s = sc.game();
  const SweepResult r = penalty_limit_sweep(s, sc.numbers("A_multipliers", {1, 10, 100, 1e4, 1e6}));
  print_sweep(r, "penalty_limit", out);
  const double threshold = sc.number("threshold_ratio", 1e-4);
  if (!r.any_failed() && r.distances.front() > 0.0) {
    const double ratio = r.distances.back() / r.distances.front();
    out << "final_over_initial: " << num(ratio)
        << " below_threshold=" << (ratio <= threshold ? "true" : "false") << '\n';
  }
  w.csv(sc.stem(), io::sweep_table(r));
  sweep_plot(w, sc.stem(), r, "Penalised vs constrained rates", out);
}

inline void run_sweep_n(const Scenario& sc, Writer& w, std::ostream& out) {
  const PlayerParams p = sc.homogeneous_player();
  const double horizon = io::detail::number_at(sc.doc(), "horizon_T", "scenario");
  const std::size_t steps = sc.grid_steps();
  const double e0 = sc.number("E0", p.q0);
  const std::vector<std::size_t> ns = sc.counts("N_values");
  const std::vector<std::size_t> slope_ns =
      sc.doc().contains("slope_N_values") ? sc.counts("slope_N_values") : ns;
  const TimeGrid grid(horizon, steps);

  io::CsvTable curves;
  curves.header.push_back("t");
  std::vector<io::PlotSeries> series;
  std::vector<Vector> columns;
  const std::vector<double> t = grid.times();
  for (std::size_t n : ns) {
    curves.header.push_back("E_" + std::to_string(n));
    columns.push_back(homogeneous_average(p, n, e0, grid));
    series.push_back({"E_" + std::to_string(n), t, columns.back()});
  }
  curves.header.push_back("E_mfg");
  columns.push_back(mfg_benchmark(p, e0, grid));
  series.push_back({"E (mean field)", t, columns.back()});
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    std::vector<double> row{t[k]};
    for (const Vector& c : columns) row.push_back(c[k]);
    curves.rows.push_back(std::move(row));
  }

  const SweepResult shown = mfg_gap_sweep(p, e0, ns, horizon, steps);
  print_sweep(shown, "inventory_gap", out);
  const SweepResult gap = mfg_gap_sweep(p, e0, slope_ns, horizon, steps);
  print_sweep(gap, "inventory_gap_extended", out);
  const SweepResult rate = mfg_convergence_sweep(p, e0, slope_ns, horizon, steps);
  print_sweep(rate, "constrained_rate_gap", out);
  out << "note: deterministic homogeneous data, so the expected rate is O(1/N)\n";

  w.csv(sc.stem(), curves);
  w.csv(sc.stem() + "_gap", io::sweep_table(gap));
  w.csv(sc.stem() + "_rate", io::sweep_table(rate));
  w.svg(sc.stem(), series, {"Average inventories and mean-field limit", "t", "E"});
  sweep_plot(w, sc.stem() + "_gap", gap, "sup |E_N - E|", out);
  sweep_plot(w, sc.stem() + "_rate", rate, "L2 gap of constrained rates", out);
}

inline void run_oracle(const Scenario& sc, Writer& w, std::ostream& out) {
  const GameSpec s = sc.game();
  print_conditions(check_existence_conditions(s), out);
  PicardConfig cfg;
  if (sc.doc().contains("picard")) {
    const io::Json& j = io::detail::object(sc.doc()["picard"], "picard");
    io::detail::reject_unknown(j, {"damping", "max_iterations", "tolerance"}, "picard");
    if (j.contains("damping")) cfg.damping = io::detail::number(j["damping"], "picard.damping");
    if (j.contains("tolerance")) cfg.tolerance = io::detail::number(j["tolerance"], "picard.tolerance");
    if (j.contains("max_iterations")) {
      cfg.max_iterations = io::detail::count(j["max_iterations"], "picard.max_iterations");
    }
  }
  const PicardResult pen = picard_solve_unconstrained(s, cfg);
  const PicardResult fuel = picard_solve_constrained(s, cfg);
  w.csv(sc.stem() + "_penalty", io::iteration_table(pen.distances));
  w.csv(sc.stem() + "_fuel", io::iteration_table(fuel.distances));
  w.csv(sc.stem(), io::trajectory_table(pen.trajectory));

  auto sup = [](const std::vector<Vector>& a, const std::vector<Vector>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      for (std::size_t i = 0; i < a[k].size(); ++i) d = std::max(d, std::abs(a[k][i] - b[k][i]));
    return d;
  };
  bool ok = true;
  for (const auto& [name, res] : {std::pair<const char*, const PicardResult*>{"penalty", &pen},
                                  {"fuel", &fuel}}) {
    out << "picard_" << name << ": converged=" << (res->converged ? "true" : "false")
        << " iterations=" << res->iterations << " final_distance=" << num(res->final_distance());
    if (res->converged) {
      const EquilibriumTrajectory closed = std::string(name) == "penalty"
                                               ? solve_unconstrained(s)
                                               : solve_constrained(s).trajectory;
      out << " sup_distance_to_closed_form=" << num(sup(res->trajectory.q, closed.q));
    }
    out << '\n';
    ok = ok && res->converged;
  }
  if (w.plot()) {
    std::vector<io::PlotSeries> series;
    for (const auto& [name, res] : {std::pair<const char*, const PicardResult*>{"penalty", &pen},
                                    {"fuel", &fuel}}) {
      io::PlotSeries ps{name, {}, {}};
      for (std::size_t i = 0; i < res->distances.size(); ++i) {
        if (res->distances[i] > 0.0 && std::isfinite(res->distances[i])) {
          ps.x.push_back(static_cast<double>(i + 1));
          ps.y.push_back(res->distances[i]);
        }
      }
      if (ps.x.size() >= 2) series.push_back(std::move(ps));
    }
    if (series.empty()) {
      out << "note: " << sc.stem() << ".svg skipped (fewer than 2 positive distances)\n";
    } else {
      w.svg(sc.stem(), series, {"Picard successive-iterate distance", "iteration", "sup distance",
                                false, true});
    }
  }
  if (!ok) {
    throw Error(ErrorCategory::kNoConvergence,
                "Picard iteration did not converge within " + std::to_string(cfg.max_iterations) +
                    " iterations");
  }
}

}  // namespace detail

/// Loads the scenario, runs the selected mode and writes its outputs.
/// Returns the process exit status; failures print one error line to `err`.
inline int run_scenario(const Options& opt, std::ostream& out, std::ostream& err) {
  try {
    const detail::Scenario sc(io::read_json_file(opt.scenario_path), opt);
    detail::Writer w(opt, out);
    out << "mode: " << sc.mode() << '\n';
    if (sc.mode() == "check") detail::run_check(sc, w, out);
    else if (sc.mode() == "unconstrained") detail::run_unconstrained(sc, w, out);
    else if (sc.mode() == "constrained") detail::run_constrained(sc, w, out);
    else if (sc.mode() == "hierarchy") detail::run_hierarchy(sc, w, out);
    else if (sc.mode() == "sweep-A") detail::run_sweep_a(sc, w, out);
    else if (sc.mode() == "sweep-N") detail::run_sweep_n(sc, w, out);
    else detail::run_oracle(sc, w, out);
    return kExitOk;
  } catch (const Error& e) {
    const int code = exit_code_for(e.category());
    err << error_line(category_name(e.category()), code, e.what()) << '\n';
    return code;
  } catch (const std::exception& e) {
    err << error_line("internal", kExitSolver, e.what()) << '\n';
    return kExitSolver;
  }
}

/// `liqgame <scenario.json> [--mode M] [--plot] [--out DIR] [--grid-steps M]`
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solve liquidation games from JSON scenarios", "liqgame"};
  Options opt;
  std::string mode;
  std::size_t grid_steps = 0;
  app.add_option("scenario", opt.scenario_path, "scenario JSON file")->required();
  app.add_option("--mode", mode, "override the scenario mode")->check(CLI::IsMember(modes()));
  app.add_flag("--plot", opt.plot, "also write SVG plots");
  app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  app.add_option("--grid-steps", grid_steps, "override grid_steps")->check(CLI::Range(2, 10000000));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << error_line("usage", kExitInput, e.what()) << '\n';
    return kExitInput;
  }
  if (!mode.empty()) opt.mode = mode;
  if (grid_steps != 0) opt.grid_steps = grid_steps;
  return run_scenario(opt, out, err);
}

}  // namespace liqgame::cli
