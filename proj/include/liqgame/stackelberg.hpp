#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "liqgame/error.hpp"
#include "liqgame/numerics/dense_matrix.hpp"
#include "liqgame/numerics/linear_solve.hpp"
#include "liqgame/numerics/quadrature.hpp"
#include "liqgame/numerics/time_grid.hpp"

namespace liqgame {

struct LeaderParams {
  double alpha0 = 0.0;
  double kappa0 = 0.0;
  double lambda0 = 0.0;
  double q00 = 0.0;  ///< leader initial inventory

  friend bool operator==(const LeaderParams&, const LeaderParams&) = default;
};

/// Homogeneous follower block; followers start flat on average.
struct FollowerParams {
  double alpha = 0.0;
  double kappa = 0.0;
  double lambda = 0.0;

  friend bool operator==(const FollowerParams&, const FollowerParams&) = default;
};

struct HierarchyGameSpec {
  LeaderParams leader;
  FollowerParams follower;
  std::size_t followers = 1;
  double horizon_T = 1.0;
  std::size_t grid_steps = 1000;

  TimeGrid grid() const { return TimeGrid(horizon_T, grid_steps); }

  friend bool operator==(const HierarchyGameSpec&, const HierarchyGameSpec&) = default;
};

inline HierarchyGameSpec validate_hierarchy(const HierarchyGameSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorCategory::kValidation, what); };
  const LeaderParams& l = spec.leader;
  const FollowerParams& f = spec.follower;
  for (double v : {l.alpha0, l.kappa0, l.lambda0, l.q00, f.alpha, f.kappa, f.lambda}) {
    if (!std::isfinite(v)) fail("hierarchy parameters must be finite");
  }
  if (!(spec.horizon_T > 0.0) || !std::isfinite(spec.horizon_T)) fail("horizon_T must be positive");
  if (spec.grid_steps < 2) fail("grid_steps must be at least 2");
  if (spec.followers < 1) fail("followers must be at least 1");
  if (!(l.kappa0 > 0.0)) fail("kappa0 must be positive (leader)");
  if (!(f.kappa > 0.0)) fail("kappa must be positive (followers)");
  if (!(f.lambda > 0.0)) fail("lambda must be positive (followers)");
  if (!(l.alpha0 >= 0.0)) fail("alpha0 must be non-negative (leader)");
  if (!(l.lambda0 >= 0.0)) fail("lambda0 must be non-negative (leader)");
  if (!(f.alpha >= 0.0)) fail("alpha must be non-negative (followers)");
  return spec;
}

struct HierarchyMatrices {
  DenseMatrix H1;
  DenseMatrix H2;
  DenseMatrix H3;
};

inline HierarchyMatrices build_hierarchy_matrices(const HierarchyGameSpec& spec) {
  const double a0 = spec.leader.alpha0;
  const double k0 = spec.leader.kappa0;
  const double l0 = spec.leader.lambda0;
  const double a = spec.follower.alpha;
  const double k = spec.follower.kappa;
  const double l = spec.follower.lambda;
  const double f = 1.0 - 1.0 / static_cast<double>(spec.followers);
  HierarchyMatrices h{DenseMatrix(3, 3), DenseMatrix(3, 3), DenseMatrix(3, 3)};
  h.H1(0, 0) = 1.0 / (2.0 * k0);
  h.H1(1, 1) = 1.0 / (2.0 * k);
  h.H1(2, 2) = -2.0 * l;

  h.H2(0, 0) = 2.0 * l0 + a0 * a0 / (2.0 * k);
  h.H2(0, 2) = -a0 / (2.0 * k);
  h.H2(1, 1) = 2.0 * l;
  h.H2(2, 0) = a0 / (2.0 * k);
  h.H2(2, 2) = -1.0 / (2.0 * k);

  h.H3(0, 1) = -a0 / (2.0 * k);
  h.H3(0, 2) = a0 * a / (2.0 * k) * f;
  h.H3(1, 0) = -a0 / (2.0 * k0);
  h.H3(1, 1) = -a / (2.0 * k) * f;
  h.H3(2, 2) = a / (2.0 * k) * f;
  return h;
}

struct HierarchyCondition {
  double c_star = 0.0;
  double lambda_star = 0.0;
  bool satisfied = false;  ///< c_star < 16 lambda_star
  std::optional<double> epsilon_g;
  std::optional<double> T_norm_bound;
  std::optional<double> L_bar_norm_bound;
  bool ultra_weak_ok = false;
};

inline HierarchyCondition check_hierarchy_condition(const HierarchyGameSpec& spec) {
  const double a0 = spec.leader.alpha0;
  const double k0 = spec.leader.kappa0;
  const double l0 = spec.leader.lambda0;
  const double a = spec.follower.alpha;
  const double k = spec.follower.kappa;
  const double l = spec.follower.lambda;
  const double n = static_cast<double>(spec.followers);
  const double f = 1.0 - 1.0 / n;
  constexpr double beta_max = 0.0;

  HierarchyCondition c;
  const double gap = 1.0 / k0 - 1.0 / k;
  c.c_star = a0 * a0 * gap * gap + (a / k) * (a / k) * (1.0 + a0 * a0) * f * f;
  const double u = l0 / k0 + a0 * a0 / (4.0 * k * k0);
  const double v = l / k;
  const double smallest = 0.5 * (u + v - std::sqrt((u - v) * (u - v) + a0 * a0 * l / (k * k * k0)));
  c.lambda_star = std::min(v, smallest);
  c.satisfied = c.c_star < 16.0 * c.lambda_star;

  const double lam4 = 4.0 * l - 2.0 * beta_max / n;
  if (lam4 > 0.0) {
    const double eps = 2.0 * std::sqrt(k) - a / std::sqrt(lam4);
    c.epsilon_g = eps;
    if (eps > 0.0) {
      c.T_norm_bound = std::sqrt(n) * 2.0 * a0 * k / (std::sqrt(lam4) * eps);
      c.L_bar_norm_bound = a0 * k / (std::sqrt(k * (2.0 * l - beta_max / n)) * eps);
      const double lb = *c.L_bar_norm_bound;
      c.ultra_weak_ok = a0 * a0 < 2.0 / (lb * lb + 1.0) * l0 * k0;
    }
  }
  return c;
}

using State3 = std::array<double, 3>;

struct HierarchySolution {
  TimeGrid grid;
  std::vector<State3> E;  ///< (leader inventory, follower mean inventory, mean adjoint)
  std::vector<State3> F;  ///< H1^-1 E'
  Vector leader_rate;
  Vector follower_avg_rate;
};

namespace detail {

/// Second-order finite differences for v'' - P v' - Q v = forcing(t) with
/// Dirichlet data on components 0, 1 and homogeneous Neumann data on
/// component 2 at both ends.  Unknown (node k, component c) sits at 3k + c.
inline std::vector<State3> solve_mixed_bvp(const DenseMatrix& P, const DenseMatrix& Q,
                                           const std::function<State3(double)>& forcing,
                                           const std::array<double, 2>& start,
                                           const std::array<double, 2>& end,
                                           const TimeGrid& grid) {
  const std::size_t m = grid.steps();
  const std::size_t size = 3 * (m + 1);
  const double h = grid.h();
  const double ih2 = 1.0 / (h * h);
  const double i2h = 1.0 / (2.0 * h);
  BandMatrix a(size, 6, 6);
  Vector rhs(size, 0.0);

  for (std::size_t k = 1; k < m; ++k) {
    const State3 g = forcing(grid.t(k));
    for (std::size_t c = 0; c < 3; ++c) {
      const std::size_t row = 3 * k + c;
      a.at(row, row) += -2.0 * ih2;
      a.at(row, 3 * (k - 1) + c) += ih2;
      a.at(row, 3 * (k + 1) + c) += ih2;
      for (std::size_t d = 0; d < 3; ++d) {
        a.at(row, 3 * (k + 1) + d) -= P(c, d) * i2h;
        a.at(row, 3 * (k - 1) + d) += P(c, d) * i2h;
        a.at(row, 3 * k + d) -= Q(c, d);
      }
      rhs[row] = g[c];
    }
  }
  for (std::size_t c = 0; c < 2; ++c) {
    a.at(c, c) = 1.0;
    rhs[c] = start[c];
    a.at(3 * m + c, 3 * m + c) = 1.0;
    rhs[3 * m + c] = end[c];
  }
  a.at(2, 2) = -3.0 * i2h;
  a.at(2, 5) = 4.0 * i2h;
  a.at(2, 8) = -1.0 * i2h;
  a.at(3 * m + 2, 3 * m + 2) = 3.0 * i2h;
  a.at(3 * m + 2, 3 * (m - 1) + 2) = -4.0 * i2h;
  a.at(3 * m + 2, 3 * (m - 2) + 2) = 1.0 * i2h;

  Vector sol;
  try {
    sol = solve_banded(std::move(a), rhs);
  } catch (const SingularMatrixError&) {
    throw Error(ErrorCategory::kBvpUnsolvable, "BVP not solvable at this discretization");
  }
  std::vector<State3> out(m + 1);
  for (std::size_t k = 0; k <= m; ++k) out[k] = {sol[3 * k], sol[3 * k + 1], sol[3 * k + 2]};
  return out;
}

inline HierarchySolution finish_hierarchy(const HierarchyMatrices& hm, const TimeGrid& grid,
                                          std::vector<State3> e) {
  HierarchySolution s{grid, std::move(e), {}, {}, {}};
  std::array<Vector, 3> de;
  for (std::size_t c = 0; c < 3; ++c) {
    Vector comp(s.E.size());
    for (std::size_t k = 0; k < comp.size(); ++k) comp[k] = s.E[k][c];
    de[c] = differentiate(comp, grid.h());
  }
  s.F.resize(s.E.size());
  for (std::size_t k = 0; k < s.E.size(); ++k) {
    for (std::size_t c = 0; c < 3; ++c) s.F[k][c] = de[c][k] / hm.H1(c, c);
  }
  s.leader_rate = de[0];
  s.follower_avg_rate = de[1];
  return s;
}

}  // namespace detail

/// E'' = H1 H3 H1^-1 E' + H1 H2 E with E1(0) = q00, E1(T) = 0,
/// E2(0) = E2(T) = 0, E3'(0) = E3'(T) = 0.
inline HierarchySolution solve_hierarchy_bvp(const HierarchyGameSpec& spec) {
  const HierarchyGameSpec checked = validate_hierarchy(spec);
  const HierarchyMatrices hm = build_hierarchy_matrices(checked);
  const DenseMatrix h1_inv = inverse(hm.H1);
  const DenseMatrix P = hm.H1 * hm.H3 * h1_inv;
  const DenseMatrix Q = hm.H1 * hm.H2;
  const TimeGrid grid = checked.grid();
  auto e = detail::solve_mixed_bvp(
      P, Q, [](double) { return State3{0.0, 0.0, 0.0}; }, {checked.leader.q00, 0.0}, {0.0, 0.0},
      grid);
  return detail::finish_hierarchy(hm, grid, std::move(e));
}

/// Forcing of the translated system g'' = H3 g' + H2 H1 g + h(t).
inline State3 hierarchy_translation_forcing(const HierarchyGameSpec& spec,
                                            const HierarchyMatrices& hm, double t) {
  const double q = spec.leader.q00;
  const double T = spec.horizon_T;
  const double e1_scaled = 1.0 / hm.H1(0, 0);
  State3 h{};
  for (std::size_t c = 0; c < 3; ++c) {
    h[c] = -(q / T) * hm.H3(c, 0) * e1_scaled + q * (1.0 - t / T) * hm.H2(c, 0);
  }
  return h;
}

/// Same problem through g = H1^-1 (E - q00 (1 - t/T) e1), whose boundary data
/// are homogeneous.
inline HierarchySolution solve_hierarchy_translated(const HierarchyGameSpec& spec) {
  const HierarchyGameSpec checked = validate_hierarchy(spec);
  const HierarchyMatrices hm = build_hierarchy_matrices(checked);
  const TimeGrid grid = checked.grid();
  const DenseMatrix Q = hm.H2 * hm.H1;
  auto g = detail::solve_mixed_bvp(
      hm.H3, Q, [&](double t) { return hierarchy_translation_forcing(checked, hm, t); },
      {0.0, 0.0}, {0.0, 0.0}, grid);
  const double q = checked.leader.q00;
  const double T = checked.horizon_T;
  std::vector<State3> e(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (std::size_t c = 0; c < 3; ++c) e[k][c] = hm.H1(c, c) * g[k][c];
    e[k][0] += q * (1.0 - grid.t(k) / T);
  }
  return detail::finish_hierarchy(hm, grid, std::move(e));
}

struct HierarchyResiduals {
  double interior = 0.0;  ///< max |E'' - P E' - Q E| with fourth-order stencils
  double e1_start = 0.0;  ///< |E1(0) - q00|
  double e1_end = 0.0;
  double e2_start = 0.0;
  double e2_end = 0.0;
  double e3_slope_start = 0.0;  ///< |E3'(0)| by a third-order one-sided stencil
  double e3_slope_end = 0.0;
};

/// Measures how well a computed solution satisfies the continuous problem.
inline HierarchyResiduals hierarchy_residuals(const HierarchyGameSpec& spec,
                                              const HierarchySolution& sol) {
  const HierarchyMatrices hm = build_hierarchy_matrices(spec);
  const DenseMatrix P = hm.H1 * hm.H3 * inverse(hm.H1);
  const DenseMatrix Q = hm.H1 * hm.H2;
  const double h = sol.grid.h();
  const auto& e = sol.E;
  const std::size_t m = e.size() - 1;
  HierarchyResiduals r;
  for (std::size_t k = 2; k + 2 <= m; ++k) {
    State3 d1{};
    State3 d2{};
    for (std::size_t c = 0; c < 3; ++c) {
      d1[c] = (-e[k + 2][c] + 8.0 * e[k + 1][c] - 8.0 * e[k - 1][c] + e[k - 2][c]) / (12.0 * h);
      d2[c] = (-e[k + 2][c] + 16.0 * e[k + 1][c] - 30.0 * e[k][c] + 16.0 * e[k - 1][c] -
               e[k - 2][c]) /
              (12.0 * h * h);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      double res = d2[c];
      for (std::size_t d = 0; d < 3; ++d) res -= P(c, d) * d1[d] + Q(c, d) * e[k][d];
      r.interior = std::max(r.interior, std::abs(res));
    }
  }
  r.e1_start = std::abs(e[0][0] - spec.leader.q00);
  r.e1_end = std::abs(e[m][0]);
  r.e2_start = std::abs(e[0][1]);
  r.e2_end = std::abs(e[m][1]);
  r.e3_slope_start =
      std::abs(-11.0 * e[0][2] + 18.0 * e[1][2] - 9.0 * e[2][2] + 2.0 * e[3][2]) / (6.0 * h);
  r.e3_slope_end =
      std::abs(11.0 * e[m][2] - 18.0 * e[m - 1][2] + 9.0 * e[m - 2][2] - 2.0 * e[m - 3][2]) /
      (6.0 * h);
  return r;
}

struct CoercivityReport {
  double min_ratio = 0.0;
  std::size_t test_functions = 0;
};

/// Minimum of b(v, v) / ||v||_H^2 over a fixed family of admissible test
/// functions, where b(v, v) = int (|v'|^2 + v . H3 v' + v . H2H1 v) dt and
/// ||v||_H^2 = int (|v'|^2 + |v|^2) dt.  Components 0 and 1 use sine modes
/// (vanishing at both ends), component 2 cosine modes (zero slope at both
/// ends); single modes plus all pairwise sums and differences are tried.
inline CoercivityReport coercivity_probe(const DenseMatrix& H3, const DenseMatrix& H2H1,
                                         double horizon_T, std::size_t m_quad) {
  constexpr double kPi = 3.14159265358979323846;
  struct Mode {
    std::size_t component;
    int frequency;
    bool cosine;
  };
  std::vector<Mode> modes;
  for (std::size_t c = 0; c < 2; ++c)
    for (int j = 1; j <= 4; ++j) modes.push_back({c, j, false});
  for (int j = 0; j <= 4; ++j) modes.push_back({2, j, true});

  const std::size_t intervals = std::max<std::size_t>(2, m_quad + (m_quad % 2));
  const double h = horizon_T / static_cast<double>(intervals);

  auto eval = [&](const Mode& md, double t, double& value, double& slope) {
    const double w = md.frequency * kPi / horizon_T;
    if (md.cosine) {
      value = std::cos(w * t);
      slope = -w * std::sin(w * t);
    } else {
      value = std::sin(w * t);
      slope = w * std::cos(w * t);
    }
  };

  auto ratio = [&](const std::vector<std::pair<std::size_t, double>>& combo) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t q = 0; q <= intervals; ++q) {
      const double t = h * static_cast<double>(q);
      const double w = (q == 0 || q == intervals) ? 1.0 : (q % 2 == 1 ? 4.0 : 2.0);
      State3 v{};
      State3 dv{};
      for (const auto& [idx, coef] : combo) {
        double val = 0.0;
        double slope = 0.0;
        eval(modes[idx], t, val, slope);
        v[modes[idx].component] += coef * val;
        dv[modes[idx].component] += coef * slope;
      }
      double b = 0.0;
      double hn = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        b += dv[c] * dv[c];
        hn += dv[c] * dv[c] + v[c] * v[c];
        for (std::size_t d = 0; d < 3; ++d) b += v[c] * (H3(c, d) * dv[d] + H2H1(c, d) * v[d]);
      }
      num += w * b;
      den += w * hn;
    }
    return num / den;
  };

  CoercivityReport rep;
  rep.min_ratio = INFINITY;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    rep.min_ratio = std::min(rep.min_ratio, ratio({{i, 1.0}}));
    ++rep.test_functions;
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      rep.min_ratio = std::min(rep.min_ratio, ratio({{i, 1.0}, {j, 1.0}}));
      rep.min_ratio = std::min(rep.min_ratio, ratio({{i, 1.0}, {j, -1.0}}));
      rep.test_functions += 2;
    }
  }
  return rep;
}

inline CoercivityReport coercivity_probe(const HierarchyGameSpec& spec, std::size_t m_quad) {
  const HierarchyMatrices hm = build_hierarchy_matrices(validate_hierarchy(spec));
  return coercivity_probe(hm.H3, hm.H2 * hm.H1, spec.horizon_T, m_quad);
}

}  // namespace liqgame
