#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "liqgame/market_model.hpp"
#include "liqgame/numerics/dense_matrix.hpp"
#include "liqgame/numerics/linear_solve.hpp"
#include "liqgame/numerics/mat_exp.hpp"
#include "liqgame/numerics/rk4.hpp"
#include "liqgame/numerics/time_grid.hpp"

namespace liqgame {

/// Coefficients of the deterministic forward-backward system
///   q' = K^-1 x,  -x' = C x - Sigma q + mu,  with x = K nu.
struct ImpactMatrices {
  DenseMatrix K;
  DenseMatrix C;
  DenseMatrix Sigma;
  DenseMatrix D;
  Vector mu;
  DenseMatrix B;  ///< [[0, K^-1], [Sigma, -C]]

  std::size_t players() const noexcept { return K.rows(); }
  double k_inv(std::size_t i) const { return 1.0 / K(i, i); }
};

inline ImpactMatrices build_impact_matrices(const GameSpec& spec) {
  const std::size_t n = spec.size();
  const double nd = static_cast<double>(n);
  ImpactMatrices im{DenseMatrix(n, n), DenseMatrix(n, n), DenseMatrix(n, n),
                    DenseMatrix(n, n), Vector(n),         DenseMatrix(2 * n, 2 * n)};
  for (std::size_t i = 0; i < n; ++i) {
    const PlayerParams& p = spec.players[i];
    im.K(i, i) = 2.0 * p.kappa;
    im.Sigma(i, i) = 2.0 * p.lambda;
    im.D(i, i) = 2.0 * p.terminal_penalty_A - p.alpha / nd;
    im.mu[i] = p.mu;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) im.C(i, j) = p.alpha / (2.0 * nd * spec.players[j].kappa);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    im.B(i, n + i) = 1.0 / im.K(i, i);
    for (std::size_t j = 0; j < n; ++j) {
      im.B(n + i, j) = im.Sigma(i, j);
      im.B(n + i, n + j) = -im.C(i, j);
    }
  }
  return im;
}

/// Evaluates Y(t) = exp(-(T - t) B) [I; -D] and G(t) = Y2(t) Y1(t)^-1 at any t.
class RiccatiEvaluator {
 public:
  /// Pivots of Y1 below this fraction of its norm count as a blow-up.
  static constexpr double kBlowUpTolerance = 1e-12;

  RiccatiEvaluator(ImpactMatrices im, double horizon_T)
      : im_(std::move(im)), horizon_(horizon_T) {}

  struct Value {
    DenseMatrix Y1;
    DenseMatrix G;
    double pivot_ratio;
    int det_sign;  ///< sign of det Y1; Y1(T) = I so a flip marks a pole
  };

  Value operator()(double t) const {
    const std::size_t n = im_.players();
    const DenseMatrix phi = mat_exp(im_.B * (-(horizon_ - t)));
    const DenseMatrix y1 = phi.block(0, 0, n, n) - phi.block(0, n, n, n) * im_.D;
    const DenseMatrix y2 = phi.block(n, 0, n, n) - phi.block(n, n, n, n) * im_.D;
    try {
      // G Y1 = Y2  <=>  Y1^T G^T = Y2^T.
      const LuFactorization lu(y1.transpose(), kBlowUpTolerance);
      return {y1, lu.solve(y2.transpose()).transpose(),
              lu.min_abs_pivot() / lu.input_norm_inf(), lu.determinant_sign()};
    } catch (const SingularMatrixError&) {
      throw Error(ErrorCategory::kRiccatiBlowUp,
                  "Riccati blow-up: Y1 singular at t=" + std::to_string(t));
    }
  }

  const ImpactMatrices& matrices() const noexcept { return im_; }
  double horizon() const noexcept { return horizon_; }

 private:
  ImpactMatrices im_;
  double horizon_;
};

struct RiccatiSolution {
  TimeGrid grid;
  std::vector<DenseMatrix> G;
  std::vector<DenseMatrix> Y1;
  double min_pivot_ratio = 0.0;  ///< smallest Y1 pivot relative to its norm
};

inline RiccatiSolution solve_riccati(const ImpactMatrices& im, const TimeGrid& grid) {
  const RiccatiEvaluator eval(im, grid.t_end());
  RiccatiSolution sol{grid, std::vector<DenseMatrix>(grid.nodes()),
                      std::vector<DenseMatrix>(grid.nodes()),
                      std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    RiccatiEvaluator::Value v;
    try {
      v = eval(grid.t(k));
    } catch (const Error& e) {
      if (e.category() != ErrorCategory::kRiccatiBlowUp) throw;
      throw Error(ErrorCategory::kRiccatiBlowUp,
                  "Riccati blow-up: Y1 singular at node " + std::to_string(k) +
                      " (t=" + std::to_string(grid.t(k)) + ")");
    }
    if (v.det_sign != 1) {
      // det Y1 is continuous and equals 1 at T, so it vanished in (t_k, T].
      throw Error(ErrorCategory::kRiccatiBlowUp,
                  "Riccati blow-up: det Y1 changes sign after node " + std::to_string(k) +
                      " (t=" + std::to_string(grid.t(k)) + ")");
    }
    sol.G[k] = std::move(v.G);
    sol.Y1[k] = std::move(v.Y1);
    sol.min_pivot_ratio = std::min(sol.min_pivot_ratio, v.pivot_ratio);
  }
  return sol;
}

/// Feedback objects of the semi-explicit representation:
///   Pi' = -Pi K^-1 G, Pi(0) = I;  Psi' = Psi (G K^-1 + C), Psi(0) = I;
///   g0(t) = Psi(t)^-1 int_t^T Psi(u) mu du.
struct RiccatiPath {
  TimeGrid grid;
  std::vector<DenseMatrix> G;
  std::vector<DenseMatrix> Pi;
  std::vector<DenseMatrix> Psi;
  std::vector<Vector> g0;
};

namespace detail {

/// Trapezoid tail integral of Psi mu followed by a solve with Psi per node.
/// g0(t_k) = Psi(t_k)^-1 sum_{j >= k} I_j, where I_j is the integral of
/// Psi mu over [t_j, t_{j+1}].
inline std::vector<Vector> g0_from_segments(const std::vector<DenseMatrix>& psi,
                                            const std::vector<Vector>& segments) {
  const std::size_t nodes = psi.size();
  const std::size_t n = psi.front().rows();
  std::vector<Vector> g0(nodes, Vector(n, 0.0));
  Vector tail(n, 0.0);
  for (std::size_t k = nodes - 1; k-- > 0;) {
    for (std::size_t i = 0; i < n; ++i) tail[i] += segments[k][i];
    try {
      g0[k] = solve_dense(psi[k], tail);
    } catch (const SingularMatrixError&) {
      throw Error(ErrorCategory::kSingularMatrix, "Psi singular at node " + std::to_string(k));
    }
  }
  return g0;
}

/// As g0_from_segments with trapezoid segment integrals.
inline std::vector<Vector> g0_from_psi(const std::vector<DenseMatrix>& psi, const Vector& mu,
                                       const TimeGrid& grid) {
  const std::size_t nodes = grid.nodes();
  if (norm_inf(mu) == 0.0) return std::vector<Vector>(nodes, Vector(mu.size(), 0.0));
  std::vector<Vector> segments(nodes - 1);
  for (std::size_t k = 0; k + 1 < nodes; ++k) {
    segments[k] = axpy(1.0, multiply(psi[k + 1], mu), multiply(psi[k], mu));
    for (double& v : segments[k]) v *= 0.5 * grid.h();
  }
  return g0_from_segments(psi, segments);
}

}  // namespace detail

/// Pi and Psi from the transition identities
///   Pi(t) = Y1(0) Y1(t)^-1,
///   [Psi(t) (-G(t)), Psi(t)] = [-G(0), I] exp(-t B),
/// which solve the feedback ODEs exactly, including across the stiff
/// boundary layer at t = T produced by a large terminal penalty.
inline RiccatiPath integrate_feedback(const ImpactMatrices& im, const RiccatiSolution& riccati) {
  const TimeGrid& grid = riccati.grid;
  const std::size_t n = im.players();
  const std::size_t nodes = grid.nodes();
  RiccatiPath path{grid, riccati.G, std::vector<DenseMatrix>(nodes),
                   std::vector<DenseMatrix>(nodes), {}};
  const DenseMatrix y1_0t = riccati.Y1[0].transpose();
  const DenseMatrix minus_g0 = -riccati.G[0];
  const bool drift = norm_inf(im.mu) != 0.0;
  // v = int_0^h exp(-s B) ds (0, mu), the top-right block of an augmented
  // exponential, so that the integral of Psi mu over [t_k, t_k + h] is
  // [-G(0), I] exp(-t_k B) v without quadrature error inside the layer.
  Vector v(2 * n, 0.0);
  if (drift) {
    DenseMatrix aug(4 * n, 4 * n);
    aug.set_block(0, 0, im.B * (-grid.h()));
    aug.set_block(0, 2 * n, DenseMatrix::identity(2 * n) * grid.h());
    const DenseMatrix j = mat_exp(aug).block(0, 2 * n, 2 * n, 2 * n);
    Vector lifted(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) lifted[n + i] = im.mu[i];
    v = multiply(j, lifted);
  }
  std::vector<Vector> segments(nodes - 1);
  for (std::size_t k = 0; k < nodes; ++k) {
    const DenseMatrix e =
        k == 0 ? DenseMatrix::identity(2 * n) : mat_exp(im.B * (-grid.t(k)));
    if (k == 0) {
      path.Pi[k] = DenseMatrix::identity(n);
      path.Psi[k] = DenseMatrix::identity(n);
    } else {
      // Pi Y1(t) = Y1(0)  <=>  Y1(t)^T Pi^T = Y1(0)^T.
      path.Pi[k] = solve_dense(riccati.Y1[k].transpose(), y1_0t).transpose();
      path.Psi[k] = minus_g0 * e.block(0, n, n, n) + e.block(n, n, n, n);
    }
    if (drift && k + 1 < nodes) {
      const Vector ev = multiply(e, v);
      const Vector top(ev.begin(), ev.begin() + static_cast<long>(n));
      segments[k] = multiply(minus_g0, top);
      for (std::size_t i = 0; i < n; ++i) segments[k][i] += ev[n + i];
    }
  }
  path.g0 = drift ? detail::g0_from_segments(path.Psi, segments)
                  : std::vector<Vector>(nodes, Vector(n, 0.0));
  return path;
}

/// Pi and Psi by RK4 on the grid, with G supplied as a function of time.
/// Accurate only when h |K^-1 G| stays well below one on the whole grid.
inline RiccatiPath integrate_feedback_rk4(const ImpactMatrices& im,
                                          const std::function<DenseMatrix(double)>& G,
                                          const TimeGrid& grid) {
  const std::size_t n = im.players();
  const std::size_t nn = n * n;
  Vector kinv(n);
  for (std::size_t i = 0; i < n; ++i) kinv[i] = im.k_inv(i);
  auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
    const DenseMatrix g = G(t);
    const DenseMatrix pi = unflatten(y.subspan(0, nn), n, n);
    const DenseMatrix psi = unflatten(y.subspan(nn, nn), n, n);
    DenseMatrix kg = g;
    DenseMatrix gk = g;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        kg(i, j) *= kinv[i];
        gk(i, j) *= kinv[j];
      }
    const DenseMatrix dpi = -(pi * kg);
    const DenseMatrix dpsi = psi * (gk + im.C);
    std::copy(dpi.data().begin(), dpi.data().end(), dy.begin());
    std::copy(dpsi.data().begin(), dpsi.data().end(), dy.begin() + static_cast<long>(nn));
  };
  Vector y0 = flatten(DenseMatrix::identity(n));
  y0.insert(y0.end(), y0.begin(), y0.end());
  const std::vector<Vector> states = rk4_integrate(rhs, y0, grid, Direction::kForward);
  RiccatiPath path{grid, {}, {}, {}, {}};
  for (std::size_t k = 0; k < grid.nodes(); ++k) {
    const std::span<const double> s(states[k]);
    path.G.push_back(G(grid.t(k)));
    path.Pi.push_back(unflatten(s.subspan(0, nn), n, n));
    path.Psi.push_back(unflatten(s.subspan(nn, nn), n, n));
  }
  path.g0 = detail::g0_from_psi(path.Psi, im.mu, grid);
  return path;
}

struct EquilibriumTrajectory {
  TimeGrid grid;
  std::vector<Vector> q;   ///< inventories per node
  std::vector<Vector> nu;  ///< trading rates per node
  std::vector<Vector> x;   ///< co-states 2 kappa nu per node
  Vector avg_q;
  Vector avg_nu;

  std::size_t players() const noexcept { return q.empty() ? 0 : q.front().size(); }

  Vector player_series(const std::vector<Vector>& field, std::size_t i) const {
    Vector s(field.size());
    for (std::size_t k = 0; k < field.size(); ++k) s[k] = field[k][i];
    return s;
  }
};

/// Fills nu, x and the population averages from q and x.
inline EquilibriumTrajectory make_trajectory(const ImpactMatrices& im, const TimeGrid& grid,
                                             std::vector<Vector> q, std::vector<Vector> x) {
  const std::size_t n = im.players();
  EquilibriumTrajectory tr{grid, std::move(q), {}, std::move(x), {}, {}};
  tr.nu.resize(tr.q.size());
  tr.avg_q.resize(tr.q.size());
  tr.avg_nu.resize(tr.q.size());
  for (std::size_t k = 0; k < tr.q.size(); ++k) {
    tr.nu[k].resize(n);
    double sq = 0.0;
    double sn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tr.nu[k][i] = tr.x[k][i] / im.K(i, i);
      sq += tr.q[k][i];
      sn += tr.nu[k][i];
    }
    tr.avg_q[k] = sq / static_cast<double>(n);
    tr.avg_nu[k] = sn / static_cast<double>(n);
  }
  return tr;
}

/// q(t) = Pi(t)^-1 (q0 + int_0^t Pi K^-1 g0),  nu = K^-1 g0 + K^-1 G q.
inline EquilibriumTrajectory equilibrium_from_feedback(const ImpactMatrices& im,
                                                       const RiccatiPath& path,
                                                       const Vector& q0) {
  const std::size_t n = im.players();
  const std::size_t nodes = path.grid.nodes();
  const double h = path.grid.h();
  std::vector<Vector> q(nodes);
  std::vector<Vector> x(nodes);
  Vector acc = q0;
  Vector prev(n);
  for (std::size_t k = 0; k < nodes; ++k) {
    Vector kg0(n);
    for (std::size_t i = 0; i < n; ++i) kg0[i] = im.k_inv(i) * path.g0[k][i];
    const Vector cur = multiply(path.Pi[k], kg0);
    if (k > 0) {
      for (std::size_t i = 0; i < n; ++i) acc[i] += 0.5 * h * (cur[i] + prev[i]);
    }
    prev = cur;
    q[k] = k == 0 ? q0 : solve_dense(path.Pi[k], acc);
    const Vector gq = multiply(path.G[k], q[k]);
    x[k].resize(n);
    for (std::size_t i = 0; i < n; ++i) x[k][i] = path.g0[k][i] + gq[i];
  }
  return make_trajectory(im, path.grid, std::move(q), std::move(x));
}

inline Vector initial_inventories(const GameSpec& spec) {
  Vector q0;
  for (const PlayerParams& p : spec.players) q0.push_back(p.q0);
  return q0;
}

struct UnconstrainedSolution {
  RiccatiPath path;
  EquilibriumTrajectory trajectory;
  double min_pivot_ratio = 0.0;
};

inline UnconstrainedSolution solve_unconstrained_detailed(const GameSpec& spec) {
  const GameSpec checked = validate_game(spec);
  const ImpactMatrices im = build_impact_matrices(checked);
  const RiccatiSolution riccati = solve_riccati(im, checked.grid());
  RiccatiPath path = integrate_feedback(im, riccati);
  EquilibriumTrajectory tr = equilibrium_from_feedback(im, path, initial_inventories(checked));
  return {std::move(path), std::move(tr), riccati.min_pivot_ratio};
}

inline EquilibriumTrajectory solve_unconstrained(const GameSpec& spec) {
  return solve_unconstrained_detailed(spec).trajectory;
}

/// Characteristic roots r+- = m +- theta of a homogeneous average dynamics.
struct CharacteristicRoots {
  double m = 0.0;
  double theta = 0.0;
  double r_plus() const noexcept { return m + theta; }
  double r_minus() const noexcept { return m - theta; }
};

/// Finite population: theta_N = sqrt(alpha^2 (1-1/N)^2 + 16 lambda kappa) / (4 kappa).
inline CharacteristicRoots homogeneous_roots(const PlayerParams& p, std::size_t n) {
  const double f = 1.0 - 1.0 / static_cast<double>(n);
  return {-p.alpha * f / (4.0 * p.kappa),
          std::sqrt(p.alpha * p.alpha * f * f + 16.0 * p.lambda * p.kappa) / (4.0 * p.kappa)};
}

/// Mean-field limit: theta = sqrt(kappa lambda + alpha^2/16) / kappa.
inline CharacteristicRoots mfg_roots(const PlayerParams& p) {
  return {-p.alpha / (4.0 * p.kappa),
          std::sqrt(p.kappa * p.lambda + p.alpha * p.alpha / 16.0) / p.kappa};
}

namespace detail {

/// sinh(x)/x, continuous at zero.
inline double sinhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
  return std::sinh(x) / x;
}

/// y(s) = -(r- + c) e^{-r+ s}/(2 theta) + (r+ + c) e^{-r- s}/(2 theta), with
/// s = T - t, written as e^{-m s} [(m + c) s sinhc(theta s) + cosh(theta s)].
inline double penalised_profile(const CharacteristicRoots& r, double c, double s) {
  return std::exp(-r.m * s) *
         ((r.m + c) * s * sinhc(r.theta * s) + std::cosh(r.theta * s));
}

inline Vector normalised_profile(const CharacteristicRoots& r, double c, double e0,
                                 const TimeGrid& grid) {
  const double T = grid.t_end();
  const double y0 = penalised_profile(r, c, T);
  if (y0 == 0.0 || !std::isfinite(y0)) {
    throw Error(ErrorCategory::kDegenerate, "degenerate average profile: y(0) = 0");
  }
  Vector e(grid.nodes());
  for (std::size_t k = 0; k < e.size(); ++k) {
    e[k] = e0 * penalised_profile(r, c, T - grid.t(k)) / y0;
  }
  return e;
}

inline void require_driftless(const PlayerParams& p) {
  if (p.mu != 0.0) {
    throw Error(ErrorCategory::kInvalidArgument, "homogeneous closed forms need mu = 0");
  }
  if (!(p.kappa > 0.0)) {
    throw Error(ErrorCategory::kInvalidArgument, "kappa must be positive");
  }
}

}  // namespace detail

/// Average inventory of N identical players, E_N(t) = E0 y_N(t) / y_N(0).
inline Vector homogeneous_average(const PlayerParams& params, std::size_t n, double e0,
                                  const TimeGrid& grid) {
  detail::require_driftless(params);
  if (n == 0) throw Error(ErrorCategory::kInvalidArgument, "population size must be positive");
  const double c =
      (params.terminal_penalty_A - params.alpha / (2.0 * static_cast<double>(n))) / params.kappa;
  return detail::normalised_profile(homogeneous_roots(params, n), c, e0, grid);
}

/// Mean-field average inventory E(t) = E0 y(t) / y(0).
inline Vector mfg_benchmark(const PlayerParams& params, double e0, const TimeGrid& grid) {
  detail::require_driftless(params);
  return detail::normalised_profile(mfg_roots(params), params.terminal_penalty_A / params.kappa,
                                    e0, grid);
}

}  // namespace liqgame
