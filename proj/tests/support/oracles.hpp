#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "liqgame/unconstrained_nash.hpp"

namespace liqgame::testing {

/// Relative residual of G' = Sigma - C G - G K^-1 G at every interior node.
/// G' is a five-point central difference of the closed form evaluated at
/// t_k +- j delta_k, with delta_k shrinking toward T so that the stencil
/// resolves the boundary layer left by a large terminal penalty.
inline double riccati_residual(const ImpactMatrices& im, const std::vector<DenseMatrix>& G,
                               const TimeGrid& grid) {
  const RiccatiEvaluator eval(im, grid.t_end());
  const std::size_t n = im.players();
  DenseMatrix kinv(n, n);
  for (std::size_t i = 0; i < n; ++i) kinv(i, i) = im.k_inv(i);
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < grid.nodes(); ++k) {
    const double t = grid.t(k);
    const double delta = 1e-3 * std::min(grid.t_end() - t, grid.t_end());
    const DenseMatrix dg = (eval(t - 2.0 * delta).G - eval(t - delta).G * 8.0 +
                            eval(t + delta).G * 8.0 - eval(t + 2.0 * delta).G) *
                           (1.0 / (12.0 * delta));
    const DenseMatrix cg = im.C * G[k];
    const DenseMatrix gkg = G[k] * kinv * G[k];
    const DenseMatrix res = dg - (im.Sigma - cg - gkg);
    const double scale = im.Sigma.norm_inf() + cg.norm_inf() + gkg.norm_inf();
    worst = std::max(worst, res.norm_inf() / scale);
  }
  return worst;
}

/// max over interior nodes t_k <= t_max of
/// |central difference of x + (C x - Sigma q + mu)|.
inline double backward_residual(const ImpactMatrices& im, const EquilibriumTrajectory& tr,
                                double t_max = INFINITY) {
  const std::size_t n = im.players();
  const double h = tr.grid.h();
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < tr.q.size() && tr.grid.t(k) <= t_max; ++k) {
    const Vector cx = multiply(im.C, tr.x[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = (tr.x[k + 1][i] - tr.x[k - 1][i]) / (2.0 * h);
      const double r = dx + cx[i] - im.Sigma(i, i) * tr.q[k][i] + im.mu[i];
      worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

/// Largest absolute difference over nodes and players.
inline double sup_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) d = std::max(d, std::abs(a[k][i] - b[k][i]));
  return d;
}

inline double sup_distance(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace liqgame::testing
