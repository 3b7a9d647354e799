#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "liqgame/numerics/dense_matrix.hpp"

namespace liqgame {

/// Trapezoid weight of node k on a uniform grid with `nodes` nodes.
inline double trapezoid_weight(std::size_t k, std::size_t nodes) {
  return (k == 0 || k + 1 == nodes) ? 0.5 : 1.0;
}

/// sqrt(h * sum_k w_k |v_k|^2) with trapezoid weights; `values[k]` may hold
/// several components per node.
inline double discrete_l2_norm(const std::vector<Vector>& values, double h) {
  double acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    double sq = 0.0;
    for (double v : values[k]) sq += v * v;
    acc += trapezoid_weight(k, values.size()) * sq;
  }
  return std::sqrt(h * acc);
}

inline double discrete_l2_norm(std::span<const double> values, double h) {
  double acc = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    acc += trapezoid_weight(k, values.size()) * values[k] * values[k];
  }
  return std::sqrt(h * acc);
}

/// Least-squares slope of log(y) against log(x); absent with fewer than two
/// usable (strictly positive) points.
inline std::optional<double> log_log_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

/// Central differences in the interior, second-order one-sided at both ends.
inline std::vector<double> differentiate(std::span<const double> v, double h) {
  const std::size_t n = v.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) {
    if (n == 2) d[0] = d[1] = (v[1] - v[0]) / h;
    return d;
  }
  d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
  return d;
}

}  // namespace liqgame
