#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "liqgame/numerics/dense_matrix.hpp"
#include "liqgame/numerics/time_grid.hpp"

namespace liqgame {

enum class Direction { kForward, kBackward };

/// Classical fixed-step RK4 on a uniform grid.  `f(t, y, dydt)` writes the
/// derivative into `dydt`.  In forward mode `y0` is the state at t = 0; in
/// backward mode it is the state at t = T.  Either way the result is indexed
/// by node, so `result[k]` is the state at `grid.t(k)`.
template <class Rhs>
std::vector<Vector> rk4_integrate(Rhs&& f, Vector y0, const TimeGrid& grid,
                                  Direction direction = Direction::kForward) {
  const std::size_t n = y0.size();
  const std::size_t steps = grid.steps();
  std::vector<Vector> out(grid.nodes());
  const bool forward = direction == Direction::kForward;
  const double h = forward ? grid.h() : -grid.h();
  Vector k1(n), k2(n), k3(n), k4(n), tmp(n);

  auto check = [&](const Vector& y, std::size_t node) {
    for (double v : y) {
      if (!std::isfinite(v)) {
        throw NonFiniteError("non-finite state at node " + std::to_string(node), node);
      }
    }
  };

  std::size_t node = forward ? 0 : steps;
  check(y0, node);
  out[node] = y0;
  Vector y = std::move(y0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = grid.t(node);
    f(t, std::span<const double>(y), std::span<double>(k1));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(t + 0.5 * h, std::span<const double>(tmp), std::span<double>(k2));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(t + 0.5 * h, std::span<const double>(tmp), std::span<double>(k3));
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    f(t + h, std::span<const double>(tmp), std::span<double>(k4));
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    node = forward ? node + 1 : node - 1;
    check(y, node);
    out[node] = y;
  }
  return out;
}

/// Flattens a matrix into a state vector (row-major) and back.
inline Vector flatten(const DenseMatrix& m) {
  return Vector(m.data().begin(), m.data().end());
}

inline DenseMatrix unflatten(std::span<const double> v, std::size_t rows, std::size_t cols) {
  return DenseMatrix(rows, cols, std::vector<double>(v.begin(), v.end()));
}

}  // namespace liqgame
