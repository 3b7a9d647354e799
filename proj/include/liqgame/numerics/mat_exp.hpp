#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "liqgame/numerics/dense_matrix.hpp"
#include "liqgame/numerics/linear_solve.hpp"

namespace liqgame {

namespace detail {

/// Parlett-Reinsch balancing by powers of two; returns the diagonal scaling d
/// such that the returned matrix equals diag(d)^-1 A diag(d).
inline DenseMatrix balance(const DenseMatrix& a, std::vector<double>& d) {
  const std::size_t n = a.rows();
  DenseMatrix b = a;
  d.assign(n, 1.0);
  constexpr double kRadix = 2.0;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(b(j, i));
        r += std::abs(b(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double g = r / kRadix;
      while (c < g) {
        f *= kRadix;
        c *= kRadix * kRadix;
      }
      g = r * kRadix;
      while (c >= g) {
        f /= kRadix;
        c /= kRadix * kRadix;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        d[i] *= f;
        for (std::size_t j = 0; j < n; ++j) b(i, j) /= f;
        for (std::size_t j = 0; j < n; ++j) b(j, i) *= f;
      }
    }
  }
  return b;
}

inline DenseMatrix add_scaled_identity(DenseMatrix m, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += s;
  return m;
}

/// Diagonal Padé approximant r_m(A) = (V - U)^-1 (V + U) for m in {3,5,7,9}.
inline DenseMatrix pade_low(const DenseMatrix& a, int m) {
  static constexpr std::array<double, 4> b3{120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr std::array<double, 8> b7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                            25200.0,    1512.0,    56.0,      1.0};
  static constexpr std::array<double, 10> b9{17643225600.0, 8821612800.0, 2075673600.0,
                                             302702400.0,   30270240.0,   2162160.0,
                                             110880.0,      3960.0,       90.0,
                                             1.0};
  const double* b = m == 3 ? b3.data() : m == 5 ? b5.data() : m == 7 ? b7.data() : b9.data();
  const std::size_t n = a.rows();
  const DenseMatrix a2 = a * a;
  DenseMatrix power = DenseMatrix::identity(n);
  DenseMatrix u_inner(n, n);
  DenseMatrix v(n, n);
  for (int k = 0; k <= m; k += 2) {
    if (k > 0) power = power * a2;
    u_inner += power * b[k + 1];
    v += power * b[k];
  }
  const DenseMatrix u = a * u_inner;
  return solve_dense(v - u, v + u);
}

inline DenseMatrix pade13(const DenseMatrix& a) {
  static constexpr std::array<double, 14> b{
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  const std::size_t n = a.rows();
  const DenseMatrix id = DenseMatrix::identity(n);
  const DenseMatrix a2 = a * a;
  const DenseMatrix a4 = a2 * a2;
  const DenseMatrix a6 = a4 * a2;
  const DenseMatrix u_hi = a6 * b[13] + a4 * b[11] + a2 * b[9];
  const DenseMatrix u = a * (a6 * u_hi + a6 * b[7] + a4 * b[5] + a2 * b[3] + id * b[1]);
  const DenseMatrix v_hi = a6 * b[12] + a4 * b[10] + a2 * b[8];
  const DenseMatrix v = a6 * v_hi + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
  return solve_dense(v - u, v + u);
}

}  // namespace detail

/// Matrix exponential by balancing followed by scaling and squaring of a
/// diagonal Padé approximant of degree 3 to 13, chosen from the one-norm.
inline DenseMatrix mat_exp(const DenseMatrix& a) {
  if (!a.is_square()) {
    throw Error(ErrorCategory::kInvalidArgument, "mat_exp needs a square matrix");
  }
  if (!a.all_finite()) {
    throw Error(ErrorCategory::kNonFinite, "mat_exp input has non-finite entries");
  }
  const std::size_t n = a.rows();
  if (n == 0) return a;
  if (a.max_abs() == 0.0) return DenseMatrix::identity(n);

  std::vector<double> d;
  DenseMatrix b = detail::balance(a, d);

  // Shift by the mean diagonal: exp(A) = e^mu exp(A - mu I).
  double mu = 0.0;
  for (std::size_t i = 0; i < n; ++i) mu += b(i, i);
  mu /= static_cast<double>(n);
  b = detail::add_scaled_identity(std::move(b), -mu);

  static constexpr std::array<std::pair<int, double>, 4> kLowDegree{
      {{3, 1.495585217958292e-2},
       {5, 2.539398330063230e-1},
       {7, 9.504178996162932e-1},
       {9, 2.097847961257068e0}}};
  constexpr double kTheta13 = 5.371920351148152e0;

  const double norm = b.norm_one();
  DenseMatrix e;
  bool done = false;
  for (const auto& [m, theta] : kLowDegree) {
    if (norm <= theta) {
      e = detail::pade_low(b, m);
      done = true;
      break;
    }
  }
  if (!done) {
    int s = 0;
    if (norm > kTheta13) s = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
    const DenseMatrix scaled = b * std::ldexp(1.0, -s);
    e = detail::pade13(scaled);
    for (int k = 0; k < s; ++k) e = e * e;
  }

  const double shift = std::exp(mu);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) e(i, j) *= shift * d[i] / d[j];
  if (!e.all_finite()) {
    throw Error(ErrorCategory::kNonFinite, "mat_exp result overflowed");
  }
  return e;
}

}  // namespace liqgame
