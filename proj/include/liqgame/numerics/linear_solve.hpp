#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liqgame/numerics/dense_matrix.hpp"

namespace liqgame {

inline constexpr double kSingularPivotTolerance = 1e-14;

/// LU factorisation with partial (row) pivoting, PA = LU.
class LuFactorization {
 public:
  /// Throws SingularMatrixError when a pivot falls below
  /// `relative_tolerance * ||A||_inf`.
  explicit LuFactorization(DenseMatrix a, double relative_tolerance = kSingularPivotTolerance)
      : lu_(std::move(a)) {
    if (!lu_.is_square()) {
      throw Error(ErrorCategory::kInvalidArgument, "LU factorisation needs a square matrix");
    }
    if (!lu_.all_finite()) {
      throw Error(ErrorCategory::kNonFinite, "LU factorisation input has non-finite entries");
    }
    const std::size_t n = lu_.rows();
    norm_ = lu_.norm_inf();
    perm_.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    min_pivot_ = n == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    const double threshold = relative_tolerance * norm_;

    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      }
      if (!(best > threshold) || best == 0.0) {
        throw SingularMatrixError("matrix is singular to working precision (pivot " +
                                      std::to_string(k) + ")",
                                  k);
      }
      min_pivot_ = std::min(min_pivot_, best);
      if (p != k) {
        std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
        std::swap(perm_[k], perm_[p]);
      }
      const double pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double l = lu_(i, k) / pivot;
        lu_(i, k) = l;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= l * lu_(k, j);
      }
    }
  }

  std::size_t size() const noexcept { return lu_.rows(); }
  double min_abs_pivot() const noexcept { return min_pivot_; }

  /// Sign of the determinant of the factored matrix.
  int determinant_sign() const noexcept {
    int sign = 1;
    std::vector<std::size_t> p = perm_;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (lu_(i, i) < 0.0) sign = -sign;
      while (p[i] != i) {
        std::swap(p[i], p[p[i]]);
        sign = -sign;
      }
    }
    return sign;
  }
  double input_norm_inf() const noexcept { return norm_; }

  Vector solve(std::span<const double> b) const {
    const std::size_t n = size();
    if (b.size() != n) {
      throw Error(ErrorCategory::kInvalidArgument, "right-hand side length mismatch");
    }
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
      double s = x[i];
      for (std::size_t j = 0; j < i; ++j) s -= lu_(i, j) * x[j];
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) s -= lu_(i, j) * x[j];
      x[i] = s / lu_(i, i);
    }
    return x;
  }

  DenseMatrix solve(const DenseMatrix& b) const {
    if (b.rows() != size()) {
      throw Error(ErrorCategory::kInvalidArgument, "right-hand side row count mismatch");
    }
    DenseMatrix x(b.rows(), b.cols());
    Vector col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
      for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
      const Vector s = solve(col);
      for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = s[i];
    }
    return x;
  }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
  double norm_ = 0.0;
  double min_pivot_ = 0.0;
};

inline Vector solve_dense(const DenseMatrix& a, std::span<const double> b) {
  return LuFactorization(a).solve(b);
}

inline DenseMatrix solve_dense(const DenseMatrix& a, const DenseMatrix& b) {
  return LuFactorization(a).solve(b);
}

inline DenseMatrix inverse(const DenseMatrix& a) {
  return LuFactorization(a).solve(DenseMatrix::identity(a.rows()));
}

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
/// Storage reserves `lower` extra super-diagonals for pivoting fill-in.
class BandMatrix {
 public:
  BandMatrix(std::size_t n, std::size_t lower, std::size_t upper)
      : n_(n), kl_(lower), ku_(upper), ld_(2 * lower + upper + 1), data_(ld_ * n, 0.0) {
    if (n == 0) throw Error(ErrorCategory::kInvalidArgument, "band matrix must be non-empty");
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t lower() const noexcept { return kl_; }
  std::size_t upper() const noexcept { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return i < n_ && j < n_ && i <= j + kl_ && j <= i + ku_;
  }

  double& at(std::size_t i, std::size_t j) {
    if (!in_band(i, j)) {
      throw Error(ErrorCategory::kInvalidArgument,
                  "entry (" + std::to_string(i) + "," + std::to_string(j) + ") outside band");
    }
    return raw(i, j);
  }

  double get(std::size_t i, std::size_t j) const {
    return in_band(i, j) ? data_[(kl_ + ku_ + i - j) + j * ld_] : 0.0;
  }

  double norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      const std::size_t j0 = i > kl_ ? i - kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + ku_);
      for (std::size_t j = j0; j <= j1; ++j) s += std::abs(get(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  Vector multiply(std::span<const double> x) const {
    Vector y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i > kl_ ? i - kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + ku_);
      for (std::size_t j = j0; j <= j1; ++j) y[i] += get(i, j) * x[j];
    }
    return y;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) d(i, j) = get(i, j);
    return d;
  }

 private:
  friend Vector solve_banded(BandMatrix a, std::span<const double> b);

  double& raw(std::size_t i, std::size_t j) { return data_[(kl_ + ku_ + i - j) + j * ld_]; }

  std::size_t n_;
  std::size_t kl_;
  std::size_t ku_;
  std::size_t ld_;
  std::vector<double> data_;
};

/// Banded Gaussian elimination with partial pivoting; O(n (kl + ku) kl) work.
inline Vector solve_banded(BandMatrix a, std::span<const double> b) {
  const std::size_t n = a.n_;
  const std::size_t kl = a.kl_;
  const std::size_t kv = a.kl_ + a.ku_;
  if (b.size() != n) {
    throw Error(ErrorCategory::kInvalidArgument, "right-hand side length mismatch");
  }
  for (double v : a.data_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCategory::kNonFinite, "banded system has non-finite entries");
    }
  }
  const double threshold = kSingularPivotTolerance * a.norm_inf();
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a.raw(i, j); };

  std::vector<std::size_t> piv(n);
  std::size_t ju = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t km = std::min(kl, n - 1 - j);
    std::size_t p = 0;
    double best = std::abs(at(j, j));
    for (std::size_t r = 1; r <= km; ++r) {
      if (std::abs(at(j + r, j)) > best) {
        best = std::abs(at(j + r, j));
        p = r;
      }
    }
    if (!(best > threshold) || best == 0.0) {
      throw SingularMatrixError(
          "banded system is singular to working precision (pivot " + std::to_string(j) + ")", j);
    }
    piv[j] = j + p;
    ju = std::max(ju, std::min(j + a.ku_ + p, n - 1));
    if (p != 0) {
      for (std::size_t c = j; c <= ju; ++c) std::swap(at(j, c), at(j + p, c));
    }
    const double pivot = at(j, j);
    for (std::size_t r = 1; r <= km; ++r) at(j + r, j) /= pivot;
    for (std::size_t c = j + 1; c <= ju; ++c) {
      const double u = at(j, c);
      if (u == 0.0) continue;
      for (std::size_t r = 1; r <= km; ++r) at(j + r, c) -= at(j + r, j) * u;
    }
  }

  Vector x(b.begin(), b.end());
  for (std::size_t j = 0; j < n; ++j) {
    if (piv[j] != j) std::swap(x[j], x[piv[j]]);
    const std::size_t km = std::min(kl, n - 1 - j);
    for (std::size_t r = 1; r <= km; ++r) x[j + r] -= at(j + r, j) * x[j];
  }
  for (std::size_t j = n; j-- > 0;) {
    x[j] /= at(j, j);
    const std::size_t i0 = j > kv ? j - kv : 0;
    for (std::size_t i = i0; i < j; ++i) x[i] -= at(i, j) * x[j];
  }
  return x;
}

}  // namespace liqgame
