#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "anibes/jordan.hpp"
#include "anibes/matrix.hpp"

namespace anibes {

/// Finite exponential series sum_{k} N^k / k! of a nilpotent matrix.
/// Terms are accumulated until N^k vanishes (at most d of them).
inline Matrix nilpotent_exp(const Matrix& n) {
  const int d = static_cast<int>(n.rows());
  Matrix sum = Matrix::Identity(d, d);
  Matrix term = Matrix::Identity(d, d);
  for (int k = 1; k < d; ++k) {
    term = term * n / double(k);
    sum += term;
  }
  return sum;
}

/// Logarithm of a unipotent matrix U via the power series
/// sum_{n>=1} (-1)^{n+1} (U-I)^n / n, which terminates because U-I is
/// nilpotent. Raises NotUnipotent when (U-I)^d fails the nilpotency check.
inline Matrix nilpotent_log(const Matrix& u) {
  require_square_finite(u, "nilpotent_log");
  const int d = static_cast<int>(u.rows());
  const Matrix y = u - Matrix::Identity(d, d);
  Matrix p = y;
  for (int k = 1; k < d; ++k) p = p * y;  // p = y^d
  const double scale = std::max(1.0, std::pow(y.cwiseAbs().maxCoeff(), double(d)));
  if (p.cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw NotUnipotent("nilpotent_log: (U - I)^d is not numerically zero");

  Matrix sum = Matrix::Zero(d, d);
  Matrix term = Matrix::Identity(d, d);
  for (int n = 1; n <= d - 1; ++n) {
    term = term * y;
    sum += ((n % 2 == 1) ? 1.0 : -1.0) / double(n) * term;
  }
  return sum;
}

namespace detail {

// exp of one diagonal block s*I + N with N nilpotent; falls back to the dense
// exponential when the traceless part is not numerically nilpotent.
inline Matrix exp_block(const Matrix& y) {
  const int e = static_cast<int>(y.rows());
  const double s = y.trace() / double(e);
  const Matrix n = y - s * Matrix::Identity(e, e);
  Matrix p = n;
  for (int k = 1; k < e; ++k) p = p * n;
  const double scale = std::max(1.0, std::pow(n.norm(), double(e)));
  if (p.cwiseAbs().maxCoeff() <= 1e-9 * scale) return std::exp(s) * nilpotent_exp(n);
  return y.exp();
}

}  // namespace detail

/// Matrix exponential. With a Jordan hint whose basis C block-diagonalizes X,
/// each block is exponentiated as scalar exponential times a finite nilpotent
/// series; otherwise (or when the hint does not fit) the dense
/// scaling-and-squaring exponential is used.
inline Matrix structured_exp(const Matrix& x, const RealJordanDecomposition* hint = nullptr) {
  require_square_finite(x, "structured_exp");
  const int d = static_cast<int>(x.rows());
  if (hint != nullptr && hint->dim == d) {
    const Matrix y = hint->basis_inv * x * hint->basis;
    // verify block-compatibility: off-block entries must vanish
    double off = 0.0;
    for (const auto& b : hint->blocks) {
      for (int r = b.offset; r < b.offset + b.extent(); ++r)
        for (int c = 0; c < d; ++c)
          if (c < b.offset || c >= b.offset + b.extent()) off = std::max(off, std::abs(y(r, c)));
    }
    if (off <= 1e-9 * std::max(1.0, y.norm())) {
      Matrix e = Matrix::Zero(d, d);
      for (const auto& b : hint->blocks) {
        const int n = b.extent();
        e.block(b.offset, b.offset, n, n) = detail::exp_block(y.block(b.offset, b.offset, n, n));
      }
      return hint->basis * e * hint->basis_inv;
    }
  }
  return x.exp();
}

}  // namespace anibes
