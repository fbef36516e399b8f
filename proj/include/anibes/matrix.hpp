#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>

#include "anibes/errors.hpp"

namespace anibes {

// Dense d x d real matrices are the universal carrier of the library.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline void require_square_finite(const Matrix& a, const std::string& what) {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw DimensionMismatch(what + ": expected a nonempty square matrix, got " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  if (!a.allFinite()) throw Error(what + ": matrix has non-finite entries");
}

inline void require_same_dim(const Matrix& a, const Matrix& b, const std::string& what) {
  require_square_finite(a, what);
  require_square_finite(b, what);
  if (a.rows() != b.rows())
    throw DimensionMismatch(what + ": dimensions differ (" + std::to_string(a.rows()) +
                            " vs " + std::to_string(b.rows()) + ")");
}

/// Operator norm sup_{|x|=1} |Ax|, i.e. the largest singular value.
inline double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (!a.allFinite()) throw Error("operator_norm: matrix has non-finite entries");
  if (a.rows() == 1 && a.cols() == 1) return std::abs(a(0, 0));
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

inline double condition_number(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

/// FNV-1a over the dimensions and raw entry bytes; provenance tag for results.
inline std::uint64_t matrix_hash(const Matrix& a) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  };
  const std::int64_t r = a.rows(), c = a.cols();
  mix(&r, sizeof r);
  mix(&c, sizeof c);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double v = a(i, j);
      mix(&v, sizeof v);
    }
  return h;
}

}  // namespace anibes
