#pragma once

#include <cmath>
#include <vector>

#include "anibes/jordan.hpp"
#include "anibes/matrix.hpp"
#include "anibes/sampling.hpp"
#include "anibes/spectrum.hpp"

namespace anibes {

// Realified generalized eigenspace filtration
//   E(A, r, m) = span( U_{|lambda|=r} Ker(A - lambda I)^m
//                      U_{|lambda|<r} Ker(A - lambda I)^d ).
struct EigenFiltrationSpace {
  Matrix matrix;  // A
  double r = 0.0;
  int m = 0;
  Matrix basis;   // d x k with orthonormal columns; k may be zero
  int dim() const { return static_cast<int>(basis.cols()); }
};

struct GrowthEstimate {
  double rate = 0.0;            // r in the model c * k^m * r^k
  int polynomial_degree = 0;    // m
  double fit_residual = 0.0;    // max log deviation over the fitted range
  int k_min = 0, k_max = 0;
};

struct EigenBounds {
  double lambda_minus = 0.0;  // > 1, strictly below every eigenvalue modulus
  double lambda_plus = 0.0;   // strictly above every eigenvalue modulus
  double c = 1.0;             // sandwich constant, certified by sampling
};

namespace detail {

// Orthonormalize the columns of cols; rank decided by relative SVD threshold.
inline Matrix orthonormal_span(const Matrix& cols, double rank_tol = 1e-8) {
  if (cols.cols() == 0) return cols;
  Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  while (rank < sv.size() && sv(rank) > rank_tol * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace detail

/// Orthonormal basis of the realification of E(A, r, m). Eigenvalues within
/// tol of modulus r contribute Ker(A - lambda I)^m, moduli below r - tol
/// contribute the full generalized eigenspace. Returns the zero subspace when
/// nothing qualifies.
inline EigenFiltrationSpace generalized_eigenspace(const Matrix& a, double r, int m, double tol,
                                                   const SpectrumOptions& sopts = {}) {
  require_square_finite(a, "generalized_eigenspace");
  const int d = static_cast<int>(a.rows());
  if (!(r > 0.0)) throw Error("generalized_eigenspace: r must be positive");
  if (m < 0 || m > d) throw Error("generalized_eigenspace: m out of range");

  const Spectrum spec = compute_spectrum(a, sopts);
  std::vector<Vector> cols;
  for (const auto& cl : spec.clusters) {
    if (cl.value.imag() < 0.0) continue;  // conjugate spans coincide after realification
    int power = 0;
    if (std::abs(cl.modulus() - r) <= tol)
      power = m;
    else if (cl.modulus() < r - tol)
      power = d;
    if (power == 0) continue;

    if (cl.value.imag() == 0.0) {
      const Matrix n = a - cl.value.real() * Matrix::Identity(d, d);
      const Matrix k =
          detail::power_kernel(n, power, cl.multiplicity, 1e-8, cl.radius);
      for (int c = 0; c < k.cols(); ++c) cols.push_back(k.col(c));
    } else {
      const ComplexMatrix n = ComplexMatrix(a.cast<std::complex<double>>()) -
                              cl.value * ComplexMatrix::Identity(d, d);
      const ComplexMatrix k =
          detail::power_kernel(n, power, cl.multiplicity, 1e-8, cl.radius);
      for (int c = 0; c < k.cols(); ++c) {
        cols.push_back(k.col(c).real());
        cols.push_back(k.col(c).imag());
      }
    }
  }

  EigenFiltrationSpace out;
  out.matrix = a;
  out.r = r;
  out.m = m;
  Matrix stacked(d, static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) stacked.col(static_cast<int>(i)) = cols[i];
  out.basis = detail::orthonormal_span(stacked);
  return out;
}

/// Fits log|A^k z| ~ log c + m log k + k log r over [k_min, k_max], with the
/// polynomial degree m constrained to integers 0..d-1. Norms are accumulated
/// with per-step renormalization so large k cannot overflow.
inline GrowthEstimate growth_exponents(const Matrix& a, const Vector& z, int k_min, int k_max) {
  require_square_finite(a, "growth_exponents");
  if (z.size() != a.rows()) throw DimensionMismatch("growth_exponents: vector size mismatch");
  if (z.norm() == 0.0) throw ZeroVector("growth_exponents: z must be nonzero");
  if (k_min < 1) throw Error("growth_exponents: k_min must be >= 1");
  if (k_max - k_min < 20) throw Error("growth_exponents: need k_max - k_min >= 20");
  const int d = static_cast<int>(a.rows());

  std::vector<double> logk, y;
  Vector w = z / z.norm();
  double acc = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    w = a * w;
    const double s = w.norm();
    if (s == 0.0) throw Error("growth_exponents: iterate collapsed to zero");
    acc += std::log(s);
    w /= s;
    if (k >= k_min) {
      logk.push_back(std::log(double(k)));
      y.push_back(acc);
    }
  }

  GrowthEstimate best;
  best.k_min = k_min;
  best.k_max = k_max;
  best.fit_residual = std::numeric_limits<double>::infinity();
  const int npts = static_cast<int>(y.size());
  for (int m = 0; m < d; ++m) {
    // least squares of (y - m log k) against {1, k}
    double sk = 0, skk = 0, sy = 0, sky = 0;
    for (int i = 0; i < npts; ++i) {
      const double k = double(k_min + i);
      const double yi = y[i] - m * logk[i];
      sk += k;
      skk += k * k;
      sy += yi;
      sky += k * yi;
    }
    const double det = npts * skk - sk * sk;
    const double slope = (npts * sky - sk * sy) / det;
    const double icept = (sy * skk - sk * sky) / det;
    double res = 0.0;
    for (int i = 0; i < npts; ++i) {
      const double k = double(k_min + i);
      res = std::max(res, std::abs(y[i] - m * logk[i] - icept - slope * k));
    }
    if (res < best.fit_residual) {
      best.fit_residual = res;
      best.polynomial_degree = m;
      best.rate = std::exp(slope);
    }
  }
  return best;
}

/// Sandwich constants for an expansive matrix: lambda_minus/plus bracket the
/// eigenvalue moduli with the given relative margin, and c is grown until
/// (1/c) lambda_minus^j |x| <= |A^j x| <= c lambda_plus^j |x| holds on sampled
/// j = 0..40 and unit x, then certified on a fresh sample.
inline EigenBounds eigen_bounds(const Matrix& a, double margin, std::uint64_t seed = 0) {
  require_square_finite(a, "eigen_bounds");
  const Spectrum spec = compute_spectrum(a);
  if (spec.min_modulus() < 1e-12) throw SingularMatrix("eigen_bounds: numerically singular");
  if (!(spec.min_modulus() > 1.0)) throw NotExpansive("eigen_bounds: matrix is not expansive");
  if (!(margin > 0.0)) throw Error("eigen_bounds: margin must be positive");
  if (!(margin < spec.min_modulus() - 1.0))
    throw NotExpansive("eigen_bounds: margin too large for this spectrum");

  EigenBounds out;
  out.lambda_minus = spec.min_modulus() * (1.0 - margin);
  out.lambda_plus = spec.max_modulus() * (1.0 + margin);
  if (!(out.lambda_minus > 1.0))
    throw NotExpansive("eigen_bounds: margin too large, lambda_minus <= 1");

  const int d = static_cast<int>(a.rows());
  const int j_max = 40, n_samples = 100;
  auto rng = seeded_rng(seed);
  auto required_c = [&](int count) {
    double c = 1.0;
    for (int s = 0; s < count; ++s) {
      Vector w = unit_direction(rng, d);
      double logn = 0.0;  // log |A^j x|
      for (int j = 0; j <= j_max; ++j) {
        if (j > 0) {
          w = a * w;
          const double nn = w.norm();
          logn += std::log(nn);
          w /= nn;
        }
        const double lo = j * std::log(out.lambda_minus);
        const double hi = j * std::log(out.lambda_plus);
        c = std::max({c, std::exp(lo - logn), std::exp(logn - hi)});
      }
    }
    return c;
  };
  out.c = 1.05 * required_c(n_samples);
  for (int round = 0; round < 8; ++round) {
    const double fresh = required_c(n_samples);
    if (fresh <= out.c) break;
    out.c = 1.05 * fresh;
  }
  return out;
}

}  // namespace anibes
