#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "anibes/matrix.hpp"
#include "anibes/sampling.hpp"
#include "anibes/spectrum.hpp"

namespace anibes {

// Step quasi-norm rho_A built from an ellipsoid Delta = {x : x^T P x < s}
// with lambda(Delta) = 1 and Delta c r*Delta c A*Delta:
//   rho_A(x) = |det A|^j  for x in A^{j+1} Delta \ A^j Delta,   rho_A(0) = 0.
struct StepQuasiNorm {
  Matrix matrix;       // A (expansive)
  Matrix inverse;      // cached A^{-1}
  Matrix form;         // P, symmetric positive definite
  double shape = 0.0;  // s with Delta = {q < s}, volume-normalized
  double det_abs = 0.0;
  double nesting_ratio = 0.0;  // certified r > 1
  double delta = 0.0;          // series parameter used for P

  int dim() const { return static_cast<int>(matrix.rows()); }
  double quadratic(const Vector& x) const { return x.dot(form * x); }
};

struct EllipsoidOptions {
  int certify_samples = 2000;
  std::uint64_t seed = 0;
};

/// Volume of the d-dimensional euclidean unit ball, by the exact recurrence
/// omega_d = omega_{d-2} * 2 pi / d (avoids tgamma roundoff for small d).
inline double unit_ball_volume(int d) {
  double even = 1.0, odd = 2.0;  // omega_0, omega_1
  for (int k = 2; k <= d; ++k) {
    if (k % 2 == 0)
      even *= 2.0 * M_PI / k;
    else
      odd *= 2.0 * M_PI / k;
  }
  return d % 2 == 0 ? even : odd;
}

/// Volume of {x : x^T P x < s} in d dimensions: omega_d s^{d/2} / sqrt(det P).
inline double ellipsoid_volume(const Matrix& p, double s) {
  const int d = static_cast<int>(p.rows());
  return unit_ball_volume(d) * std::pow(s, d / 2.0) / std::sqrt(p.determinant());
}

/// Builds the step quasi-norm of an expansive A. The quadratic form is the
/// geometric series P = sum_k delta^{2k} (A^{-k})^T A^{-k} with
/// delta in (1, min|lambda|), which gives q(A^{-1}x) <= delta^{-2} q(x) by
/// construction, hence a nesting ratio certifiable up to delta. The scale s
/// normalizes lambda(Delta) = 1; the ratio is certified on sampled boundary
/// points and cross-checked against the exact generalized eigenvalue bound.
inline StepQuasiNorm build_ellipsoid(const Matrix& a, std::optional<double> delta = std::nullopt,
                                     const EllipsoidOptions& opts = {}) {
  require_square_finite(a, "build_ellipsoid");
  const Spectrum spec = compute_spectrum(a);
  if (spec.min_modulus() < 1e-12) throw SingularMatrix("build_ellipsoid: singular matrix");
  if (!(spec.min_modulus() > 1.0)) throw NotExpansive("build_ellipsoid: matrix is not expansive");
  const double lam_min = spec.min_modulus();
  const double dl = delta.value_or((1.0 + lam_min) / 2.0);
  if (!(dl > 1.0 && dl < lam_min))
    throw Error("build_ellipsoid: delta must lie in (1, min eigenvalue modulus)");

  const int d = static_cast<int>(a.rows());
  const Matrix ainv = a.fullPivLu().inverse();

  Matrix p = Matrix::Identity(d, d);
  Matrix power = Matrix::Identity(d, d);  // A^{-k}
  double weight = 1.0;                    // delta^{2k}
  for (int k = 1; k <= 100000; ++k) {
    power = power * ainv;
    weight *= dl * dl;
    const Matrix term = weight * power.transpose() * power;
    p += term;
    if (term.norm() < 1e-12) break;
  }
  p = 0.5 * (p + p.transpose());

  StepQuasiNorm q;
  q.matrix = a;
  q.inverse = ainv;
  q.form = p;
  q.delta = dl;
  q.det_abs = std::abs(a.fullPivLu().determinant());
  q.shape = std::pow(p.determinant(), 1.0 / d) / std::pow(unit_ball_volume(d), 2.0 / d);

  // certify the nesting ratio: mu = max q(A^{-1}x) / s over the boundary q = s
  auto rng = seeded_rng(opts.seed);
  double mu = 0.0;
  for (int i = 0; i < opts.certify_samples; ++i) {
    const Vector u = unit_direction(rng, d);
    const Vector x = u * std::sqrt(q.shape / q.quadratic(u));
    mu = std::max(mu, q.quadratic(ainv * x) / q.shape);
  }
  if (d <= 8) {
    // exact version: largest generalized eigenvalue of (A^{-T} P A^{-1}, P)
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(
        Matrix(ainv.transpose() * p * ainv), p);
    mu = std::max(mu, ges.eigenvalues().maxCoeff());
  }
  const double r = std::sqrt((1.0 - 1e-9) / mu);
  if (!(r > 1.0))
    throw CertificationFailed("build_ellipsoid: nesting certification failed, retry with smaller delta");
  q.nesting_ratio = r;
  return q;
}

/// Shell index j of x: the unique integer with x in A^{j+1} Delta \ A^j Delta,
/// i.e. q(A^{-(j+1)} x) < s <= q(A^{-j} x). The search walks from j = 0; the
/// series construction makes q(A^{-1}x) strictly smaller than q(x), so the
/// membership predicate is monotone in j.
inline long qn_shell_index(const StepQuasiNorm& q, const Vector& x) {
  if (x.size() != q.dim()) throw DimensionMismatch("qn_shell_index: size mismatch");
  const long cap = 16384;
  Vector y = x;
  double val = q.quadratic(y);
  if (val < q.shape) {
    // inside Delta: walk down until outside
    long i = 0;
    while (val < q.shape) {
      y = q.matrix * y;
      val = q.quadratic(y);
      if (--i < -cap) throw Error("qn_shell_index: shell search did not terminate");
    }
    return i;  // first i with q(A^{-i}x) >= s; shell = i (since q(A^{-(i+1)}x) < s)
  }
  long i = 0;
  while (true) {
    y = q.inverse * y;
    val = q.quadratic(y);
    ++i;
    if (val < q.shape) return i - 1;
    if (i > cap) throw Error("qn_shell_index: shell search did not terminate");
  }
}

/// rho_A(x) = |det A|^shell(x), rho_A(0) = 0.
inline double qn_eval(const StepQuasiNorm& q, const Vector& x) {
  if (x.size() != q.dim()) throw DimensionMismatch("qn_eval: size mismatch");
  if (x.isZero(0.0)) return 0.0;
  return std::pow(q.det_abs, double(qn_shell_index(q, x)));
}

struct QnComparisonRow {
  double radius = 0.0;
  int direction = 0;
  double ratio = 0.0;  // rho_B(x) / rho_A(x)
};

struct QnComparison {
  double ratio_low = 0.0, ratio_high = 0.0;           // over all samples
  double ratio_low_far = 0.0, ratio_high_far = 0.0;   // |x| in the largest decade
  std::vector<QnComparisonRow> rows;                  // optional evidence
  double spread() const { return ratio_high / ratio_low; }
  double spread_far() const { return ratio_high_far / ratio_low_far; }
};

/// Samples rho_B / rho_A over random directions and log-spaced radii covering
/// `radius_decades` decades centered at 1 (|x| from 10^{-D/2} to 10^{D/2}).
/// The far-field figures restrict to the largest sampled decade, the
/// "equivalence at infinity" estimate.
inline QnComparison qn_compare(const StepQuasiNorm& qa, const StepQuasiNorm& qb, int n_samples,
                               int radius_decades, std::uint64_t seed = 0,
                               bool keep_rows = false) {
  if (qa.dim() != qb.dim()) throw DimensionMismatch("qn_compare: dimension mismatch");
  if (n_samples < 1 || radius_decades < 1) throw Error("qn_compare: bad sampling parameters");
  const int d = qa.dim();
  auto rng = seeded_rng(seed);
  const int per_decade = 8;
  const int n_radii = radius_decades * per_decade + 1;
  const double log10_lo = -0.5 * radius_decades;
  const double log10_hi = 0.5 * radius_decades;

  QnComparison out;
  out.ratio_low = out.ratio_low_far = std::numeric_limits<double>::infinity();
  out.ratio_high = out.ratio_high_far = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const Vector u = unit_direction(rng, d);
    for (int t = 0; t < n_radii; ++t) {
      const double lg = log10_lo + (log10_hi - log10_lo) * t / (n_radii - 1);
      const double radius = std::pow(10.0, lg);
      const Vector x = radius * u;
      const double ra = qn_eval(qa, x), rb = qn_eval(qb, x);
      if (ra == 0.0 || rb == 0.0) continue;  // underflow guard for tiny radii
      const double ratio = rb / ra;
      out.ratio_low = std::min(out.ratio_low, ratio);
      out.ratio_high = std::max(out.ratio_high, ratio);
      if (lg >= log10_hi - 1.0) {
        out.ratio_low_far = std::min(out.ratio_low_far, ratio);
        out.ratio_high_far = std::max(out.ratio_high_far, ratio);
      }
      if (keep_rows) out.rows.push_back({radius, i, ratio});
    }
  }
  return out;
}

}  // namespace anibes
