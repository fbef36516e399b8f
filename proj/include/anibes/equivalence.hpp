#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "anibes/eigenspaces.hpp"
#include "anibes/exp_log.hpp"
#include "anibes/jordan.hpp"
#include "anibes/matrix.hpp"
#include "anibes/quasinorm.hpp"
#include "anibes/spectrum.hpp"

namespace anibes {

/// epsilon(A,B) = ln|det A| / ln|det B|, the exponent matching the growth of
/// the two dilation semigroups.
inline double epsilon(const Matrix& a, const Matrix& b) {
  require_square_finite(a, "epsilon");
  require_square_finite(b, "epsilon");
  if (!is_expansive(a, 0.0) || !is_expansive(b, 0.0))
    throw NotExpansive("epsilon: both matrices must be expansive");
  return std::log(std::abs(a.fullPivLu().determinant())) /
         std::log(std::abs(b.fullPivLu().determinant()));
}

// floor(eps * k) with the discontinuity handled carefully: when eps is within
// 1e-12 of a rational with denominator <= 1e6 the floor is taken in exact
// integer arithmetic, otherwise in floating point with a half-ulp snap.
class EpsilonFloor {
 public:
  explicit EpsilonFloor(double eps) : eps_(eps) {
    double frac = eps;
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;  // convergent recurrence seeds
    for (int it = 0; it < 64; ++it) {
      const double af = std::floor(frac);
      if (!(af >= -1e15 && af <= 1e15)) break;
      const long long ai = static_cast<long long>(af);
      const long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
      if (q2 > 1000000 || q2 <= 0) break;
      p0 = p1;
      q0 = q1;
      p1 = p2;
      q1 = q2;
      if (std::abs(eps - double(p1) / double(q1)) < 1e-12) {
        num_ = p1;
        den_ = q1;
        rational_ = true;
        break;
      }
      const double rem = frac - af;
      if (rem < 1e-15) break;
      frac = 1.0 / rem;
    }
  }

  bool rational() const { return rational_; }

  long long operator()(long long k) const {
    if (rational_) {
      const long long t = num_ * k;
      const long long q = t / den_;
      return (t % den_ != 0 && (t < 0)) ? q - 1 : q;
    }
    double y = eps_ * double(k);
    const double r = std::nearbyint(y);
    if (std::abs(y - r) <= 0.5 * std::abs(y) * std::numeric_limits<double>::epsilon()) y = r;
    return static_cast<long long>(std::floor(y));
  }

 private:
  double eps_ = 0.0;
  bool rational_ = false;
  long long num_ = 0, den_ = 1;
};

/// A^{-k} B^{floor(eps k)} as a Frobenius-normalized matrix plus log scale,
/// accumulated incrementally so large |k| cannot overflow.
struct ScaledProduct {
  Matrix unit;             // ||unit||_F = 1
  double log_scale = 0.0;  // value = exp(log_scale) * unit
  double log_opnorm() const { return log_scale + std::log(operator_norm(unit)); }
};

inline ScaledProduct scaled_power_product(const Matrix& a, const Matrix& b, long long k) {
  require_same_dim(a, b, "scaled_power_product");
  const double eps = epsilon(a, b);
  const EpsilonFloor fl(eps);
  const int d = static_cast<int>(a.rows());
  const Matrix ainv = a.fullPivLu().inverse();
  const Matrix binv = b.fullPivLu().inverse();
  Matrix p = Matrix::Identity(d, d);
  double ls = 0.0;
  auto renorm = [&]() {
    const double n = p.norm();
    ls += std::log(n);
    p /= n;
  };
  renorm();
  if (k >= 0) {
    for (long long i = 1; i <= k; ++i) {
      p = ainv * p;
      for (long long j = fl(i - 1); j < fl(i); ++j) p = p * b;
      renorm();
    }
  } else {
    for (long long i = -1; i >= k; --i) {
      p = a * p;
      for (long long j = fl(i); j < fl(i + 1); ++j) p = p * binv;
      renorm();
    }
  }
  return {p, ls};
}

/// Dense A^{-k} B^{floor(eps k)}; only sensible while exp(log_scale) is
/// representable.
inline Matrix power_product(const Matrix& a, const Matrix& b, long long k) {
  const ScaledProduct sp = scaled_power_product(a, b, k);
  return std::exp(sp.log_scale) * sp.unit;
}

enum class ProbeSide { two_sided, positive_only };
enum class ProbeClass { bounded, polynomial, exponential };

struct ProbeOptions {
  int k_max = 100;
  int fit_k_min = 5;                 // skip the initial transient in the fit
  double bounded_slope_k = 1e-3;     // |slope against k| below this
  double bounded_slope_logk = 0.15;  // |slope against log k| below this
};

struct ProbeFit {
  double intercept = 0.0, slope_logk = 0.0, slope_k = 0.0;
  ProbeClass cls = ProbeClass::bounded;
  bool valid = false;
};

// Sampled k -> log ||A^{-k} B^{floor(eps k)}|| with a growth classification.
struct ProbeSeries {
  std::vector<long long> ks;  // strictly increasing
  std::vector<double> log_norms;
  ProbeSide side = ProbeSide::two_sided;
  ProbeClass classification = ProbeClass::bounded;
  double poly_degree = 0.0;  // log-k slope of the dominating side
  double exp_rate = 1.0;     // exp of the k slope of the dominating side
  ProbeFit fit_pos, fit_neg;
  bool bounded() const { return classification == ProbeClass::bounded; }
};

namespace detail {

// Regression of y against {1, log k, k}. The two growth regressors are nearly
// collinear over the typical window, which lets plain least squares explain
// bounded oscillating data with large canceling slope pairs. The log-k slope
// is therefore swept over integers (entrywise the products are polynomials in
// k times exponentials, so the true degree is integral) with a parsimonious
// pick, and the k slope comes from the well-conditioned two-parameter fit at
// the selected degree.
inline ProbeFit fit_probe_side(const std::vector<double>& absk, const std::vector<double>& y,
                               const ProbeOptions& opts, int degree_cap) {
  ProbeFit fit;
  const int n = static_cast<int>(y.size());
  if (n < 10) return fit;

  struct Line {
    double icept, slope, resid;
  };
  auto line_fit = [&](int m) {
    double sk = 0, skk = 0, sy = 0, sky = 0;
    for (int i = 0; i < n; ++i) {
      const double yi = y[i] - m * std::log(absk[i]);
      sk += absk[i];
      skk += absk[i] * absk[i];
      sy += yi;
      sky += absk[i] * yi;
    }
    const double det = n * skk - sk * sk;
    Line l{};
    l.slope = (n * sky - sk * sy) / det;
    l.icept = (sy * skk - sk * sky) / det;
    l.resid = 0.0;
    for (int i = 0; i < n; ++i) {
      const double yi = y[i] - m * std::log(absk[i]);
      l.resid = std::max(l.resid, std::abs(yi - l.icept - l.slope * absk[i]));
    }
    return l;
  };

  std::vector<Line> fits;
  for (int m = 0; m <= degree_cap; ++m) fits.push_back(line_fit(m));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : fits) best = std::min(best, l.resid);
  int m_sel = 0;
  while (m_sel < degree_cap && fits[m_sel].resid > best * 1.02 + 1e-12) ++m_sel;

  fit.intercept = fits[m_sel].icept;
  fit.slope_logk = double(m_sel);
  fit.slope_k = fits[m_sel].slope;
  fit.valid = true;
  if (std::abs(fit.slope_k) < opts.bounded_slope_k)
    fit.cls = std::abs(fit.slope_logk) < opts.bounded_slope_logk ? ProbeClass::bounded
                                                                 : ProbeClass::polynomial;
  else
    fit.cls = ProbeClass::exponential;
  return fit;
}

}  // namespace detail

/// Norm series ||A^{-k} B^{floor(eps k)}|| over k = 1..k_max (and the negative
/// side when two_sided), classified by regressing the log norms against
/// {1, log k, k}. Products are accumulated with running renormalization.
inline ProbeSeries boundedness_probe(const Matrix& a, const Matrix& b, int k_max, ProbeSide side,
                                     const ProbeOptions& opts_in = {}) {
  require_same_dim(a, b, "boundedness_probe");
  if (!is_expansive(a, 0.0) || !is_expansive(b, 0.0))
    throw NotExpansive("boundedness_probe: both matrices must be expansive");
  if (k_max < 50) throw Error("boundedness_probe: k_max must be >= 50");
  ProbeOptions opts = opts_in;
  opts.k_max = k_max;

  const double eps = epsilon(a, b);
  const EpsilonFloor fl(eps);
  const int d = static_cast<int>(a.rows());
  const Matrix ainv = a.fullPivLu().inverse();
  const Matrix binv = b.fullPivLu().inverse();

  ProbeSeries out;
  out.side = side;

  std::vector<double> absk_pos, y_pos, absk_neg, y_neg;
  {
    Matrix p = Matrix::Identity(d, d);
    double ls = std::log(p.norm());
    p /= p.norm();
    for (long long k = 1; k <= k_max; ++k) {
      p = ainv * p;
      for (long long j = fl(k - 1); j < fl(k); ++j) p = p * b;
      const double n = p.norm();
      ls += std::log(n);
      p /= n;
      const double logn = ls + std::log(operator_norm(p));
      if (k >= opts.fit_k_min) {
        absk_pos.push_back(double(k));
        y_pos.push_back(logn);
      }
      out.ks.push_back(k);
      out.log_norms.push_back(logn);
    }
  }
  if (side == ProbeSide::two_sided) {
    Matrix p = Matrix::Identity(d, d);
    double ls = std::log(p.norm());
    p /= p.norm();
    std::vector<long long> ks_neg;
    std::vector<double> logs_neg;
    for (long long k = -1; k >= -k_max; --k) {
      p = a * p;
      for (long long j = fl(k); j < fl(k + 1); ++j) p = p * binv;
      const double n = p.norm();
      ls += std::log(n);
      p /= n;
      const double logn = ls + std::log(operator_norm(p));
      if (-k >= opts.fit_k_min) {
        absk_neg.push_back(double(-k));
        y_neg.push_back(logn);
      }
      ks_neg.push_back(k);
      logs_neg.push_back(logn);
    }
    // prepend in ascending k order
    std::vector<long long> ks;
    std::vector<double> ln;
    for (auto it = ks_neg.rbegin(); it != ks_neg.rend(); ++it) ks.push_back(*it);
    for (auto it = logs_neg.rbegin(); it != logs_neg.rend(); ++it) ln.push_back(*it);
    ks.insert(ks.end(), out.ks.begin(), out.ks.end());
    ln.insert(ln.end(), out.log_norms.begin(), out.log_norms.end());
    out.ks = std::move(ks);
    out.log_norms = std::move(ln);
  }

  const int degree_cap = 2 * d;  // entry degrees reach d-1 per factor
  out.fit_pos = detail::fit_probe_side(absk_pos, y_pos, opts, degree_cap);
  out.fit_neg = detail::fit_probe_side(absk_neg, y_neg, opts, degree_cap);

  auto rank = [](ProbeClass c) { return c == ProbeClass::bounded ? 0 : c == ProbeClass::polynomial ? 1 : 2; };
  ProbeFit dominating = out.fit_pos;
  if (out.fit_neg.valid &&
      (!out.fit_pos.valid || rank(out.fit_neg.cls) > rank(out.fit_pos.cls) ||
       (rank(out.fit_neg.cls) == rank(out.fit_pos.cls) &&
        std::abs(out.fit_neg.slope_logk) > std::abs(out.fit_pos.slope_logk))))
    dominating = out.fit_neg;
  out.classification = dominating.cls;
  out.poly_degree = dominating.slope_logk;
  out.exp_rate = std::exp(dominating.slope_k);
  return out;
}

namespace detail {

// D2 factor of one real Jordan block: rotation removed, spectrum positive.
// Real blocks with negative eigenvalue flip sign; complex pair blocks get
// M_r = r I cells on the diagonal and M_{conj(w) z_i} super cells.
inline Matrix positivized_block(const RealJordanBlock& b) {
  if (b.cell == 1) return b.rotation.real() >= 0 ? b.dense() : Matrix(-b.dense());
  const int e = b.extent();
  Matrix d2 = b.modulus * Matrix::Identity(e, e);
  const std::complex<double> wbar = std::conj(b.rotation);
  for (int i = 0; i + 1 < b.size; ++i)
    if (b.super_flags[i]) {
      d2(2 * i, 2 * i + 2) = wbar.real();
      d2(2 * i, 2 * i + 3) = wbar.imag();
      d2(2 * i + 1, 2 * i + 2) = -wbar.imag();
      d2(2 * i + 1, 2 * i + 3) = wbar.real();
    }
  return d2;
}

}  // namespace detail

/// Equivalent matrix with positive spectrum: per Jordan block the rotation
/// factor (orthogonal, M_w cells or a sign) is dropped and the remaining
/// positive-spectrum factor is conjugated back. Eigenvalues of the result are
/// the eigenvalue moduli of the input; |det| is unchanged.
inline Matrix positivize(const Matrix& a, const JordanOptions& opts = {}) {
  require_expansive(a, "positivize");
  const auto rjd = real_jordan_form(a, opts);
  Matrix d2 = Matrix::Zero(rjd.dim, rjd.dim);
  for (const auto& b : rjd.blocks)
    d2.block(b.offset, b.offset, b.extent(), b.extent()) = detail::positivized_block(b);
  return rjd.basis * d2 * rjd.basis_inv;
}

/// Real logarithm of an expansive matrix with positive eigenvalues: per block
/// lambda(I + T/lambda), the log is ln(lambda) I plus the finite nilpotent
/// series, assembled in the Jordan basis.
inline Matrix matrix_log_expansive(const Matrix& a1, const JordanOptions& opts = {}) {
  require_square_finite(a1, "matrix_log_expansive");
  const Spectrum spec = compute_spectrum(a1, opts.spectrum);
  if (!spec.real_positive())
    throw NonPositiveSpectrum("matrix_log_expansive: spectrum must be real and positive");
  if (!(spec.min_modulus() > 1.0))
    throw NotExpansive("matrix_log_expansive: matrix is not expansive");
  const auto rjd = real_jordan_form(a1, opts);
  Matrix x = Matrix::Zero(rjd.dim, rjd.dim);
  for (const auto& b : rjd.blocks) {
    const int e = b.extent();
    const double lam = b.value().real();
    const Matrix jb = b.dense();
    x.block(b.offset, b.offset, e, e) =
        std::log(lam) * Matrix::Identity(e, e) + nilpotent_log(jb / lam);
  }
  return rjd.basis * x * rjd.basis_inv;
}

struct NormalFormBlock {
  double eigenvalue = 0.0;  // eigenvalue of A', real > 1
  int offset = 0;
  int extent = 0;
};

// Expansive normal form A': the unique equivalent matrix with positive
// eigenvalues and det(A') = 2. in_basis = C^{-1} A' C is block diagonal with
// upper triangular blocks of constant diagonal; block_pattern groups the
// extents per distinct eigenvalue of A' in strictly decreasing order.
struct NormalForm {
  Matrix matrix;     // A'
  Matrix basis;      // Jordan basis C of the source matrix
  Matrix basis_inv;
  Matrix in_basis;   // T with A' = C T C^{-1}
  std::vector<NormalFormBlock> block_pattern;
  double t_scale = 0.0;  // ln 2 / ln |det A|
  std::uint64_t source_hash = 0;
};

/// Computes the expansive normal form exp(t log(positivize(A))) with
/// t = ln 2 / ln |det A|, carried out blockwise in the Jordan basis of A.
inline NormalForm expansive_normal_form(const Matrix& a, const JordanOptions& opts = {}) {
  require_expansive(a, "expansive_normal_form");
  const auto rjd = real_jordan_form(a, opts);
  const double det_abs = std::abs(a.fullPivLu().determinant());
  const double t = std::log(2.0) / std::log(det_abs);

  NormalForm nf;
  nf.t_scale = t;
  nf.source_hash = matrix_hash(a);
  nf.basis = rjd.basis;
  nf.basis_inv = rjd.basis_inv;
  nf.in_basis = Matrix::Zero(rjd.dim, rjd.dim);
  for (const auto& b : rjd.blocks) {
    const int e = b.extent();
    const double r = b.modulus;
    const Matrix d2 = detail::positivized_block(b);
    const Matrix l = nilpotent_log(d2 / r);  // log of the unipotent factor
    nf.in_basis.block(b.offset, b.offset, e, e) = std::pow(r, t) * nilpotent_exp(t * l);
  }
  nf.matrix = rjd.basis * nf.in_basis * rjd.basis_inv;

  // merge adjacent blocks whose moduli tie: they share one eigenvalue of A'
  const double tie = opts.spectrum.tol * std::max(1.0, operator_norm(a));
  for (const auto& b : rjd.blocks) {
    const double ev = std::pow(b.modulus, t);
    if (!nf.block_pattern.empty() &&
        std::abs(std::pow(nf.block_pattern.back().eigenvalue, 1.0 / t) - b.modulus) <= tie)
      nf.block_pattern.back().extent += b.extent();
    else
      nf.block_pattern.push_back({ev, b.offset, b.extent()});
  }
  return nf;
}

struct DecisionOptions {
  JordanOptions jordan{};
  double tol_verdict = 1e-7;
  ProbeOptions probe{};
};

struct EquivalenceDecision {
  bool equal = false;
  double nf_distance = 0.0;  // ||NF(A) - NF(B)||
  double threshold = 0.0;
  double margin = 0.0;       // largest entry magnitude of NF(A) - NF(B)
  NormalForm nf_a, nf_b;
  ProbeSeries probe;         // two-sided consistency oracle
  bool probe_agrees = false;
};

/// Equivalence of the induced quasi-norms: true iff the expansive normal
/// forms coincide within tolerance. A two-sided boundedness probe runs as an
/// independent consistency oracle; disagreement is recorded, not fatal.
inline EquivalenceDecision decide_equivalent_ex(const Matrix& a, const Matrix& b,
                                                const DecisionOptions& opts = {}) {
  require_same_dim(a, b, "decide_equivalent");
  EquivalenceDecision dec;
  dec.nf_a = expansive_normal_form(a, opts.jordan);
  dec.nf_b = expansive_normal_form(b, opts.jordan);
  const Matrix diff = dec.nf_a.matrix - dec.nf_b.matrix;
  dec.nf_distance = operator_norm(diff);
  dec.threshold = opts.tol_verdict * std::max(1.0, operator_norm(dec.nf_a.matrix));
  dec.margin = diff.cwiseAbs().maxCoeff();
  dec.equal = dec.nf_distance <= dec.threshold;
  dec.probe = boundedness_probe(a, b, opts.probe.k_max, ProbeSide::two_sided, opts.probe);
  dec.probe_agrees = dec.probe.bounded() == dec.equal;
  return dec;
}

inline bool decide_equivalent(const Matrix& a, const Matrix& b, double tol = 1e-7) {
  DecisionOptions opts;
  opts.tol_verdict = tol;
  return decide_equivalent_ex(a, b, opts).equal;
}

struct CoarseDecision {
  bool equal = false;
  bool spectra_match = false;
  double max_violation = 0.0;  // largest entry on/below the block diagonal
  double threshold = 0.0;
  double margin = 0.0;
  NormalForm nf_a, nf_b;
  ProbeSeries probe;  // positive-side consistency oracle
  bool probe_agrees = false;
};

/// Coarse equivalence: both normal forms are viewed in the Jordan basis of A;
/// NF(B) must reproduce NF(A)'s diagonal blocks and vanish below the block
/// diagonal, with entries above the blocks unconstrained. Spectra must match
/// first (same eigenvalues and multiplicities within the cluster tolerance).
inline CoarseDecision decide_coarsely_equivalent_ex(const Matrix& a, const Matrix& b,
                                                    const DecisionOptions& opts = {}) {
  require_same_dim(a, b, "decide_coarsely_equivalent");
  CoarseDecision dec;
  dec.nf_a = expansive_normal_form(a, opts.jordan);
  dec.nf_b = expansive_normal_form(b, opts.jordan);
  dec.probe = boundedness_probe(a, b, opts.probe.k_max, ProbeSide::positive_only, opts.probe);

  const auto& pa = dec.nf_a.block_pattern;
  const auto& pb = dec.nf_b.block_pattern;
  const double eig_tol = opts.jordan.spectrum.tol *
                         std::max(1.0, operator_norm(dec.nf_a.matrix));
  dec.spectra_match = pa.size() == pb.size();
  if (dec.spectra_match)
    for (std::size_t i = 0; i < pa.size(); ++i)
      if (pa[i].extent != pb[i].extent ||
          std::abs(pa[i].eigenvalue - pb[i].eigenvalue) > eig_tol)
        dec.spectra_match = false;
  if (!dec.spectra_match) {
    dec.equal = false;
    dec.probe_agrees = dec.probe.bounded() == dec.equal;
    return dec;
  }

  const Matrix bprime = dec.nf_a.basis_inv * dec.nf_b.matrix * dec.nf_a.basis;
  const Matrix& t = dec.nf_a.in_basis;
  const Matrix diff = bprime - t;
  const int d = static_cast<int>(diff.rows());
  std::vector<int> block_of(d, 0);
  for (std::size_t i = 0; i < pa.size(); ++i)
    for (int r = pa[i].offset; r < pa[i].offset + pa[i].extent; ++r)
      block_of[r] = static_cast<int>(i);
  double viol = 0.0;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      if (block_of[r] >= block_of[c]) viol = std::max(viol, std::abs(diff(r, c)));
  dec.max_violation = viol;
  dec.threshold = opts.tol_verdict *
                  std::max({1.0, operator_norm(t), operator_norm(bprime)});
  dec.margin = viol;
  dec.equal = viol <= dec.threshold;
  dec.probe_agrees = dec.probe.bounded() == dec.equal;
  return dec;
}

inline bool decide_coarsely_equivalent(const Matrix& a, const Matrix& b, double tol = 1e-7) {
  DecisionOptions opts;
  opts.tol_verdict = tol;
  return decide_coarsely_equivalent_ex(a, b, opts).equal;
}

struct EigenspaceCheckRow {
  double r = 0.0;     // modulus on the B side
  int m = 0;
  int dim_a = 0, dim_b = 0;
  double angle = 0.0;  // largest principal angle between the two spaces
  bool span_mode = false;  // true for the per-modulus kernel-span rows
};

struct EigenspaceReport {
  double max_angle = 0.0;
  std::vector<EigenspaceCheckRow> rows;
  bool coarse_mode = true;
};

namespace detail {

inline double largest_principal_angle(const Matrix& qa, const Matrix& qb) {
  if (qa.cols() != qb.cols()) return M_PI / 2.0;
  if (qa.cols() == 0) return 0.0;
  const Matrix ra = qb - qa * (qa.transpose() * qb);
  const Matrix rb = qa - qb * (qb.transpose() * qa);
  const double s = std::min(1.0, std::max(operator_norm(ra), operator_norm(rb)));
  return std::asin(s);
}

// span( U_{|lambda| = r, within tol} Ker(A - lambda I)^m ), realified
inline Matrix modulus_kernel_span(const Matrix& a, double r, int m, double tol) {
  const int d = static_cast<int>(a.rows());
  const Spectrum spec = compute_spectrum(a);
  std::vector<Vector> cols;
  for (const auto& cl : spec.clusters) {
    if (cl.value.imag() < 0.0) continue;
    if (std::abs(cl.modulus() - r) > tol) continue;
    if (cl.value.imag() == 0.0) {
      const Matrix n = a - cl.value.real() * Matrix::Identity(d, d);
      const Matrix k = power_kernel(n, m, cl.multiplicity, 1e-8, cl.radius);
      for (int c = 0; c < k.cols(); ++c) cols.push_back(k.col(c));
    } else {
      const ComplexMatrix n = ComplexMatrix(a.cast<std::complex<double>>()) -
                              cl.value * ComplexMatrix::Identity(d, d);
      const ComplexMatrix k = power_kernel(n, m, cl.multiplicity, 1e-8, cl.radius);
      for (int c = 0; c < k.cols(); ++c) {
        cols.push_back(k.col(c).real());
        cols.push_back(k.col(c).imag());
      }
    }
  }
  Matrix stacked(d, static_cast<int>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) stacked.col(static_cast<int>(i)) = cols[i];
  return orthonormal_span(stacked);
}

}  // namespace detail

/// Necessary-condition check on generalized eigenspaces: in coarse mode the
/// filtrations E(A^{-1}, r^eps, m) and E(B^{-1}, r, m) must coincide for every
/// eigenvalue modulus r of B^{-1} and m = 1..d; full mode additionally checks
/// the per-modulus kernel spans of A and B themselves. The check is necessary
/// but not sufficient.
inline EigenspaceReport eigenspace_consistency_check(const Matrix& a, const Matrix& b,
                                                     bool coarse, double rel_tol = 1e-6) {
  require_same_dim(a, b, "eigenspace_consistency_check");
  if (!is_expansive(a, 0.0) || !is_expansive(b, 0.0))
    throw NotExpansive("eigenspace_consistency_check: both matrices must be expansive");
  const double eps = epsilon(a, b);
  const int d = static_cast<int>(a.rows());
  const Matrix ainv = a.fullPivLu().inverse();
  const Matrix binv = b.fullPivLu().inverse();

  EigenspaceReport report;
  report.coarse_mode = coarse;
  const Spectrum sb = compute_spectrum(binv);
  for (double r : sb.distinct_moduli(1e-9)) {
    for (int m = 1; m <= d; ++m) {
      const double ra = std::pow(r, eps);
      const auto ea = generalized_eigenspace(ainv, ra, m, rel_tol * ra);
      const auto eb = generalized_eigenspace(binv, r, m, rel_tol * r);
      EigenspaceCheckRow row;
      row.r = r;
      row.m = m;
      row.dim_a = ea.dim();
      row.dim_b = eb.dim();
      row.angle = detail::largest_principal_angle(ea.basis, eb.basis);
      report.max_angle = std::max(report.max_angle, row.angle);
      report.rows.push_back(row);
    }
  }
  if (!coarse) {
    const Spectrum sb2 = compute_spectrum(b);
    for (double r : sb2.distinct_moduli(1e-9)) {
      if (!(r > 1.0)) continue;
      for (int m = 1; m <= d; ++m) {
        const double ra = std::pow(r, eps);
        const Matrix sa = detail::modulus_kernel_span(a, ra, m, rel_tol * ra);
        const Matrix sbm = detail::modulus_kernel_span(b, r, m, rel_tol * r);
        EigenspaceCheckRow row;
        row.r = r;
        row.m = m;
        row.dim_a = static_cast<int>(sa.cols());
        row.dim_b = static_cast<int>(sbm.cols());
        row.angle = detail::largest_principal_angle(sa, sbm);
        row.span_mode = true;
        report.max_angle = std::max(report.max_angle, row.angle);
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

struct ClassifyOptions {
  DecisionOptions decision{};
  bool with_quasinorm = false;  // attach a quasi-norm comparison as evidence
  int qn_samples = 64;
  int qn_decades = 6;
  std::uint64_t seed = 0;
};

// Final verdict for a matrix pair. hardy_equal always equals hom_besov_equal,
// and hom_besov_equal implies inhom_besov_equal; inhom_raw keeps the coarse
// decision before that closure is applied.
struct Verdict {
  bool hom_besov_equal = false;
  bool inhom_besov_equal = false;
  bool hardy_equal = false;
  double epsilon_ab = 0.0;
  EquivalenceDecision hom;   // decided on (A, B); transpose invariant
  CoarseDecision inhom;      // decided on (A^T, B^T)
  bool inhom_raw = false;
  EigenspaceReport eigenspaces;
  std::optional<QnComparison> quasinorm;
  double tol_verdict = 0.0;
};

/// Classifies the pair: same homogeneous Besov scale (== same Hardy scale)
/// via normal forms of (A, B); same inhomogeneous scale via the coarse
/// criterion applied to the transposes.
inline Verdict classify_pair(const Matrix& a, const Matrix& b, const ClassifyOptions& opts = {}) {
  require_same_dim(a, b, "classify_pair");
  if (!is_expansive(a, 0.0) || !is_expansive(b, 0.0))
    throw NotExpansive("classify_pair: both matrices must be expansive");

  Verdict v;
  v.tol_verdict = opts.decision.tol_verdict;
  v.epsilon_ab = epsilon(a, b);
  v.hom = decide_equivalent_ex(a, b, opts.decision);
  v.inhom = decide_coarsely_equivalent_ex(a.transpose(), b.transpose(), opts.decision);
  v.inhom_raw = v.inhom.equal;
  v.hom_besov_equal = v.hom.equal;
  v.hardy_equal = v.hom.equal;
  v.inhom_besov_equal = v.inhom.equal || v.hom.equal;
  v.eigenspaces = eigenspace_consistency_check(a, b, /*coarse=*/false);
  if (opts.with_quasinorm) {
    EllipsoidOptions eopts;
    eopts.seed = opts.seed;
    const auto qa = build_ellipsoid(a, std::nullopt, eopts);
    const auto qb = build_ellipsoid(b, std::nullopt, eopts);
    v.quasinorm = qn_compare(qa, qb, opts.qn_samples, opts.qn_decades, opts.seed);
  }
  return v;
}

}  // namespace anibes
