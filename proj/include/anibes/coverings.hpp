#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "anibes/equivalence.hpp"
#include "anibes/matrix.hpp"
#include "anibes/quasinorm.hpp"
#include "anibes/sampling.hpp"

namespace anibes {

enum class CoveringKind { homogeneous, inhomogeneous };

// Covering induced by A, realized analytically as quasi-norm annuli:
//   Q_j = {x : a |det A|^j <= rho_A(x) <= b |det A|^j},
// which by homogeneity is exactly A^j Q_0. Since rho_A only takes the values
// |det A|^s, membership reduces to integer shell arithmetic: Q_j collects the
// shells in [j + shell_lo, j + shell_hi]. The inhomogeneous variant runs over
// j >= 0 with index 0 carrying the central set {rho_A <= b}.
struct InducedCovering {
  CoveringKind kind = CoveringKind::homogeneous;
  StepQuasiNorm qn;
  double a = 1.0, b = 0.0;
  int index_min = 0, index_max = 0;
  long shell_lo = 0, shell_hi = 0;

  double det_abs() const { return qn.det_abs; }
  // width of the shell interval = exact index-overlap distance
  long overlap_gap() const { return shell_hi - shell_lo; }
};

namespace detail {

inline long snapped_floor(double x) {
  const double r = std::nearbyint(x);
  if (std::abs(x - r) <= 32 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
    return static_cast<long>(r);
  return static_cast<long>(std::floor(x));
}

inline long snapped_ceil(double x) { return -snapped_floor(-x); }

}  // namespace detail

inline InducedCovering make_covering(const Matrix& a_mat, CoveringKind kind,
                                     double base_a = 1.0, double base_b = 0.0, int range = 40,
                                     const EllipsoidOptions& eopts = {}) {
  InducedCovering cov;
  cov.kind = kind;
  cov.qn = build_ellipsoid(a_mat, std::nullopt, eopts);
  cov.a = base_a;
  cov.b = base_b > 0.0 ? base_b : 1.5 * cov.qn.det_abs * base_a;
  if (!(cov.a > 0.0) || !(cov.b > cov.a))
    throw Error("make_covering: need 0 < a < b for the base annulus");
  const double logdet = std::log(cov.qn.det_abs);
  cov.shell_lo = detail::snapped_ceil(std::log(cov.a) / logdet);
  cov.shell_hi = detail::snapped_floor(std::log(cov.b) / logdet);
  if (cov.shell_hi - cov.shell_lo < 1)
    throw Error("make_covering: base annulus too thin, consecutive members would not overlap");
  cov.index_min = kind == CoveringKind::homogeneous ? -range : 0;
  cov.index_max = range;
  return cov;
}

/// Exact membership x in Q_j, via the shell index of the quasi-norm.
inline bool covering_member(const InducedCovering& cov, long j, const Vector& x) {
  if (x.isZero(0.0)) return false;
  const long s = qn_shell_index(cov.qn, x);
  if (cov.kind == CoveringKind::inhomogeneous && j == 0) return s <= cov.shell_hi;
  return s >= j + cov.shell_lo && s <= j + cov.shell_hi;
}

/// Smallest j0 with Q_j and Q_i disjoint whenever |j - i| > j0, computed from
/// the annulus bounds as ceil(log_det(b/a)) and verified on sampled points.
inline int admissibility_gap(const InducedCovering& cov, int verify_samples = 1000,
                             std::uint64_t seed = 0) {
  const double logdet = std::log(cov.qn.det_abs);
  const int j0 = static_cast<int>(detail::snapped_ceil(std::log(cov.b / cov.a) / logdet));
  // sampled check: the members containing x span an index window of width
  // at most j0
  auto rng = seeded_rng(seed);
  const int d = cov.qn.dim();
  std::uniform_real_distribution<double> radius(-2.0, 2.0);
  for (int i = 0; i < verify_samples; ++i) {
    const Vector x = std::pow(10.0, radius(rng)) * unit_direction(rng, d);
    const long s = qn_shell_index(cov.qn, x);
    const long jlo = s - cov.shell_hi, jhi = s - cov.shell_lo;
    if (jhi - jlo > j0)
      throw Error("admissibility_gap: sampled overlap exceeded the analytic gap");
  }
  return j0;
}

struct WeakCountRow {
  long long i = 0;
  int count = 0;
  std::vector<long long> witnesses;  // the j indices hitting both norm bounds
};

struct CountTable {
  int max_count_over_i = 0;  // sup_i |{j : both norms >= 1/R}|
  int max_count_over_j = 0;  // sup_j |{i : ...}|, same predicate transposed
  std::vector<WeakCountRow> rows;
};

/// Finite-scale weak-equivalence counts: for every index i in the (truncated)
/// set, how many j satisfy ||A^{-j} B^i|| >= 1/R and ||B^{-i} A^j|| >= 1/R.
inline CountTable weak_equivalence_counts(const Matrix& a, const Matrix& b, double R, int range,
                                          ProbeSide side) {
  require_same_dim(a, b, "weak_equivalence_counts");
  if (!is_expansive(a, 0.0) || !is_expansive(b, 0.0))
    throw NotExpansive("weak_equivalence_counts: both matrices must be expansive");
  if (!(R > 1.0)) throw Error("weak_equivalence_counts: R must exceed 1");
  if (range < 50) throw Error("weak_equivalence_counts: range must be >= 50");

  const int d = static_cast<int>(a.rows());
  const Matrix ainv = a.fullPivLu().inverse();
  const Matrix binv = b.fullPivLu().inverse();

  struct Scaled {
    Matrix unit;
    double ls;
  };
  auto powers = [&](const Matrix& m, int count) {
    std::vector<Scaled> out;
    Matrix p = Matrix::Identity(d, d);
    double ls = std::log(p.norm());
    p /= p.norm();
    out.push_back({p, ls});
    for (int k = 1; k <= count; ++k) {
      p = m * p;
      const double n = p.norm();
      ls += std::log(n);
      p /= n;
      out.push_back({p, ls});
    }
    return out;
  };
  const auto a_pos = powers(a, range), a_neg = powers(ainv, range);
  const auto b_pos = powers(b, range), b_neg = powers(binv, range);

  auto scaled = [](const std::vector<Scaled>& pos, const std::vector<Scaled>& neg,
                   long long k) -> const Scaled& { return k >= 0 ? pos[k] : neg[-k]; };
  const double log_thresh = -std::log(R);
  auto cond = [&](long long j, long long i) {
    const Scaled& aj = scaled(a_pos, a_neg, -j);  // A^{-j}
    const Scaled& bi = scaled(b_pos, b_neg, i);   // B^{i}
    const double n1 = aj.ls + bi.ls + std::log(operator_norm(aj.unit * bi.unit));
    if (n1 < log_thresh) return false;
    const Scaled& bi2 = scaled(b_pos, b_neg, -i);  // B^{-i}
    const Scaled& aj2 = scaled(a_pos, a_neg, j);   // A^{j}
    const double n2 = bi2.ls + aj2.ls + std::log(operator_norm(bi2.unit * aj2.unit));
    return n2 >= log_thresh;
  };

  const long long lo = side == ProbeSide::two_sided ? -range : 0;
  CountTable table;
  std::vector<int> count_j(static_cast<std::size_t>(range - lo + 1), 0);
  for (long long i = lo; i <= range; ++i) {
    WeakCountRow row;
    row.i = i;
    for (long long j = lo; j <= range; ++j)
      if (cond(j, i)) {
        ++row.count;
        row.witnesses.push_back(j);
        ++count_j[static_cast<std::size_t>(j - lo)];
      }
    table.max_count_over_i = std::max(table.max_count_over_i, row.count);
    table.rows.push_back(std::move(row));
  }
  for (int c : count_j) table.max_count_over_j = std::max(table.max_count_over_j, c);
  return table;
}

struct WeakBoundednessResult {
  int count_at_range = 0;
  int count_at_doubled = 0;
  bool bounded = false;
};

/// Finite-scale surrogate for "counts bounded": the maximum count must not
/// grow by more than `slack` when the index range doubles. Bounded cases
/// plateau exactly; drifting cases keep growing.
inline WeakBoundednessResult weak_counts_bounded(const Matrix& a, const Matrix& b, double R,
                                                 int range, ProbeSide side, int slack = 2) {
  WeakBoundednessResult res;
  const auto t1 = weak_equivalence_counts(a, b, R, range, side);
  const auto t2 = weak_equivalence_counts(a, b, R, 2 * range, side);
  res.count_at_range = std::max(t1.max_count_over_i, t1.max_count_over_j);
  res.count_at_doubled = std::max(t2.max_count_over_i, t2.max_count_over_j);
  res.bounded = res.count_at_doubled <= res.count_at_range + slack;
  return res;
}

struct SubordinationOptions {
  int directions = 48;
  int scales_per_shell = 2;
  std::uint64_t seed = 0;
};

/// Smallest star order k <= k_max such that every member Q_i of covQ (over its
/// truncated index range) fits into P_{j_i}^{k*} for a matched index j_i of
/// covP. Q_0 is sampled once and pushed through A^i -- by homogeneity the
/// samples of Q_i are exactly the images of the Q_0 samples -- and membership
/// is decided in exact shell-index arithmetic on the covP side. Returns
/// nothing when no uniform k <= k_max works.
inline std::optional<int> subordination_index(const InducedCovering& covq,
                                              const InducedCovering& covp, int k_max,
                                              const SubordinationOptions& opts = {}) {
  if (covq.kind != covp.kind)
    throw KindMismatch("subordination_index: covering kinds differ");
  if (covq.qn.dim() != covp.qn.dim())
    throw DimensionMismatch("subordination_index: dimension mismatch");
  const int d = covq.qn.dim();
  const long gap = std::max(1L, covp.overlap_gap());

  // sample points of Q_0: directions x target shells x in-shell scales
  auto rng = seeded_rng(opts.seed);
  std::vector<Vector> samples;
  const double mu = 1.0 / (covq.qn.nesting_ratio * covq.qn.nesting_ratio);
  for (int i = 0; i < opts.directions; ++i) {
    const Vector u = unit_direction(rng, d);
    for (long s = covq.shell_lo; s <= covq.shell_hi; ++s) {
      for (int t = 0; t < opts.scales_per_shell; ++t) {
        // y on shell 0: q(y) = c * shape with c in [1, 1/mu)
        const double c = 1.0 + (1.0 / mu - 1.0) * 0.98 * (t + 0.5) / opts.scales_per_shell;
        Vector y = u * std::sqrt(covq.qn.shape * c / covq.qn.quadratic(u));
        for (long w = 0; w < s; ++w) y = covq.qn.matrix * y;
        for (long w = 0; w > s; --w) y = covq.qn.inverse * y;
        samples.push_back(y);
      }
    }
  }

  // covered shell interval of P_j^{k*}; lower bound may be -infinity
  auto star_covers = [&](long j, int k, long smin, long smax, bool needs_central) {
    const long l2 = j + k * gap;
    if (covp.kind == CoveringKind::inhomogeneous) {
      const long l1 = std::max(0L, j - k * gap);
      if (l1 == 0) return smax <= covp.shell_hi + l2;
      if (needs_central) return false;
      return covp.shell_lo + l1 <= smin && smax <= covp.shell_hi + l2;
    }
    if (needs_central) return false;
    return covp.shell_lo + j - k * gap <= smin && smax <= covp.shell_hi + l2;
  };

  int needed = 0;
  Matrix apow = Matrix::Identity(d, d);
  for (int i = std::max(0, covq.index_min); i <= covq.index_max; ++i) {
    if (i > 0) apow = covq.qn.matrix * apow;
    for (int sign = 0; sign < 2; ++sign) {
      const int idx = sign == 0 ? i : -i;
      if (idx < covq.index_min || (sign == 1 && i == 0)) continue;
      if (covq.kind == CoveringKind::inhomogeneous && idx < 0) continue;
      Matrix m = apow;
      if (sign == 1) {
        m = Matrix::Identity(d, d);
        for (int w = 0; w < i; ++w) m = covq.qn.inverse * m;
      }
      const bool central_q = covq.kind == CoveringKind::inhomogeneous && idx == 0;
      long smin = std::numeric_limits<long>::max();
      long smax = std::numeric_limits<long>::min();
      for (const Vector& y : samples) {
        const long s = qn_shell_index(covp.qn, Vector(m * y));
        smin = std::min(smin, s);
        smax = std::max(smax, s);
      }
      // smallest k admitting a matched index j
      int ki = k_max + 1;
      for (int k = needed; k <= k_max && ki > k_max; ++k) {
        const long j_lo = covp.kind == CoveringKind::inhomogeneous
                              ? 0L
                              : smin - covp.shell_hi - static_cast<long>(k) * gap - 1;
        const long j_hi = std::max(j_lo, smax + static_cast<long>(k) * gap + 1);
        for (long j = j_lo; j <= j_hi; ++j)
          if (star_covers(j, k, smin, smax, central_q)) {
            ki = k;
            break;
          }
      }
      if (ki > k_max) return std::nullopt;
      needed = std::max(needed, ki);
    }
  }
  return needed;
}

}  // namespace anibes
