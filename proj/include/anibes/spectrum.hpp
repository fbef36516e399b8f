#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "anibes/matrix.hpp"

namespace anibes {

struct SpectrumOptions {
  // Cluster radius, relative to max(1, ||A||). Deliberately loose: defective
  // eigenvalues of index m perturb like eps^(1/m).
  double tol = 1e-6;
  // Widen the radius to ||A||*(1e-13)^(1/m) for candidate clusters of size m,
  // so defective groups that a backward-stable eigensolver scattered by
  // eps^(1/m) are still recognized as one eigenvalue.
  bool adaptive = true;
};

struct EigenvalueCluster {
  std::complex<double> value;  // conjugate pairs appear as two entries
  int multiplicity = 0;
  double radius = 0.0;  // absolute merge radius that formed this cluster
  double modulus() const { return std::abs(value); }
};

struct Spectrum {
  std::vector<EigenvalueCluster> clusters;  // |value| desc, Re desc, Im desc
  double cluster_tolerance = 0.0;           // absolute base radius used
  int dim = 0;

  double min_modulus() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : clusters) m = std::min(m, c.modulus());
    return m;
  }
  double max_modulus() const {
    double m = 0.0;
    for (const auto& c : clusters) m = std::max(m, c.modulus());
    return m;
  }
  bool real_positive() const {
    for (const auto& c : clusters)
      if (c.value.imag() != 0.0 || c.value.real() <= 0.0) return false;
    return true;
  }
  /// Distinct moduli, descending; clusters closer than tol in modulus coalesce.
  std::vector<double> distinct_moduli(double tol) const {
    std::vector<double> mods;
    for (const auto& c : clusters) mods.push_back(c.modulus());
    std::sort(mods.begin(), mods.end(), std::greater<>());
    std::vector<double> out;
    for (double m : mods)
      if (out.empty() || out.back() - m > tol) out.push_back(m);
    return out;
  }
};

namespace detail {

inline double adaptive_radius(double base, double scale, int m, bool adaptive) {
  if (!adaptive || m < 2) return base;
  return std::max(base, scale * std::pow(1e-13, 1.0 / m));
}

}  // namespace detail

/// Eigenvalues of A grouped into tolerance clusters. Conjugate symmetry of the
/// input multiset is preserved: complex clusters come in conjugate pairs with
/// equal multiplicity, near-real clusters are snapped onto the real axis.
inline Spectrum compute_spectrum(const Matrix& a, const SpectrumOptions& opts = {}) {
  require_square_finite(a, "compute_spectrum");
  const int d = static_cast<int>(a.rows());
  const double scale = std::max(1.0, operator_norm(a));
  const double base = opts.tol * scale;

  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw Error("compute_spectrum: eigenvalue iteration failed");

  struct Group {
    std::complex<double> sum{0.0, 0.0};
    int n = 0;
    double radius = 0.0;
    std::complex<double> centroid() const { return sum / double(n); }
  };
  std::vector<Group> groups;
  groups.reserve(d);
  for (int i = 0; i < d; ++i) groups.push_back({es.eigenvalues()(i), 1, base});

  // Merge over the full (conjugate-symmetric) multiset, so the centroid of a
  // scattered defective group cancels its perturbation back to O(eps).
  //
  // A defective eigenvalue of index m scatters by ~eps^(1/m), which exceeds
  // the pairwise radius of smaller sizes, so pure pairwise agglomeration
  // misses it. Instead: link groups at the radius for size m and accept a
  // component only when its total multiplicity reaches m (validated against
  // its diameter a posteriori).
  bool changed = true;
  while (changed && groups.size() > 1) {
    changed = false;
    for (int m = d; m >= 2 && !changed; --m) {
      const double link = detail::adaptive_radius(base, scale, m, opts.adaptive);
      // connected components under centroid distance <= link
      std::vector<int> comp(groups.size(), -1);
      int ncomp = 0;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (comp[i] >= 0) continue;
        comp[i] = ncomp;
        std::vector<std::size_t> stack{i};
        while (!stack.empty()) {
          const std::size_t u = stack.back();
          stack.pop_back();
          for (std::size_t v = 0; v < groups.size(); ++v)
            if (comp[v] < 0 &&
                std::abs(groups[u].centroid() - groups[v].centroid()) <= link) {
              comp[v] = ncomp;
              stack.push_back(v);
            }
        }
        ++ncomp;
      }
      for (int c = 0; c < ncomp; ++c) {
        std::vector<std::size_t> members;
        int total = 0;
        for (std::size_t i = 0; i < groups.size(); ++i)
          if (comp[i] == c) {
            members.push_back(i);
            total += groups[i].n;
          }
        if (members.size() < 2 || total < m) continue;
        double diam = 0.0;
        for (std::size_t x : members)
          for (std::size_t y : members)
            diam = std::max(diam, std::abs(groups[x].centroid() - groups[y].centroid()));
        if (diam > 3.0 * detail::adaptive_radius(base, scale, total, opts.adaptive)) continue;
        Group merged;
        for (std::size_t x : members) {
          merged.sum += groups[x].sum;
          merged.n += groups[x].n;
        }
        merged.radius = detail::adaptive_radius(base, scale, merged.n, opts.adaptive);
        for (auto it = members.rbegin(); it != members.rend(); ++it)
          groups.erase(groups.begin() + *it);
        groups.push_back(merged);
        changed = true;
        break;
      }
    }
  }

  // Snap near-real centroids, pair up the genuinely complex ones.
  std::vector<EigenvalueCluster> clusters;
  std::vector<bool> used(groups.size(), false);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (used[i]) continue;
    const std::complex<double> z = groups[i].centroid();
    const double rad = groups[i].radius;
    if (std::abs(z.imag()) <= rad) {
      clusters.push_back({{z.real(), 0.0}, groups[i].n, rad});
      used[i] = true;
      continue;
    }
    // locate the conjugate partner
    std::size_t partner = groups.size();
    double bestd = rad;
    for (std::size_t j = 0; j < groups.size(); ++j) {
      if (j == i || used[j]) continue;
      const double dist = std::abs(groups[j].centroid() - std::conj(z));
      if (dist <= bestd) {
        bestd = dist;
        partner = j;
      }
    }
    if (partner == groups.size() || groups[partner].n != groups[i].n) {
      // tolerance-degenerate: no clean conjugate, treat as real
      clusters.push_back({{z.real(), 0.0}, groups[i].n, rad});
      used[i] = true;
      continue;
    }
    const std::complex<double> rep =
        (z + std::conj(groups[partner].centroid())) * 0.5;  // symmetrized
    const std::complex<double> up = rep.imag() >= 0 ? rep : std::conj(rep);
    clusters.push_back({up, groups[i].n, rad});
    clusters.push_back({std::conj(up), groups[i].n, rad});
    used[i] = used[partner] = true;
  }

  std::sort(clusters.begin(), clusters.end(),
            [](const EigenvalueCluster& x, const EigenvalueCluster& y) {
              const double mx = x.modulus(), my = y.modulus();
              if (mx != my) return mx > my;
              if (x.value.real() != y.value.real()) return x.value.real() > y.value.real();
              return x.value.imag() > y.value.imag();
            });

  Spectrum s;
  s.clusters = std::move(clusters);
  s.cluster_tolerance = base;
  s.dim = d;
  return s;
}

/// True iff every eigenvalue modulus exceeds 1 + tol.
inline bool is_expansive(const Matrix& a, double tol) {
  require_square_finite(a, "is_expansive");
  if (tol < 0) throw Error("is_expansive: tol must be >= 0");
  const Spectrum s = compute_spectrum(a);
  if (s.min_modulus() < 1e-12)
    throw SingularMatrix("is_expansive: matrix is numerically singular");
  return s.min_modulus() > 1.0 + tol;
}

inline void require_expansive(const Matrix& a, const std::string& what, double tol = 1e-9) {
  if (!is_expansive(a, tol)) throw NotExpansive(what + ": matrix is not expansive");
}

}  // namespace anibes
