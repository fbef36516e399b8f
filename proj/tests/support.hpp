#pragma once

// Shared deterministic generators for the test and acceptance suites.

#include <algorithm>
#include <complex>
#include <random>
#include <vector>

#include "anibes/matrix.hpp"

namespace anibes::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Vector unit_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = g(rng);
  } while (v.norm() < 1e-8);
  return v / v.norm();
}

inline Matrix random_rotation(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  return q;
}

// Invertible with condition number about cond (default mild).
inline Matrix random_well_conditioned(int d, std::mt19937_64& rng, double cond = 8.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix q1 = random_rotation(d, rng), q2 = random_rotation(d, rng);
  Vector s(d);
  const double lo = 1.0 / std::sqrt(cond), hi = std::sqrt(cond);
  for (int i = 0; i < d; ++i) s(i) = lo * std::pow(hi / lo, u(rng));
  return q1 * s.asDiagonal() * q2;
}

struct ExpansiveSpec {
  double modulus_lo = 1.1;
  double modulus_hi = 4.0;
  bool allow_complex = true;
  bool allow_defective = true;
  bool positive_spectrum = false;  // restrict to real positive eigenvalues
  double basis_cond = 8.0;
};

// Random expansive matrix with prescribed spectral texture: built from an
// explicit real Jordan matrix (so defective structure is exact) conjugated by
// a mildly conditioned basis. Distinct moduli are kept >= 0.05 apart.
inline Matrix random_expansive(int d, std::mt19937_64& rng, const ExpansiveSpec& spec = {}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> moduli;
  auto fresh_modulus = [&]() {
    for (int tries = 0; tries < 256; ++tries) {
      const double r = spec.modulus_lo + (spec.modulus_hi - spec.modulus_lo) * u(rng);
      bool ok = true;
      for (double m : moduli)
        if (std::abs(m - r) < 0.05) ok = false;
      if (ok) {
        moduli.push_back(r);
        return r;
      }
    }
    moduli.push_back(spec.modulus_hi);
    return spec.modulus_hi;
  };

  Matrix j = Matrix::Zero(d, d);
  int pos = 0;
  while (pos < d) {
    const int rem = d - pos;
    const double r = fresh_modulus();
    enum Kind { kReal, kNegReal, kComplex, kDefective2, kDefective3, kComplexDefective };
    std::vector<Kind> kinds{kReal};
    if (!spec.positive_spectrum) kinds.push_back(kNegReal);
    if (spec.allow_complex && !spec.positive_spectrum && rem >= 2) kinds.push_back(kComplex);
    if (spec.allow_defective && rem >= 2) kinds.push_back(kDefective2);
    if (spec.allow_defective && rem >= 3) kinds.push_back(kDefective3);
    if (spec.allow_complex && spec.allow_defective && !spec.positive_spectrum && rem >= 4)
      kinds.push_back(kComplexDefective);
    const Kind kind = kinds[static_cast<std::size_t>(u(rng) * kinds.size()) % kinds.size()];
    switch (kind) {
      case kReal:
        j(pos, pos) = r;
        pos += 1;
        break;
      case kNegReal:
        j(pos, pos) = -r;
        pos += 1;
        break;
      case kComplex: {
        const double th = 0.2 + 2.7 * u(rng);
        j.block(pos, pos, 2, 2) << r * std::cos(th), r * std::sin(th), -r * std::sin(th),
            r * std::cos(th);
        pos += 2;
        break;
      }
      case kDefective2:
      case kDefective3: {
        const int sz = kind == kDefective2 ? 2 : 3;
        for (int i = 0; i < sz; ++i) j(pos + i, pos + i) = r;
        for (int i = 0; i + 1 < sz; ++i) j(pos + i, pos + i + 1) = 1.0;
        pos += sz;
        break;
      }
      case kComplexDefective: {
        const double th = 0.2 + 2.7 * u(rng);
        Matrix cell(2, 2);
        cell << r * std::cos(th), r * std::sin(th), -r * std::sin(th), r * std::cos(th);
        j.block(pos, pos, 2, 2) = cell;
        j.block(pos + 2, pos + 2, 2, 2) = cell;
        j.block(pos, pos + 2, 2, 2) = Matrix::Identity(2, 2);
        pos += 4;
        break;
      }
    }
  }
  const Matrix c = random_well_conditioned(d, rng, spec.basis_cond);
  return c * j * c.fullPivLu().inverse();
}

inline Matrix random_positive_expansive(int d, std::mt19937_64& rng, bool allow_defective = true) {
  ExpansiveSpec spec;
  spec.positive_spectrum = true;
  spec.allow_complex = false;
  spec.allow_defective = allow_defective;
  return random_expansive(d, rng, spec);
}

// Spectrally tame inputs for assertions that pair a verdict with a
// boundedness probe: the computed norm series of an equivalent pair drifts
// like eps_machine * (r_max/r_min)^k, so a wide modulus spread overruns any
// legal probe window. Narrow band, mild basis.
inline Matrix tame_expansive(int d, std::mt19937_64& rng, bool positive_spectrum = false) {
  ExpansiveSpec spec;
  spec.modulus_lo = 1.9;
  spec.modulus_hi = 2.4;
  spec.basis_cond = 4.0;
  spec.positive_spectrum = positive_spectrum;
  spec.allow_complex = !positive_spectrum;
  return random_expansive(d, rng, spec);
}

// Unipotent: identity plus nilpotent, conjugated by a rotation.
inline Matrix random_unipotent(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix n = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = i + 1; k < d; ++k) n(i, k) = u(rng);
  const Matrix q = random_rotation(d, rng);
  return q * (Matrix::Identity(d, d) + n) * q.transpose();
}

}  // namespace anibes::testing
