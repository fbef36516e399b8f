#include <catch2/catch_amalgamated.hpp>

#include "anibes/eigenspaces.hpp"
#include "support.hpp"

using namespace anibes;

namespace {

// distance between the spans of two orthonormal bases: sin of the largest
// principal angle, symmetrized; 1 when the dimensions differ
double span_distance(const Matrix& qa, const Matrix& qb) {
  if (qa.cols() != qb.cols()) return 1.0;
  if (qa.cols() == 0) return 0.0;
  const Matrix ra = qb - qa * (qa.transpose() * qb);
  const Matrix rb = qa - qb * (qb.transpose() * qa);
  return std::max(operator_norm(ra), operator_norm(rb));
}

Matrix span_of(std::initializer_list<Vector> vs) {
  Matrix m(vs.begin()->size(), static_cast<int>(vs.size()));
  int c = 0;
  for (const auto& v : vs) m.col(c++) = v / v.norm();
  return m;
}

}  // namespace

TEST_CASE("generalized eigenspace of a diagonal matrix", "[spectral]") {
  Matrix a(2, 2);
  a << 3, 0, 0, 2;
  const auto e2 = generalized_eigenspace(a, 2.0, 2, 1e-8);
  REQUIRE(e2.dim() == 1);
  CHECK(span_distance(e2.basis, span_of({Vector::Unit(2, 1)})) < 1e-10);

  // nothing below 1.5, and m = 0 contributes nothing at modulus 1.5
  CHECK(generalized_eigenspace(a, 1.5, 0, 1e-8).dim() == 0);
}

TEST_CASE("generalized eigenspace of a Jordan block", "[spectral]") {
  Matrix a(2, 2);
  a << 2, 1, 0, 2;
  const auto e1 = generalized_eigenspace(a, 2.0, 1, 1e-8);
  REQUIRE(e1.dim() == 1);
  CHECK(span_distance(e1.basis, span_of({Vector::Unit(2, 0)})) < 1e-8);
  CHECK(generalized_eigenspace(a, 2.0, 2, 1e-8).dim() == 2);
}

TEST_CASE("filtration is monotone and saturates", "[spectral]") {
  auto rng = testing::make_rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 2 + int(trial % 4);
    const Matrix a = testing::random_expansive(d, rng);
    const Spectrum s = compute_spectrum(a);
    const double rtop = s.max_modulus() * 1.5;
    CHECK(generalized_eigenspace(a, rtop, d, 1e-6).dim() == d);
    for (double r : s.distinct_moduli(1e-6)) {
      int prev = 0;
      for (int m = 0; m <= d; ++m) {
        const auto e = generalized_eigenspace(a, r, m, 1e-6);
        CHECK(e.dim() >= prev);
        prev = e.dim();
        // A-invariance of the span
        if (e.dim() > 0) {
          const Matrix img = a * e.basis;
          const Matrix res = img - e.basis * (e.basis.transpose() * img);
          CHECK(operator_norm(res) < 1e-7 * std::max(1.0, operator_norm(a)));
        }
      }
      CHECK(prev >= 1);
    }
  }
}

TEST_CASE("realified dimensions are even for conjugate pairs", "[spectral]") {
  Matrix a(2, 2);
  a << 1, -2, 2, 1;
  const auto e = generalized_eigenspace(a, std::sqrt(5.0), 2, 1e-8);
  CHECK(e.dim() == 2);
}

TEST_CASE("growth exponents on closed-form cases", "[spectral]") {
  Matrix j3(3, 3);
  j3 << 2, 1, 0, 0, 2, 1, 0, 0, 2;
  const auto g = growth_exponents(j3, Vector::Unit(3, 2), 10, 60);
  CHECK(g.polynomial_degree == 2);
  CHECK(g.rate == Catch::Approx(2.0).margin(0.02));
  CHECK(g.fit_residual < 0.1);

  Matrix d32(2, 2);
  d32 << 3, 0, 0, 2;
  const auto g2 = growth_exponents(d32, Vector::Unit(2, 0), 10, 60);
  CHECK(g2.polynomial_degree == 0);
  CHECK(g2.rate == Catch::Approx(3.0).margin(0.01));

  CHECK_THROWS_AS(growth_exponents(d32, Vector::Zero(2), 10, 60), ZeroVector);
}

namespace {

// Basis-difference vectors of the filtration must grow like k^m r^k. The
// asymptotics only start past a non-constructive k0: an orthogonal-complement
// witness keeps O(1) *spectral* content of the lower layers (the spectral
// decomposition is not orthogonal), and floating point adds ~1e-12 of the
// faster layers. Both stay harmless inside the pinned window [10, 80] when
// (a) the matrix is exactly block diagonal, or (b) it is rotation-conjugated
// with two well-separated moduli and semisimple lower layer.
void check_growth_layers(const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  const Spectrum s = compute_spectrum(a);
  for (double r : s.distinct_moduli(1e-6)) {
    for (int m = 0; m < d; ++m) {
      const auto em = generalized_eigenspace(a, r, m, 1e-6);
      const auto em1 = generalized_eigenspace(a, r, m + 1, 1e-6);
      if (em1.dim() == em.dim()) continue;
      // witness vector in E(A,r,m+1) orthogonal to E(A,r,m)
      Vector z = em1.basis.col(em1.dim() - 1);
      if (em.dim() > 0) z -= em.basis * (em.basis.transpose() * z);
      if (z.norm() < 1e-8) continue;
      z /= z.norm();
      const auto g = growth_exponents(a, z, 10, 80);
      CHECK(g.polynomial_degree == m);
      CHECK(g.rate == Catch::Approx(r).epsilon(0.02));
      CHECK(g.fit_residual <= 0.1);
    }
  }
}

}  // namespace

TEST_CASE("growth exponents recover the filtration layer", "[spectral]") {
  auto rng = testing::make_rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = 2 + int(trial % 3);
    // exact block diagonal: separated moduli, one defective or rotation block
    Matrix j = Matrix::Zero(d, d);
    double r = 1.3 + u(rng);
    std::vector<double> rs;
    for (int i = 0; i < d; ++i) {
      rs.push_back(r);
      j(i, i) = r;
      r *= 1.45 + 0.2 * u(rng);
    }
    if (d >= 2 && trial % 3 == 0) {  // defective top pair
      j(0, 0) = j(1, 1) = rs[1];
      j(0, 1) = 1.0;
    } else if (d >= 2 && trial % 3 == 1) {  // exact rotation cell
      const double th = 0.7;
      j.block(0, 0, 2, 2) << rs[0] * std::cos(th), rs[0] * std::sin(th),
          -rs[0] * std::sin(th), rs[0] * std::cos(th);
      j(1, 1) = j(0, 0);
    }
    check_growth_layers(j);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + int(trial % 3);
    // rotation-conjugated, two real moduli with ratio ~1.4, lower layer
    // semisimple, top layer defective for d >= 3
    const double rlo = 1.6 + 0.3 * u(rng);
    const double rhi = rlo * (1.38 + 0.06 * u(rng));
    Matrix j = Matrix::Zero(d, d);
    j(0, 0) = rlo;
    for (int i = 1; i < d; ++i) {
      j(i, i) = rhi;
      if (i > 1) j(i - 1, i) = 1.0;  // one defective chain at the top modulus
    }
    const Matrix q = testing::random_rotation(d, rng);
    check_growth_layers(q * j * q.transpose());
  }
}

TEST_CASE("eigen bounds examples", "[spectral]") {
  const auto b = eigen_bounds(2.0 * Matrix::Identity(2, 2), 0.05);
  CHECK(b.lambda_minus == Catch::Approx(1.9));
  CHECK(b.lambda_plus == Catch::Approx(2.1));
  CHECK(b.c < 1.2);  // |A^j x| = 2^j |x| exactly

  Matrix d32(2, 2);
  d32 << 3, 0, 0, 2;
  const auto b2 = eigen_bounds(d32, 0.05);
  CHECK(b2.lambda_minus == Catch::Approx(1.9));
  CHECK(b2.lambda_plus == Catch::Approx(3.15));

  Matrix tight(2, 2);
  tight << 1.0001, 0, 0, 2;
  CHECK_THROWS_AS(eigen_bounds(tight, 0.5), NotExpansive);
}

TEST_CASE("sampled eigenvalue sandwich holds for random expansive matrices", "[spectral]") {
  auto rng = testing::make_rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + int(trial % 4);
    const Matrix a = testing::random_expansive(d, rng);
    const Spectrum s = compute_spectrum(a);
    const double margin = std::min(0.05, (s.min_modulus() - 1.0) / 2);
    const auto b = eigen_bounds(a, margin, 99);
    for (int sample = 0; sample < 100; ++sample) {
      Vector w = testing::unit_vector(rng, d);
      double logn = 0.0;
      for (int j = 0; j <= 40; ++j) {
        if (j > 0) {
          w = a * w;
          const double nn = w.norm();
          logn += std::log(nn);
          w /= nn;
        }
        CHECK(logn >= j * std::log(b.lambda_minus) - std::log(b.c) - 1e-9);
        CHECK(logn <= j * std::log(b.lambda_plus) + std::log(b.c) + 1e-9);
      }
    }
  }
}
