#include <catch2/catch_amalgamated.hpp>

#include "anibes/exp_log.hpp"
#include "support.hpp"

using namespace anibes;

TEST_CASE("nilpotent_log on simple unipotent matrices", "[explog]") {
  CHECK(nilpotent_log(Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

  Matrix u(2, 2);
  u << 1, 1, 0, 1;
  Matrix n(2, 2);
  n << 0, 1, 0, 0;
  CHECK((nilpotent_log(u) - n).cwiseAbs().maxCoeff() < 1e-14);

  // ones on the superdiagonal: log = N - N^2/2
  Matrix u3 = Matrix::Identity(3, 3);
  u3(0, 1) = u3(1, 2) = 1.0;
  Matrix expect(3, 3);
  expect << 0, 1, -0.5, 0, 0, 1, 0, 0, 0;
  const Matrix x = nilpotent_log(u3);
  CHECK((x - expect).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((structured_exp(x) - u3).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("nilpotent_log rejects non-unipotent input", "[explog]") {
  Matrix a(2, 2);
  a << 2, 0, 0, 1;
  CHECK_THROWS_AS(nilpotent_log(a), NotUnipotent);
}

TEST_CASE("structured_exp on simple matrices", "[explog]") {
  CHECK((structured_exp(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-14);

  const Matrix two = structured_exp(std::log(2.0) * Matrix::Identity(2, 2));
  CHECK((two - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  Matrix x(2, 2);
  x << std::log(2.0), 1, 0, std::log(2.0);
  Matrix expect(2, 2);
  expect << 2, 2, 0, 2;
  CHECK((structured_exp(x) - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exp/log roundtrip on random unipotent matrices", "[explog]") {
  auto rng = testing::make_rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + int(trial % 5);  // up to 6
    const Matrix u = testing::random_unipotent(d, rng);
    const Matrix x = nilpotent_log(u);
    CHECK((structured_exp(x) - u).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("hinted block exponential agrees with the dense route", "[explog]") {
  auto rng = testing::make_rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + int(trial % 4);
    const Matrix a = testing::random_positive_expansive(d, rng);
    const auto rjd = real_jordan_form(a);
    // X = C * log(J) * C^{-1} is block-compatible with the hint
    Matrix logj = Matrix::Zero(d, d);
    for (const auto& b : rjd.blocks) {
      const Matrix jb = b.dense();
      const double lam = b.value().real();
      logj.block(b.offset, b.offset, b.extent(), b.extent()) =
          std::log(lam) * Matrix::Identity(b.extent(), b.extent()) +
          nilpotent_log(jb / lam);
    }
    const Matrix x = rjd.basis * logj * rjd.basis_inv;
    const Matrix via_hint = structured_exp(x, &rjd);
    const Matrix dense = structured_exp(x);
    const double scale = std::max(1.0, operator_norm(dense));
    CHECK(operator_norm(via_hint - dense) < 1e-10 * scale);
    CHECK(operator_norm(via_hint - a) < 1e-8 * scale);
  }
}
