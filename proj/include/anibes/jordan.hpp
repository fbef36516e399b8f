#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "anibes/matrix.hpp"
#include "anibes/spectrum.hpp"

namespace anibes {

struct JordanOptions {
  SpectrumOptions spectrum{};
  double rank_tol = 1e-8;    // relative SVD threshold for kernel ranks
  double cond_cap = 1e8;     // reject bases with cond(C) beyond this
  double tau_jordan = 1e-7;  // reconstruction bound, relative to max(1, ||A||)
};

// One aggregate block of the real Jordan form: all chains belonging to one
// distinct eigenvalue (or conjugate pair) merged, chains ordered by
// descending length. Complex pairs use 2x2 cells M_z = [[Re z, Im z],
// [-Im z, Re z]]; the block then has M_lambda cells on the diagonal and
// identity cells where a super-diagonal flag is set.
struct RealJordanBlock {
  double modulus = 0.0;                   // r = |lambda| > 0
  std::complex<double> rotation{1.0, 0};  // unit w with lambda = r*w; +-1 if real
  int cell = 1;                           // 1 real eigenvalue, 2 conjugate pair
  int size = 0;                           // number of diagonal cells
  int offset = 0;                         // starting row/col inside J
  std::vector<int> super_flags;           // size-1 entries in {0,1}
  std::vector<int> chain_sizes;           // descending, sums to size

  int extent() const { return size * cell; }
  std::complex<double> value() const { return modulus * rotation; }
  bool real() const { return cell == 1; }

  Matrix dense() const {
    Matrix j = Matrix::Zero(extent(), extent());
    if (cell == 1) {
      const double lam = modulus * rotation.real();
      for (int i = 0; i < size; ++i) j(i, i) = lam;
      for (int i = 0; i + 1 < size; ++i) j(i, i + 1) = super_flags[i];
    } else {
      const double re = modulus * rotation.real();
      const double im = modulus * rotation.imag();
      for (int i = 0; i < size; ++i) {
        j(2 * i, 2 * i) = re;
        j(2 * i, 2 * i + 1) = im;
        j(2 * i + 1, 2 * i) = -im;
        j(2 * i + 1, 2 * i + 1) = re;
      }
      for (int i = 0; i + 1 < size; ++i)
        if (super_flags[i]) {
          j(2 * i, 2 * i + 2) = 1.0;
          j(2 * i + 1, 2 * i + 3) = 1.0;
        }
    }
    return j;
  }
};

struct RealJordanDecomposition {
  Matrix basis;      // C with A ~= C * J * C^{-1}
  Matrix basis_inv;  // cached C^{-1}
  std::vector<RealJordanBlock> blocks;  // strictly decreasing modulus order
  double reconstruction_error = 0.0;
  int dim = 0;

  Matrix jordan_matrix() const {
    Matrix j = Matrix::Zero(dim, dim);
    for (const auto& b : blocks) j.block(b.offset, b.offset, b.extent(), b.extent()) = b.dense();
    return j;
  }
};

namespace detail {

// Orthonormal kernel basis of m, singular values at or below thresh count as zero.
template <class Mat>
Mat kernel_basis(const Mat& m, double thresh, int max_dim) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const int n = static_cast<int>(m.cols());
  int rank = 0;
  while (rank < n && sv(rank) > thresh) ++rank;
  int kdim = n - rank;
  if (kdim > max_dim) kdim = max_dim;  // keep only the most-null directions
  return svd.matrixV().rightCols(kdim);
}

// Kernel of shifted^power with the same thresholding the chain construction
// uses: relative SVD cut plus floors for the cluster radius and for the
// roundoff noise of the computed power.
template <class Mat>
Mat power_kernel(const Mat& shifted, int power, int max_dim, double rank_tol, double radius) {
  Mat p = shifted;
  for (int k = 1; k < power; ++k) p = p * shifted;
  const double nrm = std::max(1.0, shifted.norm());
  const double thresh = std::max({rank_tol * p.norm(),
                                  std::pow(2.0 * radius, double(power)),
                                  1e-12 * std::pow(nrm, double(power))});
  return kernel_basis(p, thresh, max_dim);
}

// Jordan chains for one eigenvalue of n = a - lambda*I with algebraic
// multiplicity mult. Chains are returned top vector first. Scalar is double
// for real eigenvalues and complex<double> for one member of a pair.
template <class Mat, class Vec>
std::vector<std::vector<Vec>> jordan_chains(const Mat& n, int mult, double rank_tol,
                                            double cluster_radius) {
  const int d = static_cast<int>(n.rows());
  const double nrm = std::max(1.0, n.norm());

  // kernel filtration K_m = Ker(n^m) until the dimension saturates at mult.
  // The threshold has two floors: the cluster radius (intra-cluster spread is
  // "zero" by definition of the cluster) and the roundoff noise of the
  // computed power (a mathematically nilpotent power is all noise).
  std::vector<Mat> kernels;  // kernels[m-1] = basis of K_m
  std::vector<int> dims{0};
  Mat p = Mat::Identity(d, d);
  for (int m = 1; m <= d; ++m) {
    p = p * n;
    const double thresh = std::max({rank_tol * p.norm(),
                                    std::pow(2.0 * cluster_radius, double(m)),
                                    1e-12 * std::pow(nrm, double(m))});
    Mat k = kernel_basis(p, thresh, mult);
    kernels.push_back(k);
    dims.push_back(static_cast<int>(k.cols()));
    if (dims.back() >= mult) break;
  }
  const int depth = static_cast<int>(kernels.size());

  // Weyr counts: w[m] = #chains of length >= m
  std::vector<int> w(depth + 2, 0);
  for (int m = 1; m <= depth; ++m) w[m] = dims[m] - dims[m - 1];
  for (int m = depth; m >= 2; --m) w[m - 1] = std::max(w[m - 1], w[m]);  // sanitize

  std::vector<std::vector<Vec>> chains;
  for (int m = depth; m >= 1; --m) {
    const int n_new = w[m] - w[m + 1];
    if (n_new <= 0) continue;
    // obstructions: K_{m-1} plus the order-(m-1) vectors of longer chains
    std::vector<Vec> obst;
    if (m >= 2)
      for (int c = 0; c < kernels[m - 2].cols(); ++c) obst.push_back(kernels[m - 2].col(c));
    for (const auto& ch : chains) {
      const int len = static_cast<int>(ch.size());
      if (len >= m) obst.push_back(ch[len - m]);
    }
    // orthonormalize the obstruction set
    Mat q(d, static_cast<int>(obst.size()));
    int qc = 0;
    for (const auto& v : obst) {
      Vec r = v;
      for (int c = 0; c < qc; ++c) r -= q.col(c).dot(r) * q.col(c);
      const double rn = r.norm();
      if (rn > 1e-12) q.col(qc++) = r / rn;
    }
    const Mat& cand = kernels[m - 1];
    for (int picked = 0; picked < n_new; ++picked) {
      int best = -1;
      double best_res = 0.0;
      Vec best_vec;
      for (int c = 0; c < cand.cols(); ++c) {
        Vec r = cand.col(c);
        for (int qi = 0; qi < qc; ++qi) r -= q.col(qi).dot(r) * q.col(qi);
        const double rn = r.norm();
        if (rn > best_res) {
          best_res = rn;
          best = c;
          best_vec = r;
        }
      }
      if (best < 0 || best_res < 1e-10)
        throw IllConditionedBasis(
            "real_jordan_form: could not extend a Jordan chain; tolerances are "
            "inconsistent for this input");
      Vec top = best_vec / best_res;
      if (qc >= q.cols()) q.conservativeResize(Eigen::NoChange, qc + n_new);
      q.col(qc++) = top;
      std::vector<Vec> chain;
      chain.push_back(top);
      for (int i = 1; i < m; ++i) chain.push_back(n * chain.back());
      chains.push_back(std::move(chain));
    }
  }
  std::stable_sort(chains.begin(), chains.end(),
                   [](const auto& x, const auto& y) { return x.size() > y.size(); });
  return chains;
}

}  // namespace detail

/// Real Jordan normal form A = C * J * C^{-1}. Chains belonging to one distinct
/// eigenvalue are aggregated into a single block; blocks are ordered by
/// strictly decreasing modulus, ties by decreasing real part.
inline RealJordanDecomposition real_jordan_form(const Matrix& a, const JordanOptions& opts = {}) {
  require_square_finite(a, "real_jordan_form");
  const int d = static_cast<int>(a.rows());
  const Spectrum spec = compute_spectrum(a, opts.spectrum);

  RealJordanDecomposition out;
  out.dim = d;
  out.basis = Matrix::Zero(d, d);

  int col = 0;
  for (const auto& cl : spec.clusters) {
    if (cl.value.imag() < 0.0) continue;  // the +Im representative covers the pair
    RealJordanBlock blk;
    blk.modulus = cl.modulus();
    blk.rotation = cl.value / cl.modulus();
    blk.cell = (cl.value.imag() == 0.0) ? 1 : 2;
    blk.offset = col;

    if (blk.cell == 1) {
      blk.rotation = std::complex<double>(cl.value.real() >= 0 ? 1.0 : -1.0, 0.0);
      const Matrix n = a - cl.value.real() * Matrix::Identity(d, d);
      auto chains = detail::jordan_chains<Matrix, Vector>(n, cl.multiplicity, opts.rank_tol,
                                                          cl.radius);
      for (const auto& ch : chains) {
        const int len = static_cast<int>(ch.size());
        double mx = 0.0;
        for (const auto& v : ch) mx = std::max(mx, v.norm());
        for (int i = len - 1; i >= 0; --i) out.basis.col(col++) = ch[i] / mx;
        blk.chain_sizes.push_back(len);
      }
    } else {
      const ComplexMatrix n =
          ComplexMatrix(a.cast<std::complex<double>>()) -
          cl.value * ComplexMatrix::Identity(d, d);
      auto chains = detail::jordan_chains<ComplexMatrix, ComplexVector>(
          n, cl.multiplicity, opts.rank_tol, cl.radius);
      for (const auto& ch : chains) {
        const int len = static_cast<int>(ch.size());
        double mx = 0.0;
        for (const auto& v : ch)
          mx = std::max({mx, v.real().norm(), v.imag().norm()});
        for (int i = len - 1; i >= 0; --i) {
          out.basis.col(col++) = ch[i].real() / mx;
          out.basis.col(col++) = ch[i].imag() / mx;
        }
        blk.chain_sizes.push_back(len);
      }
    }
    blk.size = 0;
    for (int s : blk.chain_sizes) blk.size += s;
    blk.super_flags.assign(std::max(0, blk.size - 1), 0);
    int pos = 0;
    for (int s : blk.chain_sizes) {
      for (int i = 0; i + 1 < s; ++i) blk.super_flags[pos + i] = 1;
      pos += s;
    }
    out.blocks.push_back(std::move(blk));
  }
  if (col != d)
    throw IllConditionedBasis("real_jordan_form: chain construction did not span R^d");

  const double cond = condition_number(out.basis);
  if (!(cond < opts.cond_cap))
    throw IllConditionedBasis("real_jordan_form: cond(C) = " + std::to_string(cond) +
                              " exceeds the configured cap");
  out.basis_inv = out.basis.fullPivLu().inverse();
  out.reconstruction_error =
      operator_norm(out.basis * out.jordan_matrix() * out.basis_inv - a);
  const double scale = std::max(1.0, operator_norm(a));
  if (!(out.reconstruction_error <= opts.tau_jordan * scale))
    throw IllConditionedBasis(
        "real_jordan_form: reconstruction error " + std::to_string(out.reconstruction_error) +
        " exceeds tau_jordan; raise the tolerance or precondition the input");
  return out;
}

}  // namespace anibes
