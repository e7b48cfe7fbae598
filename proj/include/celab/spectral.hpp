// ce-lab: spectral substrate. Modulus-sorted eigendecomposition, ordered real
// Schur form (descending block modulus), Moore-Penrose pseudoinverse,
// pseudo-determinant, singular values.
// SPDX-License-Identifier: MIT
#ifndef CELAB_SPECTRAL_HPP
#define CELAB_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "celab/errors.hpp"

namespace celab {

/// Numerical-rank cutoff: singular values (or eigenvalue moduli) at or below
/// 1e-10 * s_max * max(rows, cols) count as zero.
inline double rank_tolerance(double s_max, int rows, int cols) {
  return 1e-10 * s_max * static_cast<double>(std::max(rows, cols));
}

/// Eigendecomposition sorted by descending modulus. Complex conjugate pairs
/// always occupy adjacent positions (the +imaginary member first), so a
/// prefix of length k is a legal retention set iff it does not end between
/// the two members of a pair.
struct Spectrum {
  Eigen::VectorXcd eigenvalues;
  Eigen::VectorXd moduli;
  Eigen::MatrixXcd right_eigenvectors;  // column i pairs with eigenvalues[i]
  std::vector<int> pair_tag;            // 0 real, 1 first of pair, 2 second

  /// True when cutting after the first k eigenvalues would separate a
  /// conjugate pair.
  bool splits_conjugate_pair(int k) const {
    return k >= 1 && k < static_cast<int>(pair_tag.size()) && pair_tag[k] == 2;
  }
};

inline Spectrum eig_sorted(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw StructuralError("eig_sorted: matrix must be square");
  if (!A.allFinite())
    throw StructuralError("eig_sorted: matrix has non-finite entries");
  const int n = static_cast<int>(A.rows());

  Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
  if (es.info() != Eigen::Success)
    throw MathDomainError("eig_sorted: eigensolver did not converge");
  Eigen::VectorXcd vals = es.eigenvalues();
  Eigen::MatrixXcd vecs = es.eigenvectors();

  // Identify conjugate partners before sorting so pairs can be kept adjacent
  // even through exact modulus ties.
  std::vector<int> pair_id(n, -1);
  int next_id = 0;
  auto conj_match = [&](int i, int j) {
    double tol = 1e-8 * (1.0 + std::abs(vals[i]));
    return std::abs(vals[i].real() - vals[j].real()) <= tol &&
           std::abs(vals[i].imag() + vals[j].imag()) <= tol &&
           vals[j].imag() != 0.0;
  };
  for (int i = 0; i < n; ++i) {
    if (vals[i].imag() == 0.0 || pair_id[i] >= 0) continue;
    for (int j = i + 1; j < n; ++j) {
      if (pair_id[j] < 0 && conj_match(i, j)) {
        pair_id[i] = pair_id[j] = next_id++;
        break;
      }
    }
  }

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    double ma = std::abs(vals[a]), mb = std::abs(vals[b]);
    if (ma != mb) return ma > mb;
    if (vals[a].real() != vals[b].real())
      return vals[a].real() > vals[b].real();
    return vals[a].imag() > vals[b].imag();
  });

  // Pull each pair's partner next to it (ties between identical pairs can
  // interleave them), then put the +imaginary member first.
  for (int p = 0; p + 1 < n; ++p) {
    int id = pair_id[idx[p]];
    if (id < 0) continue;
    if (pair_id[idx[p + 1]] != id) {
      for (int q = p + 2; q < n; ++q) {
        if (pair_id[idx[q]] == id) {
          std::swap(idx[p + 1], idx[q]);
          break;
        }
      }
    }
    if (vals[idx[p]].imag() < vals[idx[p + 1]].imag())
      std::swap(idx[p], idx[p + 1]);
    ++p;
  }

  Spectrum sp;
  sp.eigenvalues.resize(n);
  sp.moduli.resize(n);
  sp.right_eigenvectors.resize(n, n);
  sp.pair_tag.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    sp.eigenvalues[i] = vals[idx[i]];
    sp.moduli[i] = std::abs(vals[idx[i]]);
    sp.right_eigenvectors.col(i) = vecs.col(idx[i]);
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (pair_id[idx[i]] >= 0 && pair_id[idx[i]] == pair_id[idx[i + 1]]) {
      sp.pair_tag[i] = 1;
      sp.pair_tag[i + 1] = 2;
      ++i;
    }
  }
  return sp;
}

/// Real Schur form A = Q T Q^T with the diagonal blocks reordered so that
/// block eigenvalue moduli are non-increasing along T. The leading k columns
/// of Q then span the invariant subspace of the k largest-modulus
/// eigenvalues whenever k lands on a block boundary.
struct OrderedSchur {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd T;
  std::vector<int> block_sizes;   // 1s and 2s (2 = conjugate pair block)
  Eigen::VectorXcd eigenvalues;   // in T order, +imaginary member first
  Eigen::VectorXd moduli;
};

namespace detail {

struct SchurBlock {
  int start;
  int size;
  double mod, re, im;  // sort key; im = |Im| of the pair, 0 for real blocks
};

inline std::vector<SchurBlock> scan_schur_blocks(const Eigen::MatrixXd& T) {
  const int n = static_cast<int>(T.rows());
  std::vector<SchurBlock> out;
  int i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      double a = T(i, i), b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1);
      double m = 0.5 * (a + d);
      double disc = 0.25 * (a - d) * (a - d) + b * c;
      SchurBlock blk{i, 2, 0.0, 0.0, 0.0};
      if (disc < 0.0) {
        double s = std::sqrt(-disc);
        blk.mod = std::hypot(m, s);
        blk.re = m;
        blk.im = s;
      } else {
        // A 2x2 block that actually carries real eigenvalues; key by the
        // larger-modulus root.
        double r1 = m + std::sqrt(disc), r2 = m - std::sqrt(disc);
        blk.re = std::abs(r1) >= std::abs(r2) ? r1 : r2;
        blk.mod = std::abs(blk.re);
      }
      out.push_back(blk);
      i += 2;
    } else {
      out.push_back({i, 1, std::abs(T(i, i)), T(i, i), 0.0});
      i += 1;
    }
  }
  return out;
}

// Lexicographic (modulus, real, |imag|) descending; matches the eig_sorted
// tie-break so Schur retention and eigenvalue prefixes agree.
inline bool schur_block_less(const SchurBlock& x, const SchurBlock& y) {
  if (x.mod != y.mod) return x.mod < y.mod;
  if (x.re != y.re) return x.re < y.re;
  return x.im < y.im;
}

}  // namespace detail

inline OrderedSchur ordered_schur(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols())
    throw StructuralError("ordered_schur: matrix must be square");
  if (!A.allFinite())
    throw StructuralError("ordered_schur: matrix has non-finite entries");
  const lapack_int n = static_cast<lapack_int>(A.rows());

  OrderedSchur os;
  os.T = A;  // overwritten with the Schur factor
  os.Q.resize(n, n);
  std::vector<double> wr(n), wi(n);
  lapack_int sdim = 0;
  lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, n, os.T.data(), n,
                    &sdim, wr.data(), wi.data(), os.Q.data(), n);
  if (info != 0)
    throw MathDomainError("ordered_schur: Schur factorization failed (info=" +
                          std::to_string(info) + ")");

  // Selection sort on diagonal blocks; dtrexc performs the orthogonal swaps.
  auto blocks = detail::scan_schur_blocks(os.T);
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    std::size_t best = p;
    for (std::size_t j = p + 1; j < blocks.size(); ++j) {
      if (detail::schur_block_less(blocks[best], blocks[j])) best = j;
    }
    if (best != p) {
      lapack_int ifst = blocks[best].start + 1;
      lapack_int ilst = blocks[p].start + 1;
      info = LAPACKE_dtrexc(LAPACK_COL_MAJOR, 'V', n, os.T.data(), n,
                            os.Q.data(), n, &ifst, &ilst);
      if (info < 0)
        throw MathDomainError("ordered_schur: block reordering failed");
      // info == 1: a swap was too ill-conditioned; accept the partial order.
      blocks = detail::scan_schur_blocks(os.T);
    }
  }

  os.block_sizes.clear();
  os.eigenvalues.resize(n);
  os.moduli.resize(n);
  int pos = 0;
  for (const auto& blk : blocks) {
    os.block_sizes.push_back(blk.size);
    if (blk.size == 1) {
      os.eigenvalues[pos] = std::complex<double>(blk.re, 0.0);
      os.moduli[pos] = blk.mod;
      ++pos;
    } else {
      os.eigenvalues[pos] = std::complex<double>(blk.re, blk.im);
      os.eigenvalues[pos + 1] = std::complex<double>(blk.re, -blk.im);
      os.moduli[pos] = os.moduli[pos + 1] = blk.mod;
      pos += 2;
    }
  }
  return os;
}

/// Orthonormal basis of the invariant subspace belonging to the k
/// largest-modulus eigenvalues, plus their moduli. Throws ConjugatePairSplit
/// when k would cut a 2x2 block in half.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> schur_top_k(
    const Eigen::MatrixXd& A, int k) {
  const int n = static_cast<int>(A.rows());
  if (k < 1 || k > n)
    throw StructuralError("schur_top_k: k must satisfy 1 <= k <= n");
  OrderedSchur os = ordered_schur(A);
  int cum = 0;
  for (int size : os.block_sizes) {
    if (cum == k) break;
    if (cum + size > k) throw ConjugatePairSplit(k, cum, cum + size);
    cum += size;
  }
  return {os.Q.leftCols(k), os.moduli.head(k)};
}

/// Moore-Penrose pseudoinverse via SVD with the shared rank tolerance.
inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  double tol = s.size() > 0 ? rank_tolerance(s(0), static_cast<int>(M.rows()),
                                             static_cast<int>(M.cols()))
                            : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Pseudo-determinant: |product of eigenvalues with modulus above the rank
/// tolerance|. Returns 0 for a numerically zero matrix, |det| for full rank.
inline double pdet(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw StructuralError("pdet: matrix must be square");
  const int n = static_cast<int>(M.rows());
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success)
    throw MathDomainError("pdet: eigensolver did not converge");
  const Eigen::VectorXcd& vals = es.eigenvalues();
  double max_mod = 0.0;
  for (int i = 0; i < n; ++i) max_mod = std::max(max_mod, std::abs(vals[i]));
  double tol = rank_tolerance(max_mod, n, n);
  std::complex<double> prod(1.0, 0.0);
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (std::abs(vals[i]) > tol) {
      prod *= vals[i];
      any = true;
    }
  }
  return any ? std::abs(prod) : 0.0;
}

/// Singular values in non-increasing order.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues();
}

}  // namespace celab

#endif  // CELAB_SPECTRAL_HPP
