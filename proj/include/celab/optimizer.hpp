// ce-lab: synthesis of coarse maps attaining the maximal causal emergence:
// Schur-subspace selection with determinant-constraint scaling, the 3-D
// solution-set circle, a random-search baseline, and the orthonormal-row
// construction for shared eigenvector bases.
// SPDX-License-Identifier: MIT
#ifndef CELAB_OPTIMIZER_HPP
#define CELAB_OPTIMIZER_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "celab/emergence.hpp"
#include "celab/errors.hpp"
#include "celab/rng.hpp"
#include "celab/spectral.hpp"
#include "celab/system.hpp"

namespace celab {

struct OptimalCoarsening {
  CoarseMap W;
  double achieved_delta_j = 0.0;
  double analytic_bound = 0.0;  // delta_j_max; NaN when k is inadmissible
  double gap = 0.0;             // bound - achieved
  Eigen::VectorXd retained_moduli;
};

namespace detail {

// Multiset equality of two complex eigenvalue lists within tol.
inline bool eigs_match(Eigen::VectorXcd a, Eigen::VectorXcd b, double tol) {
  if (a.size() != b.size()) return false;
  auto lt = [](const std::complex<double>& x, const std::complex<double>& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  };
  std::sort(a.data(), a.data() + a.size(), lt);
  std::sort(b.data(), b.data() + b.size(), lt);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

// Flip row signs so the first non-negligible entry of each row is positive.
inline void canonicalize_row_signs(Eigen::MatrixXd& W) {
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    double scale = W.row(r).cwiseAbs().maxCoeff();
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
      if (std::abs(W(r, c)) > 1e-12 * scale) {
        if (W(r, c) < 0.0) W.row(r) = -W.row(r);
        break;
      }
    }
  }
}

}  // namespace detail

/// Optimal coarse map at macro dimension k under entropy-gap budget eta.
/// The rows start as an orthonormal basis of the left invariant subspace of
/// the top-k eigenvalues (so W A W^+ keeps exactly those eigenvalues) and
/// are then scaled by one scalar so the entropy-gap constraint binds with
/// equality, which maximizes the determinism term.
inline OptimalCoarsening optimal_w(const LinearSystem& sys, int k,
                                   double eta) {
  if (eta < 0.0) throw MathDomainError("optimal_w: eta must be >= 0");
  auto [Qk, retained] = schur_top_k(sys.A.transpose(), k);
  Spectrum sp = eig_sorted(sys.A);
  if (retained.minCoeff() <=
      rank_tolerance(sp.moduli(0), sys.n, sys.n))
    throw MathDomainError("optimal_w: zero eigenvalue in the retained set");
  if (k < sys.n && sp.moduli(k - 1) - sp.moduli(k) < 1e-8 * sp.moduli(0))
    std::cerr << "optimal_w: warning: eigenvalue moduli nearly tie at the k "
                 "boundary; the maximizer is not unique\n";

  Eigen::MatrixXd W0 = Qk.transpose();
  Eigen::MatrixXd Am0 = W0 * sys.A * Qk;  // pinv(W0) = Qk for orthonormal rows
  Eigen::EigenSolver<Eigen::MatrixXd> es(Am0, false);
  if (!detail::eigs_match(es.eigenvalues(), sp.eigenvalues.head(k),
                          1e-8 * (1.0 + sp.moduli(0))))
    throw MathDomainError(
        "optimal_w: retained subspace does not carry the top-k eigenvalues");

  double ln_c = 0.5 * (-2.0 * eta + log_det_spd(sys.Sigma) / sys.n -
                       log_det_spd(W0 * sys.Sigma * W0.transpose()) / k);
  Eigen::MatrixXd W = std::exp(ln_c) * W0;
  detail::canonicalize_row_signs(W);

  OptimalCoarsening out;
  out.W = make_coarse_map(W);
  out.achieved_delta_j = delta_j(sys, out.W).delta_j;
  out.analytic_bound = delta_j_max(sys, k, eta);
  out.gap = out.analytic_bound - out.achieved_delta_j;
  out.retained_moduli = retained;
  return out;
}

/// The attaining w1 rows for the 3-D isotropic case form a circle: the
/// intersection of the plane perpendicular to the discarded eigenvector v3
/// with the sphere of radius sqrt(exp(-2 eta) / |w2|^2). point(t) walks the
/// circle; sample_map(t) co-rotates w2 so every sampled map keeps w1
/// perpendicular to w2 and preserves the constraint determinant.
struct CircleSolutionSet {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
  Eigen::Vector3d basis_u;  // in-plane, perpendicular to w2
  Eigen::Vector3d basis_v;  // in-plane, along w2
  Eigen::Vector3d constraint_plane_normal;  // normalized v3
  double w2_norm = 0.0;

  Eigen::Vector3d point(double t) const {
    return center + radius * (std::cos(t) * basis_u + std::sin(t) * basis_v);
  }

  CoarseMap sample_map(double t) const {
    Eigen::Vector3d w1 = point(t);
    Eigen::Vector3d w2 =
        w2_norm * (-std::sin(t) * basis_u + std::cos(t) * basis_v);
    Eigen::MatrixXd W(2, 3);
    W.row(0) = w1.transpose();
    W.row(1) = w2.transpose();
    return make_coarse_map(W);
  }
};

inline CircleSolutionSet circle_solution_set(const Eigen::Vector3d& v3,
                                             const Eigen::Vector3d& w2,
                                             double sigma, double eta) {
  if (v3.norm() == 0.0)
    throw StructuralError("circle_solution_set: v3 must be nonzero");
  if (w2.norm() == 0.0)
    throw StructuralError("circle_solution_set: w2 must be nonzero");
  if (!(sigma > 0.0))
    throw MathDomainError("circle_solution_set: sigma must be positive");
  if (eta < 0.0)
    throw MathDomainError("circle_solution_set: eta must be >= 0");
  Eigen::Vector3d normal = v3.normalized();
  if (std::abs(w2.dot(normal)) > 1e-9 * w2.norm())
    throw StructuralError("circle_solution_set: w2 must be perpendicular to v3");

  CircleSolutionSet c;
  c.constraint_plane_normal = normal;
  c.w2_norm = w2.norm();
  c.radius = std::sqrt(std::exp(-2.0 * eta)) / c.w2_norm;
  c.basis_v = w2.normalized();
  c.basis_u = c.basis_v.cross(normal).normalized();
  return c;
}

/// Baseline: best delta_j over n_samples standard-normal draws, each scaled
/// so the entropy-gap constraint binds with equality. Deterministic per
/// seed; exact delta_j ties resolve to the lexicographically smaller W.
inline OptimalCoarsening random_search(const LinearSystem& sys, int k,
                                       double eta, int n_samples,
                                       std::uint64_t seed) {
  if (n_samples < 1)
    throw StructuralError("random_search: n_samples must be >= 1");
  if (k < 1 || k > sys.n)
    throw StructuralError("random_search: k must satisfy 1 <= k <= n");
  const double ld_sigma = log_det_spd(sys.Sigma);

  double best_dj = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_w;
  auto lex_less = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        if (a(r, c) != b(r, c)) return a(r, c) < b(r, c);
      }
    return false;
  };

  for (int i = 0; i < n_samples; ++i) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(i)));
    Eigen::MatrixXd G(k, sys.n);
    do {
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < sys.n; ++c) G(r, c) = rng.normal();
    } while (singular_values(G)(k - 1) <=
             rank_tolerance(singular_values(G)(0), k, sys.n));

    double ln_c = 0.5 * (-2.0 * eta + ld_sigma / sys.n -
                         log_det_spd(G * sys.Sigma * G.transpose()) / k);
    Eigen::MatrixXd W = std::exp(ln_c) * G;
    double dj = delta_j(sys, CoarseMap{W, k}).delta_j;
    if (dj > best_dj || (dj == best_dj && lex_less(W, best_w))) {
      best_dj = dj;
      best_w = W;
    }
  }

  OptimalCoarsening out;
  out.W = make_coarse_map(best_w);
  out.achieved_delta_j = best_dj;
  try {
    out.analytic_bound = delta_j_max(sys, k, eta);
  } catch (const ConjugatePairSplit&) {
    out.analytic_bound = std::numeric_limits<double>::quiet_NaN();
  }
  out.gap = out.analytic_bound - out.achieved_delta_j;
  Spectrum msp = eig_sorted(reduce(sys, out.W).A_M);
  out.retained_moduli = msp.moduli;
  return out;
}

/// Orthonormal-row optimum when A and Sigma share the eigenvector basis V:
/// keep the k eigenvector rows with the largest |lambda_i| / sqrt(kappa_i).
/// A tie across the k boundary is reported through tie_at_boundary (if
/// given) and resolved by stable order.
inline CoarseMap orthogonal_optimal_w(const Eigen::VectorXd& lambda,
                                      const Eigen::VectorXd& kappa,
                                      const Eigen::MatrixXd& V, int k,
                                      bool* tie_at_boundary = nullptr) {
  const int n = static_cast<int>(lambda.size());
  if (kappa.size() != n || V.rows() != n || V.cols() != n)
    throw StructuralError("orthogonal_optimal_w: dimension mismatch");
  if (k < 1 || k > n)
    throw StructuralError("orthogonal_optimal_w: k must satisfy 1 <= k <= n");
  if (kappa.minCoeff() <= 0.0)
    throw MathDomainError("orthogonal_optimal_w: kappa must be positive");
  if ((V.transpose() * V - Eigen::MatrixXd::Identity(n, n))
          .cwiseAbs()
          .maxCoeff() > 1e-8)
    throw StructuralError("orthogonal_optimal_w: V must be orthogonal");

  Eigen::VectorXd d = lambda.cwiseAbs().array() / kappa.cwiseSqrt().array();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return d(a) > d(b); });
  if (tie_at_boundary)
    *tie_at_boundary =
        k < n && std::abs(d(idx[k - 1]) - d(idx[k])) <= 1e-12 * d(idx[0]);

  Eigen::MatrixXd W(k, n);
  for (int r = 0; r < k; ++r) W.row(r) = V.col(idx[r]).transpose();
  return make_coarse_map(W);
}

}  // namespace celab

#endif  // CELAB_OPTIMIZER_HPP
