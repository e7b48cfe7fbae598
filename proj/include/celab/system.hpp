// ce-lab: micro system, coarse-graining map, macro reduction, and the
// entropy-gap constraint that budgets how much uncertainty a map may remove.
// SPDX-License-Identifier: MIT
#ifndef CELAB_SYSTEM_HPP
#define CELAB_SYSTEM_HPP

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "celab/errors.hpp"
#include "celab/spectral.hpp"

namespace celab {

/// Lower-triangular factor L with Sigma ~ L L^T. Retries once with a
/// 1e-12*trace diagonal shift so covariances that are SPD up to rounding
/// still factor; anything else is rejected.
inline Eigen::MatrixXd spd_cholesky(const Eigen::MatrixXd& Sigma) {
  if (Sigma.rows() != Sigma.cols())
    throw MathDomainError("covariance must be square");
  double scale = std::max(1.0, Sigma.cwiseAbs().maxCoeff());
  if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw MathDomainError("covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  double shift = 1e-12 * Sigma.trace();
  if (shift > 0.0) {
    Eigen::MatrixXd shifted =
        Sigma + shift * Eigen::MatrixXd::Identity(Sigma.rows(), Sigma.cols());
    Eigen::LLT<Eigen::MatrixXd> llt2(shifted);
    if (llt2.info() == Eigen::Success) return llt2.matrixL();
  }
  throw MathDomainError("covariance is not positive definite");
}

/// ln det of an SPD matrix, through the (shift-tolerant) Cholesky factor.
inline double log_det_spd(const Eigen::MatrixXd& Sigma) {
  Eigen::MatrixXd L = spd_cholesky(Sigma);
  return 2.0 * L.diagonal().array().log().sum();
}

/// ln |det M| for a general square matrix; -inf when M is exactly singular.
inline double log_abs_det(const Eigen::MatrixXd& M) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    double d = std::abs(lu.matrixLU()(i, i));
    if (d == 0.0) return -std::numeric_limits<double>::infinity();
    acc += std::log(d);
  }
  return acc;
}

/// Micro dynamics x_{t+1} = A x_t + eps_t, eps_t ~ N(0, Sigma).
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Sigma;
  int n = 0;
  bool a_full_rank = true;
};

inline LinearSystem make_system(const Eigen::MatrixXd& A,
                                const Eigen::MatrixXd& Sigma) {
  if (A.rows() != A.cols()) throw StructuralError("dynamics matrix must be square");
  if (A.rows() < 1) throw StructuralError("state dimension must be >= 1");
  if (!A.allFinite()) throw StructuralError("dynamics matrix has non-finite entries");
  if (Sigma.rows() != A.rows() || Sigma.cols() != A.cols())
    throw StructuralError("covariance dimensions do not match the dynamics");
  if (!Sigma.allFinite())
    throw StructuralError("covariance has non-finite entries");
  spd_cholesky(Sigma);  // rejects asymmetric or non-SPD input

  LinearSystem sys;
  sys.A = A;
  sys.Sigma = Sigma;
  sys.n = static_cast<int>(A.rows());
  Eigen::VectorXd s = singular_values(A);
  sys.a_full_rank =
      s(s.size() - 1) > rank_tolerance(s(0), sys.n, sys.n);
  return sys;
}

/// Coarse-graining map y = W x with full row rank, k macro coordinates.
struct CoarseMap {
  Eigen::MatrixXd W;
  int k = 0;
};

inline CoarseMap make_coarse_map(const Eigen::MatrixXd& W) {
  if (W.rows() < 1 || W.rows() > W.cols())
    throw StructuralError("coarse map must satisfy 1 <= k <= n");
  if (!W.allFinite())
    throw StructuralError("coarse map has non-finite entries");
  Eigen::VectorXd s = singular_values(W);
  int k = static_cast<int>(W.rows());
  if (s(s.size() - 1) <=
      rank_tolerance(s(0), k, static_cast<int>(W.cols())))
    throw StructuralError("coarse map is rank deficient");
  return CoarseMap{W, k};
}

/// Macro dynamics induced by a coarse map: A_M = W A W^+, Sigma_M = W Sigma W^T.
struct MacroSystem {
  Eigen::MatrixXd A_M;
  Eigen::MatrixXd Sigma_M;
  int k = 0;

  LinearSystem to_system() const { return make_system(A_M, Sigma_M); }
};

inline MacroSystem reduce(const LinearSystem& sys, const CoarseMap& cm) {
  if (cm.W.cols() != sys.n)
    throw StructuralError("coarse map column count must equal the state dimension");
  MacroSystem m;
  m.k = cm.k;
  m.A_M = cm.W * sys.A * pinv(cm.W);
  m.Sigma_M = cm.W * sys.Sigma * cm.W.transpose();
  spd_cholesky(m.Sigma_M);  // full-row-rank W on SPD Sigma keeps this SPD
  return m;
}

/// Differential entropy of N(0, Sigma) in nats.
inline double gaussian_entropy(const Eigen::MatrixXd& Sigma) {
  double d = static_cast<double>(Sigma.rows());
  return 0.5 * d * std::log(2.0 * std::numbers::pi * std::numbers::e) +
         0.5 * log_det_spd(Sigma);
}

/// Per-dimension entropy removed by the coarse-graining:
/// (1/n) H(N(0,Sigma)) - (1/k) H(N(0, W Sigma W^T)), in nats per dimension.
/// Equals -(1/2) ln[ det(W Sigma W^T)^{1/k} / det(Sigma)^{1/n} ].
inline double entropy_gap(const LinearSystem& sys, const CoarseMap& cm) {
  MacroSystem m = reduce(sys, cm);
  return 0.5 * (log_det_spd(sys.Sigma) / sys.n -
                log_det_spd(m.Sigma_M) / cm.k);
}

/// True when the map removes at most eta nats per dimension, i.e.
/// det(W Sigma W^T)^{1/k} >= exp(-2 eta) det(Sigma)^{1/n} up to slack.
inline bool check_constraint(const LinearSystem& sys, const CoarseMap& cm,
                             double eta) {
  return entropy_gap(sys, cm) <= eta + 1e-9;
}

}  // namespace celab

#endif  // CELAB_SYSTEM_HPP
