// ce-lab: effective-information formulas. Discrete transition matrices (bits),
// exact Gaussian form (nats), dimension-averaged J, rank-deficient and
// observation-noise variants, and the local Jacobian form for nonlinear maps.
// SPDX-License-Identifier: MIT
#ifndef CELAB_EI_HPP
#define CELAB_EI_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "celab/errors.hpp"
#include "celab/system.hpp"

namespace celab {

/// Side length of the default do-intervention box [-1, 1]^n.
inline constexpr double default_box_width = 2.0;

/// EI with its determinism/degeneracy split. determinism + degeneracy = ei
/// by construction; per_dimension divides by the state dimension.
struct EIBreakdown {
  double ei = 0.0;
  double determinism = 0.0;
  double degeneracy = 0.0;
  double per_dimension = 0.0;
  double L = 0.0;        // NaN when no intervention box is involved
  std::string units = "nats";
};

/// EI of a row-stochastic transition matrix, in bits. Rows are intervened to
/// the uniform distribution; the value equals the average KL divergence from
/// each row to the column-mean effect distribution.
inline EIBreakdown ei_tpm(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols())
    throw StructuralError("ei_tpm: transition matrix must be square");
  const int n = static_cast<int>(M.rows());
  for (int i = 0; i < n; ++i) {
    if (M.row(i).minCoeff() < 0.0)
      throw StructuralError("ei_tpm: negative transition probability");
    if (std::abs(M.row(i).sum() - 1.0) > 1e-9)
      throw StructuralError("ei_tpm: rows must sum to 1");
  }
  auto xlog2 = [](double p) { return p > 0.0 ? p * std::log2(p) : 0.0; };

  double determinism = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) determinism += xlog2(M(i, j));
  determinism /= n;

  double degeneracy = 0.0;
  for (int j = 0; j < n; ++j) degeneracy -= xlog2(M.col(j).mean());

  EIBreakdown out;
  out.determinism = determinism;
  out.degeneracy = degeneracy;
  out.ei = determinism + degeneracy;
  out.per_dimension = out.ei / n;
  out.L = std::numeric_limits<double>::quiet_NaN();
  out.units = "bits";
  return out;
}

/// Exact Gaussian EI under a uniform intervention on [-L/2, L/2]^n:
///   ei = ln[ |det A| L^n / ((2 pi e)^{n/2} det(Sigma)^{1/2}) ].
/// A singular A drives degeneracy (and ei) to -inf rather than throwing.
inline EIBreakdown ei_gaussian(const LinearSystem& sys, double L) {
  if (!(L > 0.0)) throw MathDomainError("ei_gaussian: L must be positive");
  const double n = static_cast<double>(sys.n);
  const double ln2pie = std::log(2.0 * std::numbers::pi * std::numbers::e);

  EIBreakdown out;
  out.determinism = -(0.5 * n * ln2pie + 0.5 * log_det_spd(sys.Sigma));
  out.degeneracy = log_abs_det(sys.A) + n * std::log(L);
  out.ei = out.determinism + out.degeneracy;
  out.per_dimension = out.ei / n;
  out.L = L;
  return out;
}

/// Dimension-averaged EI: J = EI / n. Micro and macro values live on the
/// same scale, and differences of J are independent of L.
inline double j_value(const LinearSystem& sys, double L) {
  return ei_gaussian(sys, L).per_dimension;
}

/// EI for a rectangular (or rank-deficient) m x n dynamics matrix:
///   ei = ln[ pdet(A^T Sigma^{-1} A)^{1/2} L^n / ((2 pi)^{n/2} e^{m/2}) ].
/// Reduces to ei_gaussian when m = n and A is invertible; a zero pdet is the
/// fully degenerate case and yields the -inf sentinel.
inline EIBreakdown ei_rectangular(const Eigen::MatrixXd& A,
                                  const Eigen::MatrixXd& Sigma, double L) {
  if (!(L > 0.0)) throw MathDomainError("ei_rectangular: L must be positive");
  if (Sigma.rows() != A.rows())
    throw StructuralError("ei_rectangular: covariance must match the output dimension");
  const double m = static_cast<double>(A.rows());
  const double n = static_cast<double>(A.cols());
  const double ln2pi = std::log(2.0 * std::numbers::pi);

  Eigen::MatrixXd L_chol = spd_cholesky(Sigma);
  Eigen::MatrixXd sigma_inv_a =
      L_chol.transpose().triangularView<Eigen::Upper>().solve(
          Eigen::MatrixXd(L_chol.triangularView<Eigen::Lower>().solve(A)));
  Eigen::MatrixXd G = A.transpose() * sigma_inv_a;
  G = 0.5 * (G + G.transpose());

  double pd = pdet(G);
  EIBreakdown out;
  out.ei = (pd > 0.0 ? 0.5 * std::log(pd)
                     : -std::numeric_limits<double>::infinity()) +
           n * std::log(L) - 0.5 * n * ln2pi - 0.5 * m;
  out.determinism =
      -(0.5 * m * (ln2pi + 1.0) + 0.5 * log_det_spd(Sigma));
  out.degeneracy = out.ei - out.determinism;
  out.per_dimension = out.ei / n;
  out.L = L;
  return out;
}

/// EI when the observed pair carries measurement noise on both sides; the
/// effective output covariance is Theta = Theta_y + A Theta_x A^T + Sigma.
inline EIBreakdown ei_observed(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& Sigma,
                               const Eigen::MatrixXd& Theta_x,
                               const Eigen::MatrixXd& Theta_y, double L) {
  auto require_psd = [](const Eigen::MatrixXd& M, const char* name) {
    if (M.rows() != M.cols())
      throw StructuralError(std::string(name) + " must be square");
    double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw MathDomainError(std::string(name) + " must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
      throw MathDomainError(std::string(name) + " must be positive semidefinite");
  };
  require_psd(Theta_x, "Theta_x");
  require_psd(Theta_y, "Theta_y");
  if (Theta_x.rows() != A.cols() || Theta_y.rows() != A.rows())
    throw StructuralError("ei_observed: observation-noise dimensions do not match");

  Eigen::MatrixXd Theta = Theta_y + A * Theta_x * A.transpose() + Sigma;
  return ei_rectangular(A, Theta, L);
}

using DynamicsFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Central-difference Jacobian with per-coordinate step 1e-5 * (1 + |x_i|).
inline Eigen::MatrixXd numerical_jacobian(const DynamicsFn& f,
                                          const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd J(f(x).size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double h = 1e-5 * (1.0 + std::abs(x(i)));
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

/// Local dimension-averaged EI of a nonlinear map at state x, using the
/// Jacobian as the local linearization:
///   J(x) = ln[ |det grad f(x)|^{1/n} L / ((2 pi e)^{1/2} det(Sigma)^{1/2n}) ].
/// A singular Jacobian returns -inf.
inline double local_j_nonlinear(const DynamicsFn& f, const Eigen::VectorXd& x,
                                const Eigen::MatrixXd& Sigma, double L,
                                const JacobianFn& jacobian = nullptr) {
  if (!(L > 0.0)) throw MathDomainError("local_j_nonlinear: L must be positive");
  Eigen::MatrixXd J = jacobian ? jacobian(x) : numerical_jacobian(f, x);
  if (!J.allFinite())
    throw MathDomainError("local_j_nonlinear: Jacobian has non-finite entries");
  const double n = static_cast<double>(x.size());
  return log_abs_det(J) / n + std::log(L) -
         0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e) -
         log_det_spd(Sigma) / (2.0 * n);
}

}  // namespace celab

#endif  // CELAB_EI_HPP
