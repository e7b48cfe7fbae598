// ce-lab: Monte Carlo causal-emergence validation. Interventional samples
// (x uniform on a box, y = A x + eps) feed a Kraskov-style k-NN mutual
// information estimate; delta_i compares the per-dimension macro and micro
// estimates and should approach the analytic delta_j as samples grow.
// SPDX-License-Identifier: MIT
#ifndef CELAB_MI_HPP
#define CELAB_MI_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>

#include "celab/emergence.hpp"
#include "celab/errors.hpp"
#include "celab/kdtree.hpp"
#include "celab/rng.hpp"
#include "celab/system.hpp"

namespace celab {

struct MIEstimate {
  double value = 0.0;  // nats, clamped at 0
  int n_samples = 0;
  int k_neighbors = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline int thread_budget() {
  if (const char* s = std::getenv("CE_LAB_THREADS")) {
    int v = std::atoi(s);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs f(i) for i in [0, n). Results must go into per-index slots so the
// outcome is identical at any thread count.
template <class F>
void parallel_for(int n, F&& f) {
  int threads = std::min(thread_budget(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    int lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (int i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Interventional sample: rows of X ~ U([-L/2, L/2]^n) i.i.d., Y = A X' + eps
/// with fresh noise per row. Stream order per row: n uniforms, then n
/// standard normals.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sample_interventional(
    const LinearSystem& sys, int n_samples, double L, std::uint64_t seed) {
  if (n_samples < 1)
    throw StructuralError("sample_interventional: n_samples must be >= 1");
  if (!(L > 0.0))
    throw MathDomainError("sample_interventional: L must be positive");
  Eigen::MatrixXd F = spd_cholesky(sys.Sigma);
  Rng rng(seed);
  Eigen::MatrixXd X(n_samples, sys.n), Y(n_samples, sys.n);
  Eigen::VectorXd z(sys.n);
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < sys.n; ++j)
      X(i, j) = rng.uniform(-L / 2.0, L / 2.0);
    for (int j = 0; j < sys.n; ++j) z(j) = rng.normal();
    Y.row(i) = (sys.A * X.row(i).transpose() + F * z).transpose();
  }
  return {std::move(X), std::move(Y)};
}

/// Kraskov estimator, variant 1: max-norm joint neighborhoods, strict
/// marginal counts, psi(k) + psi(N) - <psi(nx+1) + psi(ny+1)>.
inline MIEstimate knn_mi(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                         int k_neighbors) {
  const int N = static_cast<int>(X.rows());
  if (Y.rows() != N) throw StructuralError("knn_mi: row counts differ");
  if (k_neighbors < 1) throw StructuralError("knn_mi: k_neighbors must be >= 1");
  if (N < k_neighbors + 1)
    throw StructuralError("knn_mi: need at least k_neighbors + 1 samples");

  for (const auto* M : {&X, &Y})
    for (Eigen::Index c = 0; c < M->cols(); ++c)
      if (M->col(c).maxCoeff() - M->col(c).minCoeff() == 0.0)
        std::cerr << "knn_mi: warning: constant column " << c
                  << "; the estimate is unreliable\n";

  Eigen::MatrixXd J(N, X.cols() + Y.cols());
  J << X, Y;
  KdTree joint(J), tx(X), ty(Y);

  std::vector<double> term(static_cast<std::size_t>(N));
  std::vector<char> degenerate(static_cast<std::size_t>(N), 0);
  detail::parallel_for(N, [&](int i) {
    double eps = joint.kth_neighbor_distance(i, k_neighbors);
    if (eps == 0.0) degenerate[static_cast<std::size_t>(i)] = 1;
    int nx = tx.count_within(i, eps);
    int ny = ty.count_within(i, eps);
    term[static_cast<std::size_t>(i)] =
        boost::math::digamma(static_cast<double>(nx + 1)) +
        boost::math::digamma(static_cast<double>(ny + 1));
  });
  long n_degenerate = 0;
  double mean_term = 0.0;
  for (int i = 0; i < N; ++i) {
    mean_term += term[static_cast<std::size_t>(i)];
    n_degenerate += degenerate[static_cast<std::size_t>(i)];
  }
  mean_term /= N;
  if (n_degenerate > 0)
    std::cerr << "knn_mi: warning: " << n_degenerate
              << " zero-radius neighborhoods (duplicate points); the "
                 "estimate diverges for deterministic couplings\n";

  MIEstimate est;
  est.n_samples = N;
  est.k_neighbors = k_neighbors;
  est.value = std::max(
      0.0, boost::math::digamma(static_cast<double>(k_neighbors)) +
               boost::math::digamma(static_cast<double>(N)) - mean_term);
  return est;
}

/// (1/k) MI(y, y') - (1/n) MI(x, x'), each side interventionally sampled
/// from its own derived stream.
inline double delta_i(const LinearSystem& sys, const CoarseMap& cm,
                      int n_samples, double L, int k_neighbors,
                      std::uint64_t seed) {
  auto [X, Y] = sample_interventional(sys, n_samples, L,
                                      derive_stream(seed, 0));
  MIEstimate micro = knn_mi(X, Y, k_neighbors);

  LinearSystem macro = reduce(sys, cm).to_system();
  auto [Xm, Ym] = sample_interventional(macro, n_samples, L,
                                        derive_stream(seed, 1));
  MIEstimate mac = knn_mi(Xm, Ym, k_neighbors);

  return mac.value / cm.k - micro.value / sys.n;
}

struct ConvergenceRow {
  int n_samples = 0;
  double delta_i_mean = 0.0;
  double delta_i_std = 0.0;
  double delta_j = 0.0;
};

/// One row per sample count: mean and standard deviation of delta_i across
/// the given seeds, next to the analytic (seed-free) delta_j.
inline std::vector<ConvergenceRow> convergence_sweep(
    const LinearSystem& sys, const CoarseMap& cm,
    const std::vector<int>& sample_grid, double L,
    const std::vector<std::uint64_t>& seeds, int k_neighbors = 4) {
  if (sample_grid.empty())
    throw StructuralError("convergence_sweep: sample grid is empty");
  if (seeds.empty())
    throw StructuralError("convergence_sweep: need at least one seed");
  const double dj = delta_j(sys, cm).delta_j;

  std::vector<ConvergenceRow> rows;
  rows.reserve(sample_grid.size());
  for (int n : sample_grid) {
    std::vector<double> vals;
    vals.reserve(seeds.size());
    for (std::uint64_t s : seeds)
      vals.push_back(delta_i(sys, cm, n, L, k_neighbors, s));
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double sd = vals.size() > 1
                    ? std::sqrt(var / static_cast<double>(vals.size() - 1))
                    : 0.0;
    rows.push_back({n, mean, sd, dj});
  }
  return rows;
}

}  // namespace celab

#endif  // CELAB_MI_HPP
