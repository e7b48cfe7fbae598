// ce-lab: seeded trajectory generation for x_{t+1} = A x_t + eps_t and the
// matched macro iteration y-hat_{t+1} = W A W^+ y-hat_t + W eps_t that
// consumes the identical noise realization.
// SPDX-License-Identifier: MIT
#ifndef CELAB_SIMULATE_HPP
#define CELAB_SIMULATE_HPP

#include <cstdint>
#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "celab/errors.hpp"
#include "celab/rng.hpp"
#include "celab/spectral.hpp"
#include "celab/system.hpp"

namespace celab {

struct Trajectory {
  // (steps + 1) x d, row t is the state at time t0 + t
  Eigen::MatrixXd states;
  int t0 = 0;
  std::uint64_t seed = 0;
  std::optional<Eigen::MatrixXd> noise_record;  // steps x d when recorded
};

namespace detail {

// One d-vector of standard normals per step, filled left to right, so a
// recorded noise stream replays identically anywhere.
inline Eigen::MatrixXd standard_normal_rows(Rng& rng, int steps, int d) {
  Eigen::MatrixXd z(steps, d);
  for (int t = 0; t < steps; ++t)
    for (int j = 0; j < d; ++j) z(t, j) = rng.normal();
  return z;
}

}  // namespace detail

inline Trajectory simulate_micro(const LinearSystem& sys,
                                 const Eigen::VectorXd& x0, int steps,
                                 std::uint64_t seed) {
  if (x0.size() != sys.n)
    throw StructuralError("simulate_micro: x0 must be length n");
  if (steps < 0) throw StructuralError("simulate_micro: steps must be >= 0");

  Eigen::MatrixXd F = spd_cholesky(sys.Sigma);
  Rng rng(seed);
  Eigen::MatrixXd noise =
      detail::standard_normal_rows(rng, steps, sys.n) * F.transpose();

  Trajectory tr;
  tr.seed = seed;
  tr.states.resize(steps + 1, sys.n);
  tr.states.row(0) = x0.transpose();
  for (int t = 0; t < steps; ++t)
    tr.states.row(t + 1) =
        (sys.A * tr.states.row(t).transpose()).transpose() + noise.row(t);
  tr.noise_record = std::move(noise);
  return tr;
}

/// Observed macro trajectory y_t = W x_t and the macro-iterated y-hat, both
/// driven by one micro noise realization.
inline std::pair<Trajectory, Trajectory> macro_pair(const LinearSystem& sys,
                                                    const CoarseMap& cm,
                                                    const Eigen::VectorXd& x0,
                                                    int steps,
                                                    std::uint64_t seed) {
  if (cm.W.cols() != sys.n)
    throw StructuralError("macro_pair: W does not match the system");
  Trajectory micro = simulate_micro(sys, x0, steps, seed);
  const Eigen::MatrixXd& noise = *micro.noise_record;
  Eigen::MatrixXd A_M = cm.W * sys.A * pinv(cm.W);

  Trajectory y, y_hat;
  y.seed = y_hat.seed = seed;
  y.states = micro.states * cm.W.transpose();
  y_hat.states.resize(steps + 1, cm.k);
  y_hat.states.row(0) = y.states.row(0);
  for (int t = 0; t < steps; ++t)
    y_hat.states.row(t + 1) =
        (A_M * y_hat.states.row(t).transpose()).transpose() +
        noise.row(t) * cm.W.transpose();
  return {std::move(y), std::move(y_hat)};
}

/// Max entrywise deviation between the empirical covariance of n_samples
/// synthesized noise vectors and Sigma.
inline double noise_covariance_check(const LinearSystem& sys, int n_samples,
                                     std::uint64_t seed) {
  if (n_samples < 10)
    throw StructuralError("noise_covariance_check: n_samples must be >= 10");
  Eigen::MatrixXd F = spd_cholesky(sys.Sigma);
  Rng rng(seed);
  Eigen::MatrixXd eps =
      detail::standard_normal_rows(rng, n_samples, sys.n) * F.transpose();
  Eigen::MatrixXd emp = eps.transpose() * eps / static_cast<double>(n_samples);
  return (emp - sys.Sigma).cwiseAbs().maxCoeff();
}

}  // namespace celab

#endif  // CELAB_SIMULATE_HPP
