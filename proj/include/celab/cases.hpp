// ce-lab: canonical case studies. Three fixture systems exercise the three
// faces of emergence: a pure random walk (all gain from noise reduction), a
// heat-dissipation chain (gain from the dominant mode), and a damped spiral
// rotation (complex spectrum, conjugate-pair constraints on k).
// SPDX-License-Identifier: MIT
#ifndef CELAB_CASES_HPP
#define CELAB_CASES_HPP

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "celab/emergence.hpp"
#include "celab/errors.hpp"
#include "celab/io.hpp"
#include "celab/optimizer.hpp"
#include "celab/simulate.hpp"
#include "celab/system.hpp"

namespace celab {

struct CaseConfig {
  std::string name;  // random_walk | heat | spiral
  LinearSystem system;
  double eta = 0.0;
  int default_k = 1;
  Eigen::VectorXd x0;
  // spiral parameters, absent for the other cases
  std::optional<Eigen::Vector3d> u0;
  std::optional<double> theta;
  std::optional<Eigen::Vector3d> psi;
  std::optional<double> sigma;
};

/// Rotation by theta about the axis u0 (normalized internally).
inline Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& u0,
                                       double theta) {
  if (u0.norm() == 0.0)
    throw StructuralError("rotation_matrix: axis must be nonzero");
  Eigen::Vector3d u = u0.normalized();
  double a = u(0), b = u(1), c = u(2);
  double ct = std::cos(theta), st = std::sin(theta), mc = 1.0 - ct;
  Eigen::Matrix3d R;
  R << ct + a * a * mc, a * b * mc - c * st, a * c * mc + b * st,
      a * b * mc + c * st, ct + b * b * mc, b * c * mc - a * st,
      a * c * mc - b * st, b * c * mc + a * st, ct + c * c * mc;
  return R;
}

/// Identity dynamics with a fixed correlated noise covariance. All of the
/// emergence is determinism emergence; the entropy budget 0.3466 = ln(2)/2
/// halves the effective noise determinant.
inline CaseConfig build_random_walk() {
  CaseConfig cfg;
  cfg.name = "random_walk";
  Eigen::MatrixXd Sigma(4, 4);
  Sigma << 0.4782, -0.1967, -0.0287, 0.0419,
      -0.1967, 0.6711, 0.0233, -0.1067,
      -0.0287, 0.0233, 0.3154, 0.0738,
      0.0419, -0.1067, 0.0738, 0.4211;
  cfg.system = make_system(Eigen::MatrixXd::Identity(4, 4), Sigma);
  cfg.eta = 0.3466;
  cfg.default_k = 1;
  cfg.x0 = Eigen::VectorXd::Zero(4);
  return cfg;
}

/// Nearest-neighbor heat exchange on four nodes with small isotropic noise.
inline CaseConfig build_heat() {
  CaseConfig cfg;
  cfg.name = "heat";
  Eigen::MatrixXd A(4, 4);
  A << 0.6, 0.2, 0.0, 0.0,
      0.2, 0.7, 0.1, 0.0,
      0.0, 0.1, 0.4, 0.1,
      0.0, 0.0, 0.1, 0.3;
  cfg.system = make_system(A, 0.01 * 0.01 * Eigen::MatrixXd::Identity(4, 4));
  cfg.eta = 0.0;
  cfg.default_k = 1;
  cfg.x0 = Eigen::VectorXd::Constant(4, 10.0);
  return cfg;
}

/// A = R(u0, theta) * diag(psi): rotation about u0 with per-axis damping,
/// isotropic noise sigma^2 I.
inline CaseConfig build_spiral(const Eigen::Vector3d& u0, double theta,
                               const Eigen::Vector3d& psi, double sigma) {
  if ((psi.array() <= 0.0).any())
    throw StructuralError("build_spiral: psi entries must be positive");
  if (!(sigma > 0.0))
    throw MathDomainError("build_spiral: sigma must be positive");
  CaseConfig cfg;
  cfg.name = "spiral";
  Eigen::Matrix3d A = rotation_matrix(u0, theta) * psi.asDiagonal();
  cfg.system =
      make_system(A, sigma * sigma * Eigen::MatrixXd::Identity(3, 3));
  cfg.eta = 0.0;
  cfg.default_k = 1;
  cfg.x0 = Eigen::Vector3d(1.0, 1.0, 3.0);
  cfg.u0 = u0;
  cfg.theta = theta;
  cfg.psi = psi;
  cfg.sigma = sigma;
  return cfg;
}

/// Scenario 1 contracts onto the rotation axis (best k = 1); scenario 2
/// contracts onto the rotation plane (k = 1 would split the dominant
/// conjugate pair, so k = 2).
inline CaseConfig build_spiral_scenario(int scenario) {
  Eigen::Vector3d u0(0.0, 0.1, 1.0);
  double theta = M_PI / 16.0;
  if (scenario == 1) {
    CaseConfig cfg =
        build_spiral(u0, theta, Eigen::Vector3d(0.94, 0.94, 0.99), 0.01);
    cfg.x0 = Eigen::Vector3d(1.0, 1.0, 3.0);
    return cfg;
  }
  if (scenario == 2) {
    CaseConfig cfg =
        build_spiral(u0, theta, Eigen::Vector3d(0.99, 0.97, 0.2), 0.01);
    cfg.x0 = Eigen::Vector3d(1.0, 1.0, 1.0);
    cfg.default_k = 2;
    return cfg;
  }
  throw StructuralError("build_spiral_scenario: scenario must be 1 or 2");
}

/// Runs one case end to end and writes the artifact set into out_dir:
/// system.json, w_optimal.csv, emergence.json, trajectory_micro.csv,
/// trajectory_macro.csv (observed y next to iterated y-hat), sweep_k.csv,
/// and for the spiral sweep_theta.csv. Returns the emergence report at the
/// chosen k.
inline EmergenceReport run_case(const CaseConfig& cfg, std::optional<int> k,
                                int steps, std::uint64_t seed,
                                const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  const LinearSystem& sys = cfg.system;
  const int use_k = k.value_or(cfg.default_k);

  SystemSpec spec;
  spec.system = sys;
  spec.eta = cfg.eta;
  spec.seed = seed;
  write_file_atomic(out_dir / "system.json",
                    system_spec_to_json(spec).dump(2) + "\n");

  OptimalCoarsening opt = optimal_w(sys, use_k, cfg.eta);
  write_matrix_csv(out_dir / "w_optimal.csv", opt.W.W);

  EmergenceReport report = delta_j(sys, opt.W, cfg.eta);
  write_file_atomic(out_dir / "emergence.json",
                    emergence_report_to_json(report).dump(2) + "\n");

  Trajectory micro = simulate_micro(sys, cfg.x0, steps, seed);
  write_trajectory_csv(out_dir / "trajectory_micro.csv", micro);

  auto [y, y_hat] = macro_pair(sys, opt.W, cfg.x0, steps, seed);
  {
    std::ostringstream header;
    header << "t";
    for (int j = 1; j <= use_k; ++j) header << ",y" << j;
    for (int j = 1; j <= use_k; ++j) header << ",yhat" << j;
    std::vector<std::vector<double>> rows(
        static_cast<std::size_t>(y.states.rows()));
    for (Eigen::Index r = 0; r < y.states.rows(); ++r) {
      auto& row = rows[static_cast<std::size_t>(r)];
      row.push_back(static_cast<double>(r));
      row.insert(row.end(), y.states.row(r).begin(), y.states.row(r).end());
      row.insert(row.end(), y_hat.states.row(r).begin(),
                 y_hat.states.row(r).end());
    }
    write_csv(out_dir / "trajectory_macro.csv", header.str(), rows);
  }

  // delta_j_max per k, alongside the orthonormal-row ceiling; k values
  // that would split a conjugate pair are omitted
  {
    std::vector<std::vector<double>> rows;
    for (int kk = 1; kk <= sys.n; ++kk) {
      try {
        double star = delta_j_max(sys, kk, cfg.eta);
        double ortho = delta_j_orthogonal_bound(sys, kk);
        rows.push_back({static_cast<double>(kk), star, ortho});
      } catch (const ConjugatePairSplit&) {
      }
    }
    write_csv(out_dir / "sweep_k.csv", "k,delta_j_star,delta_j_orthonormal",
              rows);
  }

  if (cfg.name == "spiral") {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 64; ++i) {
      double theta = 2.0 * M_PI * i / 64.0;
      CaseConfig swept = build_spiral(*cfg.u0, theta, *cfg.psi, *cfg.sigma);
      try {
        rows.push_back({theta, delta_j_max(swept.system, 1, cfg.eta)});
      } catch (const ConjugatePairSplit&) {
      }
    }
    write_csv(out_dir / "sweep_theta.csv", "theta,delta_j_star", rows);
  }

  return report;
}

}  // namespace celab

#endif  // CELAB_CASES_HPP
