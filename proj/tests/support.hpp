#ifndef CELAB_TESTS_SUPPORT_HPP
#define CELAB_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "celab/rng.hpp"
#include "celab/system.hpp"

namespace testsupport {

inline Eigen::MatrixXd gaussian_matrix(celab::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = rng.normal();
  return M;
}

// Orthonormal rows via QR of a Gaussian draw; redrawn on the (measure-zero)
// chance of a rank-deficient sample.
inline Eigen::MatrixXd orthonormal_rows(celab::Rng& rng, int k, int n) {
  for (;;) {
    Eigen::MatrixXd G = gaussian_matrix(rng, n, k);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    Eigen::MatrixXd W = Q.transpose();
    if ((W * W.transpose() - Eigen::MatrixXd::Identity(k, k)).norm() < 1e-10)
      return W;
  }
}

inline Eigen::MatrixXd haar_orthogonal(celab::Rng& rng, int n) {
  return orthonormal_rows(rng, n, n).transpose();
}

// SPD matrix with eigenvalues log-uniform in [10^-log10_spread, 1].
inline Eigen::MatrixXd random_spd(celab::Rng& rng, int n,
                                  double log10_spread = 2.0) {
  Eigen::MatrixXd Q = haar_orthogonal(rng, n);
  Eigen::VectorXd lam(n);
  for (int i = 0; i < n; ++i)
    lam(i) = std::pow(10.0, rng.uniform(-log10_spread, 0.0));
  return Q * lam.asDiagonal() * Q.transpose();
}

// Symmetric matrix with eigenvalues of either sign, moduli in [lo, hi].
inline Eigen::MatrixXd random_symmetric(celab::Rng& rng, int n, double lo,
                                        double hi) {
  Eigen::MatrixXd Q = haar_orthogonal(rng, n);
  Eigen::VectorXd lam(n);
  for (int i = 0; i < n; ++i)
    lam(i) = rng.uniform(lo, hi) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
  return Q * lam.asDiagonal() * Q.transpose();
}

// Normal (commuting with its transpose) matrix: orthogonal conjugation of a
// block diagonal with scaled rotation blocks and real entries. Rotation
// blocks carry conjugate eigenvalue pairs.
inline Eigen::MatrixXd random_normal_matrix(celab::Rng& rng, int n,
                                            std::vector<int>* block_sizes_out =
                                                nullptr) {
  Eigen::MatrixXd Q = haar_orthogonal(rng, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> sizes;
  int i = 0;
  while (i < n) {
    if (i + 1 < n && rng.uniform01() < 0.5) {
      double r = rng.uniform(0.1, 2.0);
      double th = rng.uniform(0.05, std::acos(-1.0) - 0.05);
      double c = std::cos(th), s = std::sin(th);
      B(i, i) = r * c;
      B(i, i + 1) = -r * s;
      B(i + 1, i) = r * s;
      B(i + 1, i + 1) = r * c;
      sizes.push_back(2);
      i += 2;
    } else {
      B(i, i) = rng.uniform(0.1, 2.0) * (rng.uniform01() < 0.5 ? -1.0 : 1.0);
      sizes.push_back(1);
      i += 1;
    }
  }
  if (block_sizes_out) *block_sizes_out = sizes;
  return Q * B * Q.transpose();
}

// Nonsymmetric matrix with a prescribed, well-separated real spectrum:
// A = V diag(lam) V^{-1} with a moderately conditioned random V.
inline Eigen::MatrixXd separated_real_spectrum(celab::Rng& rng,
                                               const Eigen::VectorXd& lam) {
  const int n = static_cast<int>(lam.size());
  for (;;) {
    Eigen::MatrixXd V =
        Eigen::MatrixXd::Identity(n, n) + 0.4 * gaussian_matrix(rng, n, n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
    if (!lu.isInvertible()) continue;
    if (1.0 / lu.rcond() > 50.0) continue;
    return V * lam.asDiagonal() * lu.inverse();
  }
}

// Moduli spaced by at least `gap` in [0.1, 2], random signs.
inline Eigen::VectorXd separated_moduli(celab::Rng& rng, int n,
                                        double gap = 0.08) {
  for (;;) {
    Eigen::VectorXd m(n);
    for (int i = 0; i < n; ++i) m(i) = rng.uniform(0.1, 2.0);
    std::sort(m.data(), m.data() + n, std::greater<double>());
    bool ok = true;
    for (int i = 0; i + 1 < n; ++i)
      if (m(i) - m(i + 1) < gap) ok = false;
    if (!ok) continue;
    for (int i = 0; i < n; ++i)
      if (rng.uniform01() < 0.5) m(i) = -m(i);
    return m;
  }
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd x = a.array() - a.mean();
  Eigen::VectorXd y = b.array() - b.mean();
  double den = std::sqrt(x.squaredNorm() * y.squaredNorm());
  return den == 0.0 ? 0.0 : x.dot(y) / den;
}

inline double least_squares_slope(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y) {
  Eigen::VectorXd xc = x.array() - x.mean();
  Eigen::VectorXd yc = y.array() - y.mean();
  return xc.dot(yc) / xc.squaredNorm();
}

inline Eigen::VectorXd midranks(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return v(a) < v(b); });
  Eigen::VectorXd r(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && v(idx[j + 1]) == v(idx[i])) ++j;
    double mid = 0.5 * (i + j) + 1.0;
    for (int t = i; t <= j; ++t) r(idx[t]) = mid;
    i = j + 1;
  }
  return r;
}

inline double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return pearson(midranks(a), midranks(b));
}

// Self-cleaning scratch directory under the system temp root.
class TempDir {
 public:
  TempDir() {
    namespace fs = std::filesystem;
    static std::mt19937_64 eng(std::random_device{}());
    for (;;) {
      fs::path p = fs::temp_directory_path() /
                   ("celab_test_" + std::to_string(eng()));
      std::error_code ec;
      if (fs::create_directory(p, ec)) {
        path_ = p;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p,
                       const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

#ifdef CELAB_CLI_PATH
// Runs the installed CLI binary, captures stdout/stderr, returns the exit
// code (-1 if the process did not exit normally).
inline int run_cli(const std::string& args, std::string* out = nullptr,
                   std::string* err = nullptr) {
  TempDir scratch;
  std::filesystem::path of = scratch.path() / "out";
  std::filesystem::path ef = scratch.path() / "err";
  std::string cmd = std::string(CELAB_CLI_PATH) + " " + args + " > " +
                    of.string() + " 2> " + ef.string();
  int status = std::system(cmd.c_str());
  if (out) *out = read_text(of);
  if (err) *err = read_text(ef);
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace testsupport

#endif  // CELAB_TESTS_SUPPORT_HPP
