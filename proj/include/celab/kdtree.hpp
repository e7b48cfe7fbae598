// ce-lab: exact max-norm nearest-neighbor queries over a fixed point set.
// Backs the k-NN mutual-information estimator; a brute-force reference of
// each query is kept for cross-checking. Pruning uses the fact that the
// max-norm distance is at least the per-coordinate distance to the split.
// SPDX-License-Identifier: MIT
#ifndef CELAB_KDTREE_HPP
#define CELAB_KDTREE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "celab/errors.hpp"

namespace celab {

class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixXd& points, int leaf_size = 16)
      : pts_(points), leaf_size_(std::max(1, leaf_size)) {
    if (pts_.rows() < 1)
      throw StructuralError("KdTree: need at least one point");
    idx_.resize(static_cast<std::size_t>(pts_.rows()));
    std::iota(idx_.begin(), idx_.end(), 0);
    nodes_.reserve(2 * idx_.size() / static_cast<std::size_t>(leaf_size_) + 4);
    build(0, static_cast<int>(idx_.size()));
  }

  /// Max-norm distance from point `self` to its k-th nearest other point.
  double kth_neighbor_distance(int self, int k) const {
    std::vector<double> best;  // max-heap of current k smallest distances
    best.reserve(static_cast<std::size_t>(k));
    knn(root_, self, k, best);
    return best.front();
  }

  /// Number of other points with max-norm distance strictly below radius.
  int count_within(int self, double radius) const {
    return count(root_, self, radius);
  }

 private:
  struct Node {
    int left = -1, right = -1;  // children, -1 for leaves
    int begin = 0, end = 0;     // index range (leaves only)
    int dim = -1;
    double split = 0.0;
  };

  int build(int begin, int end) {
    int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= leaf_size_) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    // split the widest coordinate at its median
    int dim = 0;
    double spread = -1.0;
    for (int d = 0; d < pts_.cols(); ++d) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int i = begin; i < end; ++i) {
        double v = pts_(idx_[static_cast<std::size_t>(i)], d);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > spread) {
        spread = hi - lo;
        dim = d;
      }
    }
    int mid = begin + (end - begin) / 2;
    std::nth_element(idx_.begin() + begin, idx_.begin() + mid,
                     idx_.begin() + end, [&](int a, int b) {
                       return pts_(a, dim) < pts_(b, dim);
                     });
    nodes_[id].dim = dim;
    nodes_[id].split = pts_(idx_[static_cast<std::size_t>(mid)], dim);
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  double dist(int a, int b) const {
    return (pts_.row(a) - pts_.row(b)).cwiseAbs().maxCoeff();
  }

  void knn(int node, int self, int k, std::vector<double>& best) const {
    const Node& nd = nodes_[static_cast<std::size_t>(node)];
    if (nd.dim < 0) {
      for (int i = nd.begin; i < nd.end; ++i) {
        int p = idx_[static_cast<std::size_t>(i)];
        if (p == self) continue;
        double d = dist(self, p);
        if (static_cast<int>(best.size()) < k) {
          best.push_back(d);
          std::push_heap(best.begin(), best.end());
        } else if (d < best.front()) {
          std::pop_heap(best.begin(), best.end());
          best.back() = d;
          std::push_heap(best.begin(), best.end());
        }
      }
      return;
    }
    double delta = pts_(self, nd.dim) - nd.split;
    int near = delta <= 0.0 ? nd.left : nd.right;
    int far = delta <= 0.0 ? nd.right : nd.left;
    knn(near, self, k, best);
    if (static_cast<int>(best.size()) < k || std::abs(delta) < best.front())
      knn(far, self, k, best);
  }

  int count(int node, int self, double radius) const {
    const Node& nd = nodes_[static_cast<std::size_t>(node)];
    if (nd.dim < 0) {
      int c = 0;
      for (int i = nd.begin; i < nd.end; ++i) {
        int p = idx_[static_cast<std::size_t>(i)];
        if (p != self && dist(self, p) < radius) ++c;
      }
      return c;
    }
    double delta = pts_(self, nd.dim) - nd.split;
    int near = delta <= 0.0 ? nd.left : nd.right;
    int far = delta <= 0.0 ? nd.right : nd.left;
    int c = count(near, self, radius);
    if (std::abs(delta) < radius) c += count(far, self, radius);
    return c;
  }

  Eigen::MatrixXd pts_;
  int leaf_size_;
  static constexpr int root_ = 0;  // first node built
  std::vector<int> idx_;
  std::vector<Node> nodes_;
};

/// O(N) reference for one query; used to validate the tree.
inline double brute_kth_neighbor(const Eigen::MatrixXd& pts, int self, int k) {
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(pts.rows()) - 1);
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    if (static_cast<int>(i) != self)
      d.push_back((pts.row(i) - pts.row(self)).cwiseAbs().maxCoeff());
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end());
  return d[static_cast<std::size_t>(k - 1)];
}

inline int brute_count_within(const Eigen::MatrixXd& pts, int self,
                              double radius) {
  int c = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    if (static_cast<int>(i) != self &&
        (pts.row(i) - pts.row(self)).cwiseAbs().maxCoeff() < radius)
      ++c;
  return c;
}

}  // namespace celab

#endif  // CELAB_KDTREE_HPP
