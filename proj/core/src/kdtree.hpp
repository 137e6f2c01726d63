// nocspose: pose estimation and evaluation from normalized object coordinates.
// SPDX-License-Identifier: Apache-2.0
//
// Minimal exact nearest-neighbor KD-tree over 3D points. Build is
// median-split; queries prune by splitting-plane distance.

#ifndef NOCSPOSE_SRC_KDTREE_HPP
#define NOCSPOSE_SRC_KDTREE_HPP

#include <Eigen/Core>
#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace nocspose::detail {

class KdTree {
 public:
  explicit KdTree(const std::vector<Eigen::Vector3d>& points)
      : points_(points) {
    index_.resize(points.size());
    std::iota(index_.begin(), index_.end(), 0);
    nodes_.reserve(points.size() * 2 + 1);
    root_ = build(0, points_.size());
  }

  /// Index of the nearest point and its squared distance.
  std::pair<int, double> nearest(const Eigen::Vector3d& q) const {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(root_, q, best, best_d2);
    return {best, best_d2};
  }

  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int point = -1;   // leaf payload start in index_
    int count = 0;    // leaf payload length
    int axis = -1;    // split axis for interior nodes
    double split = 0.0;
    int left = -1;
    int right = -1;
  };

  static constexpr size_t kLeafSize = 16;

  int build(size_t lo, size_t hi) {
    if (lo >= hi) return -1;
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (hi - lo <= kLeafSize) {
      nodes_[static_cast<size_t>(id)].point = static_cast<int>(lo);
      nodes_[static_cast<size_t>(id)].count = static_cast<int>(hi - lo);
      return id;
    }
    Eigen::Vector3d mn = points_[index_[lo]];
    Eigen::Vector3d mx = mn;
    for (size_t i = lo + 1; i < hi; ++i) {
      mn = mn.cwiseMin(points_[index_[i]]);
      mx = mx.cwiseMax(points_[index_[i]]);
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);
    const size_t mid = (lo + hi) / 2;
    std::nth_element(index_.begin() + static_cast<long>(lo),
                     index_.begin() + static_cast<long>(mid),
                     index_.begin() + static_cast<long>(hi),
                     [&](int a, int b) {
                       return points_[static_cast<size_t>(a)][axis] <
                              points_[static_cast<size_t>(b)][axis];
                     });
    const double split = points_[index_[mid]][axis];
    const int left = build(lo, mid);
    const int right = build(mid, hi);
    Node& n = nodes_[static_cast<size_t>(id)];
    n.axis = axis;
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
  }

  void search(int id, const Eigen::Vector3d& q, int& best,
              double& best_d2) const {
    if (id < 0) return;
    const Node& n = nodes_[static_cast<size_t>(id)];
    if (n.axis < 0) {
      for (int i = 0; i < n.count; ++i) {
        const int pi = static_cast<int>(index_[static_cast<size_t>(n.point + i)]);
        const double d2 = (points_[static_cast<size_t>(pi)] - q).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best = pi;
        }
      }
      return;
    }
    const double dd = q[n.axis] - n.split;
    const int near = dd < 0.0 ? n.left : n.right;
    const int far = dd < 0.0 ? n.right : n.left;
    search(near, q, best, best_d2);
    if (dd * dd < best_d2) search(far, q, best, best_d2);
  }

  const std::vector<Eigen::Vector3d>& points_;
  std::vector<int> index_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace nocspose::detail

#endif  // NOCSPOSE_SRC_KDTREE_HPP
