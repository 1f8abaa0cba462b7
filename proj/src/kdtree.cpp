#include "partscene/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace partscene {

namespace {
constexpr int kLeafSize = 12;
}

KdTree3::KdTree3(PointCloud points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) root_ = build(0, int(points_.size()), 0);
}

int KdTree3::build(int begin, int end, int depth) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_.push_back(node);
    return int(nodes_.size()) - 1;
  }
  // split on the widest axis
  Eigen::Vector3d lo = points_[order_[begin]], hi = lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];
  const int self = int(nodes_.size());
  nodes_.push_back(node);
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree3::search(int node_idx, const Eigen::Vector3d& query, int& best,
                     double& best_sq) const {
  const Node& node = nodes_[node_idx];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const double d = (points_[order_[i]] - query).squaredNorm();
      if (d < best_sq) {
        best_sq = d;
        best = order_[i];
      }
    }
    return;
  }
  const double delta = query[node.axis] - node.split;
  const int near = delta < 0.0 ? node.left : node.right;
  const int far = delta < 0.0 ? node.right : node.left;
  search(near, query, best, best_sq);
  if (delta * delta < best_sq) search(far, query, best, best_sq);
}

int KdTree3::nearest(const Eigen::Vector3d& query, double* distance) const {
  if (points_.empty()) {
    if (distance) *distance = std::numeric_limits<double>::max();
    return -1;
  }
  int best = -1;
  double best_sq = std::numeric_limits<double>::max();
  search(root_, query, best, best_sq);
  if (distance) *distance = std::sqrt(best_sq);
  return best;
}

}  // namespace partscene
