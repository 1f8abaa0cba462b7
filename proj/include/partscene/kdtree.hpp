#pragma once

#include <vector>

#include <Eigen/Dense>

#include "partscene/obb.hpp"

namespace partscene {

// Static median-split kd-tree over 3D points; nearest-neighbor queries only.
class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(PointCloud points);

  bool empty() const { return points_.empty(); }
  size_t size() const { return points_.size(); }
  const PointCloud& points() const { return points_; }

  // Index of the nearest point and (optionally) its distance.
  int nearest(const Eigen::Vector3d& query, double* distance = nullptr) const;

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;  // leaf payload range into order_
    int end = 0;
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end, int depth);
  void search(int node, const Eigen::Vector3d& query, int& best, double& best_sq) const;

  PointCloud points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace partscene
