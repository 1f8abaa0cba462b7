#pragma once

#include <vector>

#include <Eigen/Dense>

#include "partscene/transform.hpp"

namespace partscene {

using PointCloud = std::vector<Eigen::Vector3d>;

// Oriented bounding box: center + orthonormal axes (columns) + half extents.
struct OrientedBox {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();

  double volume() const { return 8.0 * half_extents.prod(); }
  double diagonal() const { return 2.0 * half_extents.norm(); }
  RigidTransform pose() const { return {axes, center}; }

  // Positive outside, negative inside.
  double signed_distance(const Eigen::Vector3d& p) const;
  Eigen::Vector3d closest_point(const Eigen::Vector3d& p) const;
  std::vector<Eigen::Vector3d> corners() const;
};

// Near-minimal-volume OBB: box-symmetry-reduced rotation grid (6 degree steps)
// over the cloud's extreme points, refined by coordinate descent. Extents are
// recomputed against the full cloud, so containment is exact. Degenerate axes
// are padded to a 1e-4 m thickness. Throws DegenerateInputError for < 4 points
// or a zero-extent cloud.
OrientedBox fit_obb(const PointCloud& points);

// Distance between two boxes (0 when overlapping), via alternating closest
// point projection.
double obb_distance(const OrientedBox& a, const OrientedBox& b);

}  // namespace partscene
