#pragma once

#include <vector>

#include <Eigen/Dense>

namespace partscene {

// Rigid body transform in SE(3): x_out = rotation * x + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform Identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& u) const { return rotation * u + translation; }
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
inline Eigen::Vector3d apply(const RigidTransform& t, const Eigen::Vector3d& u) { return t.apply(u); }

// Checks R^T R = I and det R = +1 within tol.
bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

// Nearest rotation matrix in Frobenius norm (SVD projection).
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r);

// Minimal rotation taking unit vector `from` onto unit vector `to`.
// Antiparallel inputs rotate pi around an arbitrary perpendicular axis.
Eigen::Matrix3d rotation_between(const Eigen::Vector3d& from, const Eigen::Vector3d& to);

// Angle of the relative rotation a^T b, radians in [0, pi].
double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

// Fixed-axis roll-pitch-yaw (URDF convention, R = Rz(yaw) Ry(pitch) Rx(roll)).
Eigen::Vector3d rotation_to_rpy(const Eigen::Matrix3d& r);
Eigen::Matrix3d rpy_to_rotation(const Eigen::Vector3d& rpy);

// Kabsch: rotation minimizing sum ||R src_i - dst_i||^2 (SVD of the
// cross-covariance with determinant correction). Inputs are index-paired.
Eigen::Matrix3d optimal_rotation(const std::vector<Eigen::Vector3d>& src,
                                 const std::vector<Eigen::Vector3d>& dst);

// Rigid transform minimizing sum ||T(src_i) - dst_i||^2 (centroid-shifted
// Kabsch).
RigidTransform rigid_align(const std::vector<Eigen::Vector3d>& src,
                           const std::vector<Eigen::Vector3d>& dst);

}  // namespace partscene
