#include "partscene/transform.hpp"

#include <cmath>

namespace partscene {

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  return out;
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  Eigen::Matrix3d gram = r.transpose() * r - Eigen::Matrix3d::Identity();
  return gram.cwiseAbs().maxCoeff() <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d out = u * v.transpose();
  if (out.determinant() < 0.0) {
    u.col(2) *= -1.0;
    out = u * v.transpose();
  }
  return out;
}

Eigen::Matrix3d rotation_between(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const double c = from.dot(to);
  Eigen::Vector3d axis = from.cross(to);
  const double s = axis.norm();
  if (s < 1e-12) {
    if (c > 0.0) return Eigen::Matrix3d::Identity();
    // antiparallel: pick any perpendicular axis
    Eigen::Vector3d perp = from.unitOrthogonal();
    return Eigen::AngleAxisd(M_PI, perp).toRotationMatrix();
  }
  axis /= s;
  return Eigen::AngleAxisd(std::atan2(s, c), axis).toRotationMatrix();
}

double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d r = a.transpose() * b;
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  // atan2 form keeps precision near zero where acos degrades to ~1e-8
  const Eigen::Vector3d skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(skew.norm() / 2.0, c);
}

Eigen::Vector3d rotation_to_rpy(const Eigen::Matrix3d& r) {
  // ZYX intrinsic == fixed-axis XYZ; guard the pitch singularity at +-pi/2
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(std::cos(pitch)) > 1e-12) {
    roll = std::atan2(r(2, 1), r(2, 2));
    yaw = std::atan2(r(1, 0), r(0, 0));
  } else {
    roll = std::atan2(-r(1, 2), r(1, 1));
    yaw = 0.0;
  }
  return {roll, pitch, yaw};
}

Eigen::Matrix3d rpy_to_rotation(const Eigen::Vector3d& rpy) {
  return (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

Eigen::Matrix3d optimal_rotation(const std::vector<Eigen::Vector3d>& src,
                                 const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < src.size(); ++i) h += src[i] * dst[i].transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return v * d * u.transpose();
}

RigidTransform rigid_align(const std::vector<Eigen::Vector3d>& src,
                           const std::vector<Eigen::Vector3d>& dst) {
  Eigen::Vector3d src_c = Eigen::Vector3d::Zero(), dst_c = Eigen::Vector3d::Zero();
  for (const auto& p : src) src_c += p;
  for (const auto& q : dst) dst_c += q;
  src_c /= double(src.size());
  dst_c /= double(dst.size());
  std::vector<Eigen::Vector3d> a(src.size()), b(dst.size());
  for (size_t i = 0; i < src.size(); ++i) {
    a[i] = src[i] - src_c;
    b[i] = dst[i] - dst_c;
  }
  RigidTransform t;
  t.rotation = optimal_rotation(a, b);
  t.translation = dst_c - t.rotation * src_c;
  return t;
}

}  // namespace partscene
