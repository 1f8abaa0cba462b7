#include "partscene/obb.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "partscene/errors.hpp"

namespace partscene {

namespace {

constexpr double kMinThickness = 1e-4;  // full extent assigned to flat axes

struct Extents {
  Eigen::Vector3d lo;
  Eigen::Vector3d hi;
};

Extents extents_under_rotation(const Eigen::Matrix3d& axes, const PointCloud& pts) {
  Extents e{Eigen::Vector3d::Constant(std::numeric_limits<double>::max()),
            Eigen::Vector3d::Constant(std::numeric_limits<double>::lowest())};
  for (const auto& p : pts) {
    const Eigen::Vector3d local = axes.transpose() * p;
    e.lo = e.lo.cwiseMin(local);
    e.hi = e.hi.cwiseMax(local);
  }
  return e;
}

double volume_under_rotation(const Eigen::Matrix3d& axes, const PointCloud& pts) {
  const Extents e = extents_under_rotation(axes, pts);
  const Eigen::Vector3d size = (e.hi - e.lo).cwiseMax(kMinThickness);
  return size.prod();
}

// Extreme points along a fixed set of directions; cheap stand-in for the
// convex hull that preserves support widths along the sampled directions.
PointCloud extreme_points(const PointCloud& pts) {
  if (pts.size() <= 512) return pts;
  std::vector<Eigen::Vector3d> dirs;
  const int n_theta = 12, n_phi = 12;
  for (int i = 0; i < n_theta; ++i) {
    const double theta = M_PI * (i + 0.5) / n_theta;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * M_PI * j / n_phi;
      dirs.emplace_back(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                        std::cos(theta));
    }
  }
  PointCloud out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) {
    size_t best = 0;
    double best_dot = std::numeric_limits<double>::lowest();
    for (size_t k = 0; k < pts.size(); ++k) {
      const double dot = d.dot(pts[k]);
      if (dot > best_dot) {
        best_dot = dot;
        best = k;
      }
    }
    out.push_back(pts[best]);
  }
  return out;
}

Eigen::Matrix3d euler_zyx(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(c, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

double OrientedBox::signed_distance(const Eigen::Vector3d& p) const {
  const Eigen::Vector3d local = (axes.transpose() * (p - center)).cwiseAbs() - half_extents;
  const Eigen::Vector3d outside = local.cwiseMax(0.0);
  const double inside = std::min(local.maxCoeff(), 0.0);
  return outside.norm() + inside;
}

Eigen::Vector3d OrientedBox::closest_point(const Eigen::Vector3d& p) const {
  Eigen::Vector3d local = axes.transpose() * (p - center);
  local = local.cwiseMax(-half_extents).cwiseMin(half_extents);
  return center + axes * local;
}

std::vector<Eigen::Vector3d> OrientedBox::corners() const {
  std::vector<Eigen::Vector3d> out;
  out.reserve(8);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        out.push_back(center + axes * (half_extents.cwiseProduct(
                                   Eigen::Vector3d(double(sx), double(sy), double(sz)))));
  return out;
}

OrientedBox fit_obb(const PointCloud& points) {
  if (points.size() < 4)
    throw DegenerateInputError("fit_obb needs at least 4 points, got " +
                               std::to_string(points.size()));

  Eigen::Vector3d lo = points.front(), hi = points.front();
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if ((hi - lo).maxCoeff() < 1e-12)
    throw DegenerateInputError("fit_obb: all points coincide (zero-extent cloud)");

  const PointCloud search_pts = extreme_points(points);

  // box orientations are unique modulo the octahedral symmetry group, so
  // [0, 90) per Euler angle covers SO(3)
  const double step = 6.0 * M_PI / 180.0;
  const int n = 15;
  Eigen::Matrix3d best_axes = Eigen::Matrix3d::Identity();
  double best_vol = volume_under_rotation(best_axes, search_pts);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const Eigen::Matrix3d axes = euler_zyx(i * step, j * step, k * step);
        const double vol = volume_under_rotation(axes, search_pts);
        if (vol < best_vol) {
          best_vol = vol;
          best_axes = axes;
        }
      }

  // local descent: shrink per-axis angular perturbations around the best grid cell
  double delta = step / 2.0;
  while (delta > 1e-3) {
    bool improved = false;
    for (int axis = 0; axis < 3; ++axis) {
      for (double sign : {-1.0, 1.0}) {
        const Eigen::Matrix3d cand =
            Eigen::AngleAxisd(sign * delta, Eigen::Vector3d::Unit(axis)).toRotationMatrix() *
            best_axes;
        const double vol = volume_under_rotation(cand, search_pts);
        if (vol < best_vol) {
          best_vol = vol;
          best_axes = cand;
          improved = true;
        }
      }
    }
    if (!improved) delta *= 0.5;
  }

  // never worse than the AABB; decide on the full cloud
  if (volume_under_rotation(Eigen::Matrix3d::Identity(), points) <
      volume_under_rotation(best_axes, points))
    best_axes = Eigen::Matrix3d::Identity();

  // final extents against the full cloud so containment holds exactly
  const Extents e = extents_under_rotation(best_axes, points);
  OrientedBox box;
  box.axes = best_axes;
  box.half_extents = ((e.hi - e.lo) / 2.0).cwiseMax(kMinThickness / 2.0);
  box.center = best_axes * ((e.hi + e.lo) / 2.0);
  return box;
}

double obb_distance(const OrientedBox& a, const OrientedBox& b) {
  // alternating projection between the two convex sets
  Eigen::Vector3d x = a.center;
  Eigen::Vector3d y = b.center;
  double prev = std::numeric_limits<double>::max();
  for (int it = 0; it < 200; ++it) {
    y = b.closest_point(x);
    x = a.closest_point(y);
    const double d = (x - y).norm();
    if (prev - d < 1e-10) return d;
    prev = d;
  }
  return (x - y).norm();
}

}  // namespace partscene
