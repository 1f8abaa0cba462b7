#include "partscene/primitive_fit.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "partscene/errors.hpp"

namespace partscene {

namespace {

Eigen::Matrix3d cyclic_permutation(int shift) {
  // columns are images of x, y, z; cyclic shifts keep det = +1
  Eigen::Matrix3d p = Eigen::Matrix3d::Zero();
  for (int c = 0; c < 3; ++c) p((c + shift) % 3, c) = 1.0;
  return p;
}

// Extents along the OBB axes, robust against sensor noise. Two passes per
// end: the median of a 1 cm window at the extreme lands in the noise tail
// when the end face is thin, so a second median over a window re-centered on
// the first estimate settles onto the face bulk. Clean clouds, where the
// extreme points sit exactly on the surface, are left untouched.
Eigen::Vector3d robust_extents(const OrientedBox& obb, const PointCloud& cloud) {
  Eigen::Vector3d extents;
  const double w = 0.01;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> t;
    t.reserve(cloud.size());
    const Eigen::Vector3d dir = obb.axes.col(axis);
    for (const auto& p : cloud) t.push_back(dir.dot(p));
    std::sort(t.begin(), t.end());
    const double lo = t.front(), hi = t.back();

    auto median_in = [&](double a, double b, double fallback) {
      const auto begin = std::lower_bound(t.begin(), t.end(), a);
      const auto end = std::upper_bound(t.begin(), t.end(), b);
      if (end - begin < 12) return fallback;
      return *(begin + (end - begin) / 2);
    };
    auto end_estimate = [&](bool upper) {
      double m = upper ? hi : lo;
      m = upper ? median_in(m - w, m, m) : median_in(m, m + w, m);
      m = median_in(m - w, m + w, m);
      return m;
    };
    const double extent = end_estimate(true) - end_estimate(false);
    extents[axis] = std::clamp(extent, 0.5 * (hi - lo), hi - lo);
    extents[axis] = std::max(extents[axis], 1e-4);
  }
  return extents;
}

}  // namespace

TriangleMesh PrimitiveCandidate::model_mesh(int cylinder_segments) const {
  FittedModel m;
  m.kind = kind;
  m.scale = scale;
  return m.local_mesh(cylinder_segments);
}

std::vector<PrimitiveCandidate> candidate_set(const OrientedBox& obb) {
  return candidate_set_scaled(obb, 2.0 * obb.half_extents);
}

std::vector<PrimitiveCandidate> candidate_set_scaled(const OrientedBox& obb,
                                                     const Eigen::Vector3d& extents) {
  (void)obb;
  std::vector<PrimitiveCandidate> out;

  PrimitiveCandidate box;
  box.kind = PrimitiveKind::Box;
  box.scale = extents;
  out.push_back(box);

  // one cylinder per height axis; radial scale is the mean of the other two
  // extents so the cross-section stays circular
  for (int axis = 0; axis < 3; ++axis) {
    PrimitiveCandidate cyl;
    cyl.kind = PrimitiveKind::Cylinder;
    const double d = 0.5 * (extents[(axis + 1) % 3] + extents[(axis + 2) % 3]);
    cyl.scale = Eigen::Vector3d(d, d, extents[axis]);
    // rotate canonical +z onto OBB axis `axis`
    cyl.base_rotation = cyclic_permutation((axis + 1) % 3);
    out.push_back(cyl);
  }

  PrimitiveCandidate sphere;
  sphere.kind = PrimitiveKind::Sphere;
  const double mean = extents.mean();
  sphere.scale = Eigen::Vector3d::Constant(mean);
  out.push_back(sphere);
  return out;
}

std::vector<PrimitiveCandidate> candidate_set(const PointCloud& cloud) {
  if (cloud.size() < 4)
    throw DegenerateInputError("candidate_set needs at least 4 points, got " +
                               std::to_string(cloud.size()));
  const OrientedBox obb = fit_obb(cloud);
  return candidate_set_scaled(obb, robust_extents(obb, cloud));
}

PointCloud sample_surface(const PrimitiveCandidate& candidate, int n, uint64_t seed) {
  if (n < 100) throw PreconditionError("sample_surface needs n >= 100");
  return sample_mesh_surface(candidate.model_mesh(), n, seed);
}

IcpResult icp_align(const PrimitiveCandidate& candidate, const PointCloud& cloud,
                    const RigidTransform& init, const IcpOptions& opts) {
  return icp_align(candidate, KdTree3(cloud), init, opts);
}

IcpResult icp_align(const PrimitiveCandidate& candidate, const KdTree3& cloud,
                    const RigidTransform& init, const IcpOptions& opts) {
  if (cloud.empty()) throw PreconditionError("icp_align: empty cloud");
  if (opts.surface_samples < 500)
    throw PreconditionError("icp_align needs >= 500 surface samples");

  double gate = opts.gate;
  if (gate <= 0.0) gate = 2.0 * fit_obb(cloud.points()).diagonal();

  const PointCloud model = sample_surface(candidate, opts.surface_samples, opts.seed);

  auto objective = [&](const RigidTransform& t) {
    double acc = 0.0;
    for (const auto& p : model) {
      double d;
      cloud.nearest(t.apply(p), &d);
      acc += d;
    }
    return acc / double(model.size());
  };

  IcpResult result;
  result.transform = init;
  result.cost = objective(init);
  result.cost_trace.push_back(result.cost);

  std::vector<Eigen::Vector3d> src, dst;
  src.reserve(model.size());
  dst.reserve(model.size());
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    src.clear();
    dst.clear();
    for (const auto& p : model) {
      const Eigen::Vector3d world = result.transform.apply(p);
      double d;
      const int j = cloud.nearest(world, &d);
      if (d <= gate) {
        src.push_back(p);
        dst.push_back(cloud.points()[j]);
      }
    }
    if (src.size() < 3)
      throw NoConvergenceError("icp_align: no correspondences within gating radius");

    const RigidTransform updated = rigid_align(src, dst);
    const double cost = objective(updated);
    if (cost >= result.cost) break;  // least-squares step stopped helping
    const double delta = result.cost - cost;
    result.transform = updated;
    result.cost = cost;
    result.cost_trace.push_back(cost);
    if (delta < opts.cost_tolerance) break;
  }
  return result;
}

AlignmentResult best_primitive(const PointCloud& cloud, const IcpOptions& opts) {
  if (cloud.size() < 4)
    throw DegenerateInputError("best_primitive needs at least 4 points, got " +
                               std::to_string(cloud.size()));
  const OrientedBox obb = fit_obb(cloud);
  const std::vector<PrimitiveCandidate> candidates =
      candidate_set_scaled(obb, robust_extents(obb, cloud));
  const KdTree3 tree(cloud);

  IcpOptions run_opts = opts;
  if (run_opts.gate <= 0.0) run_opts.gate = 2.0 * obb.diagonal();

  // restart rotations: identity plus 3 extra permutations of the box axes
  const std::vector<Eigen::Matrix3d> restarts = {
      Eigen::Matrix3d::Identity(),
      cyclic_permutation(1),
      cyclic_permutation(2),
      (Eigen::Matrix3d() << 0, 1, 0, 1, 0, 0, 0, 0, -1).finished(),  // swap x/y, flip z
  };

  bool found = false;
  AlignmentResult best;
  auto rank = [](PrimitiveKind k) { return int(k); };  // box < cylinder < sphere
  for (const auto& candidate : candidates) {
    for (const auto& restart : restarts) {
      RigidTransform init;
      init.rotation = obb.axes * candidate.base_rotation * restart;
      init.translation = obb.center;
      try {
        const IcpResult icp = icp_align(candidate, tree, init, run_opts);
        const bool better =
            !found || icp.cost < best.cost ||
            (icp.cost == best.cost && rank(candidate.kind) < rank(best.model.kind));
        if (better) {
          best.model = candidate;
          best.transform = icp.transform;
          best.cost = icp.cost;
          found = true;
        }
      } catch (const NoConvergenceError&) {
        // other starts may still converge
      }
    }
  }
  if (!found) throw FittingFailedError("best_primitive: no candidate alignment converged");
  return best;
}

namespace {

std::vector<SurfacePlane> box_planes(const Eigen::Vector3d& scale) {
  std::vector<SurfacePlane> out;
  const Eigen::Vector3d h = scale / 2.0;
  for (int axis = 0; axis < 3; ++axis) {
    for (double sign : {1.0, -1.0}) {
      const Eigen::Vector3d n = sign * Eigen::Vector3d::Unit(axis);
      const Plane plane(n, -h[axis]);
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      std::vector<Eigen::Vector3d> corners;
      for (auto [su, sv] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}) {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        c[axis] = sign * h[axis];
        c[u] = su * h[u];
        c[v] = sv * h[v];
        corners.push_back(c);
      }
      out.push_back({plane, PlanarPolygon(corners, plane)});
    }
  }
  return out;
}

std::vector<SurfacePlane> cylinder_cap_planes(const Eigen::Vector3d& scale, int segments) {
  std::vector<SurfacePlane> out;
  const double r = scale.x() / 2.0;
  const double h = scale.z() / 2.0;
  for (double sign : {1.0, -1.0}) {
    const Eigen::Vector3d n = sign * Eigen::Vector3d::UnitZ();
    const Plane plane(n, -h);
    std::vector<Eigen::Vector3d> rim;
    for (int i = 0; i < segments; ++i) {
      const double a = 2.0 * M_PI * i / segments;
      rim.emplace_back(r * std::cos(a), r * std::sin(a), sign * h);
    }
    out.push_back({plane, PlanarPolygon(rim, plane)});
  }
  return out;
}

}  // namespace

std::vector<SurfacePlane> extract_planes(const PartEntity& entity, uint64_t seed) {
  if (entity.model) {
    switch (entity.model->kind) {
      case PrimitiveKind::Box:
        return box_planes(entity.model->scale);
      case PrimitiveKind::Cylinder:
        return cylinder_cap_planes(entity.model->scale, 64);
      case PrimitiveKind::Sphere:
        return {};
    }
  }
  RansacOptions opts;
  opts.seed = seed;
  return ransac_extract_planes(entity.cloud, opts);
}

std::vector<SurfacePlane> ransac_extract_planes(const PointCloud& cloud,
                                                const RansacOptions& opts) {
  std::vector<SurfacePlane> out;
  std::vector<Eigen::Vector3d> working = cloud;
  std::mt19937_64 rng(opts.seed);

  Eigen::Vector3d cloud_centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud) cloud_centroid += p;
  if (!cloud.empty()) cloud_centroid /= double(cloud.size());

  while (int(out.size()) < opts.max_planes && int(working.size()) >= opts.min_inliers) {
    std::uniform_int_distribution<size_t> pick(0, working.size() - 1);
    Plane best_plane;
    int best_count = 0;
    for (int iter = 0; iter < opts.iterations; ++iter) {
      const Eigen::Vector3d& a = working[pick(rng)];
      const Eigen::Vector3d& b = working[pick(rng)];
      const Eigen::Vector3d& c = working[pick(rng)];
      const Eigen::Vector3d n = (b - a).cross(c - a);
      if (n.norm() < 1e-12) continue;
      const Plane plane = Plane::through_point(n, a);
      int count = 0;
      for (const auto& p : working)
        if (std::abs(plane.signed_distance(p)) < opts.inlier_threshold) ++count;
      if (count > best_count) {
        best_count = count;
        best_plane = plane;
      }
    }
    if (best_count < opts.min_inliers) break;

    // least-squares refinement on the consensus set
    std::vector<Eigen::Vector3d> inliers;
    for (const auto& p : working)
      if (std::abs(best_plane.signed_distance(p)) < opts.inlier_threshold) inliers.push_back(p);
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : inliers) centroid += p;
    centroid /= double(inliers.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : inliers) {
      const Eigen::Vector3d d = p - centroid;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Eigen::Vector3d normal = eig.eigenvectors().col(0);
    // outward-facing convention: away from the cloud centroid
    if (normal.dot(centroid - cloud_centroid) < 0.0) normal = -normal;
    const Plane refined = Plane::through_point(normal, centroid);

    std::vector<Eigen::Vector3d> kept;
    inliers.clear();
    for (const auto& p : working) {
      if (std::abs(refined.signed_distance(p)) < opts.inlier_threshold)
        inliers.push_back(p);
      else
        kept.push_back(p);
    }
    if (int(inliers.size()) < opts.min_inliers) break;

    // boundary polygon: hull of the inliers projected to the plane
    Eigen::Vector3d e1, e2;
    plane_basis(refined, e1, e2);
    const Eigen::Vector3d origin = refined.anchor();
    std::vector<Eigen::Vector2d> flat;
    flat.reserve(inliers.size());
    for (const auto& p : inliers) {
      const Eigen::Vector3d proj = p - refined.signed_distance(p) * refined.normal;
      flat.emplace_back(e1.dot(proj - origin), e2.dot(proj - origin));
    }
    const std::vector<Eigen::Vector2d> hull = convex_hull_2d(flat);
    if (hull.size() < 3) break;
    std::vector<Eigen::Vector3d> boundary;
    boundary.reserve(hull.size());
    for (const auto& q : hull) boundary.push_back(origin + q.x() * e1 + q.y() * e2);
    out.push_back({refined, PlanarPolygon(boundary, refined)});
    working.swap(kept);
  }
  return out;
}

}  // namespace partscene
