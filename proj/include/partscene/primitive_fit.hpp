#pragma once

#include <cstdint>
#include <vector>

#include "partscene/kdtree.hpp"
#include "partscene/part.hpp"

namespace partscene {

// Scaled primitive template plus the canonical-to-OBB-frame rotation its
// alignment starts from.
struct PrimitiveCandidate {
  PrimitiveKind kind = PrimitiveKind::Box;
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();
  Eigen::Matrix3d base_rotation = Eigen::Matrix3d::Identity();

  TriangleMesh model_mesh(int cylinder_segments = 64) const;
};

struct AlignmentResult {
  PrimitiveCandidate model;
  RigidTransform transform;  // canonical frame -> world
  double cost = 0.0;         // mean sampled-surface-to-cloud distance, meters
};

struct IcpOptions {
  int surface_samples = 1000;
  int max_iterations = 100;
  double cost_tolerance = 1e-6;
  double gate = 0.0;  // correspondence gating radius; <= 0 means "derive from cloud OBB"
  uint64_t seed = 0;
};

struct IcpResult {
  RigidTransform transform;
  double cost = 0.0;
  std::vector<double> cost_trace;  // accepted iterations, non-increasing
};

// One candidate per template kind, scaled from the cloud's OBB: a box,
// cylinders with height along each OBB axis, and a mean-extent sphere.
std::vector<PrimitiveCandidate> candidate_set(const PointCloud& cloud);
std::vector<PrimitiveCandidate> candidate_set(const OrientedBox& obb);
// Explicit extents (e.g. the noise-robust per-axis estimate).
std::vector<PrimitiveCandidate> candidate_set_scaled(const OrientedBox& obb,
                                                     const Eigen::Vector3d& extents);

// n >= 100 evenly spread points on the candidate's scaled surface, in the
// canonical (local) frame.
PointCloud sample_surface(const PrimitiveCandidate& candidate, int n, uint64_t seed = 0);

// Point-to-point ICP of the candidate's sampled surface onto the cloud.
// The reported cost is the mean distance from every sample to its closest
// cloud point at the current transform, re-evaluated after each update;
// updates that fail to lower it are rejected, so the trace is non-increasing.
IcpResult icp_align(const PrimitiveCandidate& candidate, const KdTree3& cloud,
                    const RigidTransform& init, const IcpOptions& opts = {});
IcpResult icp_align(const PrimitiveCandidate& candidate, const PointCloud& cloud,
                    const RigidTransform& init, const IcpOptions& opts = {});

// Runs icp_align for every candidate from 4 starts each (the OBB pose and 3
// axis permutations); returns the lowest-cost alignment, ties broken by
// template order box < cylinder < sphere.
AlignmentResult best_primitive(const PointCloud& cloud, const IcpOptions& opts = {});

// Analytic surface planes of a fitted primitive (box faces, cylinder caps,
// none for spheres), in the part's local frame. Unfitted parts fall back to
// iterative RANSAC on the raw cloud.
std::vector<SurfacePlane> extract_planes(const PartEntity& entity, uint64_t seed = 0);

struct RansacOptions {
  double inlier_threshold = 0.005;  // meters
  int min_inliers = 50;
  int max_planes = 8;
  int iterations = 200;
  uint64_t seed = 0;
};

std::vector<SurfacePlane> ransac_extract_planes(const PointCloud& cloud,
                                                const RansacOptions& opts = {});

}  // namespace partscene
