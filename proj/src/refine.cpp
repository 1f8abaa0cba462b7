#include "partscene/refine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace partscene {

namespace {

// Collapse +-facing duplicates to one representative direction per side.
std::vector<Eigen::Vector3d> unique_directions(const std::vector<SurfacePlane>& planes) {
  std::vector<Eigen::Vector3d> out;
  for (const auto& sp : planes) {
    Eigen::Vector3d n = sp.plane.normal;
    bool duplicate = false;
    for (const auto& seen : out)
      if (std::abs(seen.dot(n)) > 1.0 - 1e-7) {
        duplicate = true;
        break;
      }
    if (!duplicate) out.push_back(n);
  }
  return out;
}

}  // namespace

NormalCorrespondences aligned_plane_normals(const PartEntity& parent, const PartEntity& child,
                                            double gate) {
  const std::vector<Eigen::Vector3d> parent_dirs = unique_directions(parent.world_planes());
  const std::vector<Eigen::Vector3d> child_dirs = unique_directions(child.world_planes());

  struct Pair {
    double dot;
    size_t p;
    size_t c;
  };
  std::vector<Pair> pairs;
  for (size_t p = 0; p < parent_dirs.size(); ++p)
    for (size_t c = 0; c < child_dirs.size(); ++c) {
      const double dot = std::abs(parent_dirs[p].dot(child_dirs[c]));
      if (dot >= gate) pairs.push_back({dot, p, c});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dot != b.dot) return a.dot > b.dot;
    if (a.p != b.p) return a.p < b.p;
    return a.c < b.c;
  });

  NormalCorrespondences corr;
  std::vector<bool> p_used(parent_dirs.size(), false), c_used(child_dirs.size(), false);
  for (const auto& pair : pairs) {
    if (p_used[pair.p] || c_used[pair.c]) continue;
    p_used[pair.p] = true;
    c_used[pair.c] = true;
    const Eigen::Vector3d np = parent_dirs[pair.p];
    Eigen::Vector3d nc = child_dirs[pair.c];
    if (np.dot(nc) < 0.0) nc = -nc;  // sign canonicalization
    corr.parent_normals.push_back(np);
    corr.child_normals.push_back(nc);
  }
  return corr;
}

RigidTransform refine_rotation(const NormalCorrespondences& corr) {
  RigidTransform out;
  if (corr.empty()) return out;

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < corr.size(); ++i)
    h += corr.child_normals[i] * corr.parent_normals[i].transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h);
  const Eigen::Vector3d sv = svd.singularValues();
  const int rank = (sv(0) > 1e-9) + (sv(1) > 1e-9) + (sv(2) > 1e-9);

  if (rank <= 1) {
    // all normals share one direction: rotate only that direction, leaving
    // the remaining rotational freedom untouched
    Eigen::Vector3d c = Eigen::Vector3d::Zero(), p = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < corr.size(); ++i) {
      c += corr.child_normals[i];
      p += corr.parent_normals[i];
    }
    if (c.norm() < 1e-12 || p.norm() < 1e-12) return out;
    out.rotation = rotation_between(c.normalized(), p.normalized());
    return out;
  }

  out.rotation = optimal_rotation(corr.child_normals, corr.parent_normals);
  return out;
}

PartParseTree refine_tree(const PartParseTree& tree, double gate) {
  RefineOptions opts;
  opts.gate = gate;
  return refine_tree(tree, opts);
}

PartParseTree refine_tree(const PartParseTree& tree, const RefineOptions& opts) {
  PartParseTree out = tree;
  out.refresh_world_poses();

  std::deque<std::string> queue;
  for (const auto* e : out.children_of(out.root)) queue.push_back(e->child);

  while (!queue.empty()) {
    const std::string label = queue.front();
    queue.pop_front();

    ParseTreeEdge* edge = nullptr;
    for (auto& e : out.edges)
      if (e.child == label) edge = &e;
    if (!edge) continue;

    PartEntity& parent = out.node(edge->parent);
    PartEntity& child = out.node(label);

    // derive the child pose from the (already refined) parent before
    // comparing normals, so corrections do not fight stale poses
    if (child.model)
      child.model->pose = compose(parent.pose(), edge->joint.parent_to_child);

    const NormalCorrespondences corr = aligned_plane_normals(parent, child, opts.gate);
    const RigidTransform world_fix = refine_rotation(corr);
    if (child.model) {
      // convert the world correction into the child's local frame so it
      // right-multiplies T_{p,c} (rotation about the child origin)
      const Eigen::Matrix3d rc = child.model->pose.rotation;
      RigidTransform local_fix;
      local_fix.rotation = rc.transpose() * world_fix.rotation * rc;
      edge->joint.parent_to_child = compose(edge->joint.parent_to_child, local_fix);
      child.model->pose = compose(parent.pose(), edge->joint.parent_to_child);
    }

    if (opts.contact_snap && child.model && edge->evidence.parent_plane_index >= 0) {
      const auto parent_planes = parent.world_planes();
      const auto child_planes = child.world_planes();
      if (edge->evidence.parent_plane_index < int(parent_planes.size()) &&
          edge->evidence.child_plane_index < int(child_planes.size())) {
        const Plane& pp = parent_planes[edge->evidence.parent_plane_index].plane;
        const PlanarPolygon& cp = child_planes[edge->evidence.child_plane_index].polygon;
        double dist = 0.0;
        for (const auto& u : cp.vertices) dist += pp.signed_distance(u);
        dist /= double(cp.vertices.size());
        const Eigen::Vector3d delta_world = -dist * pp.normal;
        edge->joint.parent_to_child.translation +=
            parent.pose().rotation.transpose() * delta_world;
        child.model->pose = compose(parent.pose(), edge->joint.parent_to_child);
      }
    }

    for (const auto* e : out.children_of(label)) queue.push_back(e->child);
  }
  out.refresh_world_poses();
  return out;
}

}  // namespace partscene
