#pragma once

#include "partscene/parse_tree.hpp"

namespace partscene {

// Index-paired unit normals of nearly aligned planes; child normals are
// sign-flipped so each pair's dot product is non-negative.
struct NormalCorrespondences {
  std::vector<Eigen::Vector3d> parent_normals;
  std::vector<Eigen::Vector3d> child_normals;

  size_t size() const { return parent_normals.size(); }
  bool empty() const { return parent_normals.empty(); }
};

// Pairs up plane-normal directions of the two entities (world frame) whose
// |dot| clears `gate`. +-face duplicates collapse to one direction per side;
// pairing is greedy by descending dot and one-to-one.
NormalCorrespondences aligned_plane_normals(const PartEntity& parent, const PartEntity& child,
                                            double gate);

// Rotation-only transform aligning the child normals onto the parent
// normals (Kabsch). Rank-1 sets get the minimal-angle rotation between the
// shared directions; empty sets give identity.
RigidTransform refine_rotation(const NormalCorrespondences& corr);

struct RefineOptions {
  double gate = 0.9;          // "nearly aligned" dot-product gate
  bool contact_snap = false;  // translate children so the contact distance is 0
};

// Top-down spatial refinement: per edge, re-estimate the child rotation from
// nearly-aligned plane normals and fold it into T_{p,c}; children see their
// parent's refined pose. Node world poses are refreshed on return.
PartParseTree refine_tree(const PartParseTree& tree, const RefineOptions& opts = {});
PartParseTree refine_tree(const PartParseTree& tree, double gate);

}  // namespace partscene
