#pragma once

#include <string>
#include <vector>

#include "partscene/parse_tree.hpp"
#include "partscene/refine.hpp"

namespace partscene {

// One object in the scene: its class, world pose (= pose of the part-tree
// root part), and the part-level parse tree.
struct ObjectNode {
  std::string object_label;
  std::string semantic_class;
  RigidTransform world_pose;
  PartParseTree part_tree;

  static ObjectNode from_tree(std::string label, std::string cls, PartParseTree tree);

  // Rigid world-frame correction applied to the whole object.
  void apply_world_correction(const RigidTransform& fix);
  // All part surface planes in world coordinates (flattened).
  std::vector<SurfacePlane> all_world_planes() const;
  std::vector<OrientedBox> part_boxes() const;
};

// Scene-level structure: a supporting tree rooted at the floor plus
// unordered proximal relations.
struct ContactGraph {
  std::string root_label = "floor";
  ContactThresholds thresholds;
  double proximity_radius = 0.1;  // meters
  std::vector<ObjectNode> objects;
  std::vector<std::pair<std::string, std::string>> supporting;  // (supporter, supportee)
  std::vector<std::pair<std::string, std::string>> proximal;    // sorted label pairs

  const ObjectNode& object(const std::string& label) const;
  ObjectNode& object(const std::string& label);
  // Supporting edges form a tree over {root} + objects.
  bool supporting_is_tree() const;
};

// Floor reference geometry: a 20 x 20 m square at z = 0 facing +z.
SurfacePlane floor_plane();

struct AssembleOptions {
  ContactThresholds thresholds;
  double proximity_radius = 0.1;
};

// Builds the scene graph: each object gets the supporter with the highest
// contact ratio among the floor and lower objects (floating objects fall
// back to the floor with a warning); proximal edges connect non-supporting
// pairs whose closest part boxes are nearer than the proximity radius.
ContactGraph assemble_scene(std::vector<ObjectNode> objects, const AssembleOptions& opts = {},
                            std::vector<std::string>* warnings = nullptr);

// Top-down pose refinement along the supporting tree: align each object's
// contact plane with its supporter's plane (Kabsch on the normals), then
// translate along the supporter normal until the contact distance is zero.
// Supported objects inherit their supporter's correction rigidly.
ContactGraph refine_object_poses(const ContactGraph& graph);

}  // namespace partscene
