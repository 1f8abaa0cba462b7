#pragma once

#include <string>
#include <vector>

#include "partscene/arborescence.hpp"
#include "partscene/contact.hpp"
#include "partscene/joints.hpp"

namespace partscene {

struct ParseTreeEdge {
  std::string parent;
  std::string child;
  Joint joint;
  ContactEvidence evidence;
};

// Rooted spanning tree over an object's parts with joints on the edges.
struct PartParseTree {
  std::string root;
  std::vector<PartEntity> nodes;
  std::vector<ParseTreeEdge> edges;

  const PartEntity& node(const std::string& label) const;
  PartEntity& node(const std::string& label);
  std::vector<const ParseTreeEdge*> children_of(const std::string& label) const;
  // |edges| == |nodes| - 1, one parent per non-root node, no cycles.
  bool is_well_formed() const;
  // Recompute node poses from the root pose and edge transforms (top-down).
  void refresh_world_poses();
};

// Deterministic root choice: first semantic base-class match in priority
// order {base, top, seat, frame} (matched against '_'-separated class
// tokens), then largest fitted volume, then lexicographic label.
std::string select_root(const std::vector<PartEntity>& parts, const ContactDigraph& digraph);

// Full structure inference: contact digraph -> root -> maximum arborescence
// -> joint assignment. Plane-less parts bypass the contact constraints and
// attach to the nearest part with a flagged fixed joint.
PartParseTree infer_parse_tree(const std::vector<PartEntity>& parts, const ContactThresholds& th,
                               const JointRuleTable& rules = JointRuleTable::builtin_defaults());

// Removes (and returns) planed parts the contact digraph cannot reach from
// the selected root, leaving `parts` inferable. Plane-less parts always stay.
std::vector<PartEntity> drop_unreachable_parts(std::vector<PartEntity>& parts,
                                               const ContactThresholds& th);

}  // namespace partscene
