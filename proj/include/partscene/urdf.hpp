#pragma once

#include <map>
#include <string>

#include "partscene/contact_graph.hpp"

namespace partscene {

// URDF text for the scene: one link per part (native primitive geometry),
// one joint per parse-tree edge, fixed joints for supporting relations.
// Link names are sanitized "<object>/<part>" labels; collisions raise
// NamingCollisionError. Output is byte-stable for identical input.
std::string export_urdf(const ContactGraph& graph);

// Mesh per link for viewers without primitive support, keyed by link name.
std::map<std::string, TriangleMesh> export_link_meshes(const ContactGraph& graph);

struct UrdfReport {
  int links = 0;
  int joints = 0;
  std::string root_link;
};

// Structural validation of a URDF document: unique names, exactly one root
// link, every non-root link the child of exactly one joint, known joint
// types, unit axes and ordered limits on moving joints, acyclic kinematics.
// Throws ParseError / Error(Validation) describing the first violation.
UrdfReport validate_urdf(const std::string& urdf_text);

std::string sanitize_name(const std::string& raw);

}  // namespace partscene
