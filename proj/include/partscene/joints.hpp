#pragma once

#include <map>
#include <optional>
#include <string>

#include "partscene/contact.hpp"
#include "partscene/part.hpp"

namespace partscene {

enum class JointType { Fixed, Prismatic, Revolute };

const char* to_string(JointType t);
JointType joint_type_from_string(const std::string& s);

// Parametric joint on a parse-tree edge. Fixed joints carry no axis/limits.
struct Joint {
  JointType type = JointType::Fixed;
  RigidTransform parent_to_child;
  std::optional<Eigen::Vector3d> axis;  // unit, child frame
  std::optional<std::pair<double, double>> limits;  // meters or radians
  bool defaulted = false;         // class pair missing from the rule table
  bool heuristic_attach = false;  // plane-less part attached by proximity
};

enum class AxisRule {
  None,                   // fixed joints
  ContactNormalOutward,   // prismatic: parent contact normal, away from parent
  RimHinge,               // revolute: contact-polygon edge farthest from parent
};

enum class LimitRule {
  Explicit,    // use lower/upper as stored
  ChildDepth,  // upper = child's support width along the joint axis
};

struct JointRule {
  JointType type = JointType::Fixed;
  AxisRule axis_rule = AxisRule::None;
  LimitRule limit_rule = LimitRule::Explicit;
  double lower = 0.0;
  double upper = 0.0;
};

// Articulation templates keyed by "parent_class/child_class". Ships with
// built-in furniture defaults; loadable/savable as JSON for editing.
class JointRuleTable {
 public:
  static JointRuleTable builtin_defaults();
  static JointRuleTable from_json_text(const std::string& text);
  std::string to_json_text() const;

  void set(const std::string& parent_class, const std::string& child_class, const JointRule& rule);
  std::optional<JointRule> find(const std::string& parent_class,
                                const std::string& child_class) const;

  const std::map<std::string, JointRule>& rules() const { return rules_; }

 private:
  std::map<std::string, JointRule> rules_;
};

// Joint for a contact edge: type from the rule table (unknown pairs default
// to fixed with the `defaulted` flag), T_{p,c} from the entities' current
// poses, axis per the rule expressed in the child frame.
Joint assign_joint(const PartEntity& parent, const PartEntity& child,
                   const ContactEvidence& evidence, const JointRuleTable& rules);

}  // namespace partscene
