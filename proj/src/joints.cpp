#include "partscene/joints.hpp"

#include <cmath>

#include <json.hpp>

#include "partscene/errors.hpp"

namespace partscene {

using nlohmann::json;

const char* to_string(JointType t) {
  switch (t) {
    case JointType::Fixed:
      return "fixed";
    case JointType::Prismatic:
      return "prismatic";
    case JointType::Revolute:
      return "revolute";
  }
  return "fixed";
}

JointType joint_type_from_string(const std::string& s) {
  if (s == "fixed") return JointType::Fixed;
  if (s == "prismatic") return JointType::Prismatic;
  if (s == "revolute") return JointType::Revolute;
  throw ParseError("unknown joint type '" + s + "'");
}

namespace {

const char* to_string(AxisRule r) {
  switch (r) {
    case AxisRule::None:
      return "none";
    case AxisRule::ContactNormalOutward:
      return "contact_normal_outward";
    case AxisRule::RimHinge:
      return "rim_hinge";
  }
  return "none";
}

AxisRule axis_rule_from_string(const std::string& s) {
  if (s == "none") return AxisRule::None;
  if (s == "contact_normal_outward") return AxisRule::ContactNormalOutward;
  if (s == "rim_hinge") return AxisRule::RimHinge;
  throw ParseError("unknown axis rule '" + s + "'");
}

const char* to_string(LimitRule r) {
  return r == LimitRule::ChildDepth ? "child_depth" : "explicit";
}

LimitRule limit_rule_from_string(const std::string& s) {
  if (s == "explicit") return LimitRule::Explicit;
  if (s == "child_depth") return LimitRule::ChildDepth;
  throw ParseError("unknown limit rule '" + s + "'");
}

}  // namespace

JointRuleTable JointRuleTable::builtin_defaults() {
  JointRuleTable t;
  const JointRule fixed{};
  JointRule revolute_door;
  revolute_door.type = JointType::Revolute;
  revolute_door.axis_rule = AxisRule::RimHinge;
  revolute_door.lower = 0.0;
  revolute_door.upper = M_PI / 2.0;
  JointRule prismatic_drawer;
  prismatic_drawer.type = JointType::Prismatic;
  prismatic_drawer.axis_rule = AxisRule::ContactNormalOutward;
  prismatic_drawer.limit_rule = LimitRule::ChildDepth;

  t.set("microwave_base", "microwave_door", revolute_door);
  t.set("cabinet_base", "cabinet_door", revolute_door);
  t.set("cabinet_base", "cabinet_drawer", prismatic_drawer);
  t.set("table_top", "table_leg", fixed);
  t.set("chair_seat", "chair_leg", fixed);
  t.set("chair_seat", "chair_back", fixed);
  t.set("bed_frame", "bed_mattress", fixed);
  t.set("bed_frame", "bed_headboard", fixed);
  t.set("bed_frame", "bed_leg", fixed);
  return t;
}

void JointRuleTable::set(const std::string& parent_class, const std::string& child_class,
                         const JointRule& rule) {
  rules_[parent_class + "/" + child_class] = rule;
}

std::optional<JointRule> JointRuleTable::find(const std::string& parent_class,
                                              const std::string& child_class) const {
  const auto it = rules_.find(parent_class + "/" + child_class);
  if (it == rules_.end()) return std::nullopt;
  return it->second;
}

JointRuleTable JointRuleTable::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("joint rule table: ") + e.what());
  }
  if (!doc.contains("rules") || !doc["rules"].is_object())
    throw ParseError("joint rule table: missing 'rules' object");
  JointRuleTable t;
  for (const auto& [key, value] : doc["rules"].items()) {
    const auto slash = key.find('/');
    if (slash == std::string::npos)
      throw ParseError("joint rule table: key '" + key + "' is not 'parent_class/child_class'");
    JointRule rule;
    rule.type = joint_type_from_string(value.value("type", "fixed"));
    rule.axis_rule = axis_rule_from_string(value.value("axis_rule", "none"));
    rule.limit_rule = limit_rule_from_string(value.value("limit_rule", "explicit"));
    rule.lower = value.value("lower", 0.0);
    rule.upper = value.value("upper", 0.0);
    t.rules_[key] = rule;
  }
  return t;
}

std::string JointRuleTable::to_json_text() const {
  json rules = json::object();
  for (const auto& [key, rule] : rules_) {
    rules[key] = {{"type", to_string(rule.type)},
                  {"axis_rule", to_string(rule.axis_rule)},
                  {"limit_rule", to_string(rule.limit_rule)},
                  {"lower", rule.lower},
                  {"upper", rule.upper}};
  }
  return json{{"schema_version", 1}, {"rules", rules}}.dump(2) + "\n";
}

namespace {

// Normal of the parent's contact plane (world), oriented from parent toward
// child.
Eigen::Vector3d outward_contact_normal(const PartEntity& parent, const PartEntity& child,
                                       const ContactEvidence& evidence) {
  const SurfacePlane sp = parent.world_planes().at(evidence.parent_plane_index);
  Eigen::Vector3d n = sp.plane.normal;
  if (n.dot(child.world_centroid() - parent.world_centroid()) < 0.0) n = -n;
  return n;
}

// Hinge direction: the contact polygon's boundary edge farthest from the
// parent centroid, in world coordinates.
Eigen::Vector3d rim_hinge_axis(const PartEntity& parent, const PartEntity& child,
                               const ContactEvidence& evidence) {
  const SurfacePlane pp = parent.world_planes().at(evidence.parent_plane_index);
  const SurfacePlane cp = child.world_planes().at(evidence.child_plane_index);
  const PlanarPolygon projected = project_polygon(cp.polygon, pp.plane, pp.plane.anchor());

  // contact region = parent polygon ^ projected child polygon, in 2D
  std::vector<Eigen::Vector2d> fa = to_plane_frame(pp.polygon, pp.plane);
  std::vector<Eigen::Vector2d> fb = to_plane_frame(projected, pp.plane);
  std::vector<Eigen::Vector2d> region = clip_convex_2d(fb, fa);
  if (region.size() < 2) region = fb;

  Eigen::Vector3d e1, e2;
  plane_basis(pp.plane, e1, e2);
  const Eigen::Vector3d origin = pp.plane.anchor();
  const Eigen::Vector3d parent_c = parent.world_centroid();

  double best_dist = -1.0;
  Eigen::Vector3d best_dir = Eigen::Vector3d::UnitZ();
  const size_t n = region.size();
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = region[i];
    const Eigen::Vector2d& b = region[(i + 1) % n];
    if ((b - a).norm() < 1e-9) continue;
    const Eigen::Vector2d mid2 = (a + b) / 2.0;
    const Eigen::Vector3d mid = origin + mid2.x() * e1 + mid2.y() * e2;
    const double dist = (mid - parent_c).norm();
    if (dist > best_dist) {
      best_dist = dist;
      const Eigen::Vector3d dir3 =
          (origin + b.x() * e1 + b.y() * e2) - (origin + a.x() * e1 + a.y() * e2);
      best_dir = dir3.normalized();
    }
  }
  // canonical sign: prefer +z-most direction, then +x, then +y
  if (best_dir.z() < -1e-12 || (std::abs(best_dir.z()) <= 1e-12 && best_dir.x() < -1e-12) ||
      (std::abs(best_dir.z()) <= 1e-12 && std::abs(best_dir.x()) <= 1e-12 && best_dir.y() < 0.0))
    best_dir = -best_dir;
  return best_dir;
}

}  // namespace

Joint assign_joint(const PartEntity& parent, const PartEntity& child,
                   const ContactEvidence& evidence, const JointRuleTable& rules) {
  Joint joint;
  joint.parent_to_child = compose(invert(parent.pose()), child.pose());

  const auto rule = rules.find(parent.semantic_class, child.semantic_class);
  if (!rule) {
    joint.defaulted = true;
    return joint;
  }
  joint.type = rule->type;
  if (joint.type == JointType::Fixed) return joint;

  Eigen::Vector3d axis_world;
  switch (rule->axis_rule) {
    case AxisRule::ContactNormalOutward:
      axis_world = outward_contact_normal(parent, child, evidence);
      break;
    case AxisRule::RimHinge:
      axis_world = rim_hinge_axis(parent, child, evidence);
      break;
    case AxisRule::None:
      axis_world = Eigen::Vector3d::UnitZ();
      break;
  }
  const Eigen::Vector3d axis_child = (child.pose().rotation.transpose() * axis_world).normalized();
  joint.axis = axis_child;

  double upper = rule->upper;
  if (rule->limit_rule == LimitRule::ChildDepth && child.model)
    upper = child.model->support_width(axis_child);
  joint.limits = std::make_pair(rule->lower, upper);
  return joint;
}

}  // namespace partscene
