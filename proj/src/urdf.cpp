#include "partscene/urdf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>

#include "partscene/errors.hpp"
#include "partscene/xml.hpp"

namespace partscene {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);  // normalize -0
  return buf;
}

std::string vec3(const Eigen::Vector3d& v) {
  return num(v.x()) + " " + num(v.y()) + " " + num(v.z());
}

XmlElement origin_element(const RigidTransform& t) {
  XmlElement origin("origin");
  origin.attr("xyz", vec3(t.translation));
  origin.attr("rpy", vec3(rotation_to_rpy(t.rotation)));
  return origin;
}

XmlElement geometry_element(const FittedModel& model) {
  XmlElement geometry("geometry");
  switch (model.kind) {
    case PrimitiveKind::Box: {
      XmlElement box("box");
      box.attr("size", vec3(model.scale));
      geometry.child(std::move(box));
      break;
    }
    case PrimitiveKind::Cylinder: {
      XmlElement cyl("cylinder");
      cyl.attr("radius", num(model.scale.x() / 2.0));
      cyl.attr("length", num(model.scale.z()));
      geometry.child(std::move(cyl));
      break;
    }
    case PrimitiveKind::Sphere: {
      XmlElement sphere("sphere");
      sphere.attr("radius", num(model.scale.x() / 2.0));
      geometry.child(std::move(sphere));
      break;
    }
  }
  return geometry;
}

XmlElement link_element(const std::string& name, const FittedModel* model) {
  XmlElement link("link");
  link.attr("name", name);
  if (model) {
    for (const char* tag : {"visual", "collision"}) {
      XmlElement part(tag);
      part.child(origin_element(RigidTransform::Identity()));
      part.child(geometry_element(*model));
      link.child(std::move(part));
    }
  }
  return link;
}

struct JointSpec {
  std::string name;
  JointType type = JointType::Fixed;
  std::string parent;
  std::string child;
  RigidTransform origin;
  std::optional<Eigen::Vector3d> axis;
  std::optional<std::pair<double, double>> limits;
};

XmlElement joint_element(const JointSpec& j) {
  XmlElement joint("joint");
  joint.attr("name", j.name);
  joint.attr("type", to_string(j.type));
  joint.child(origin_element(j.origin));
  joint.child(XmlElement("parent").attr("link", j.parent));
  joint.child(XmlElement("child").attr("link", j.child));
  if (j.axis) joint.child(XmlElement("axis").attr("xyz", vec3(*j.axis)));
  if (j.limits) {
    XmlElement limit("limit");
    limit.attr("lower", num(j.limits->first));
    limit.attr("upper", num(j.limits->second));
    limit.attr("effort", "100");
    limit.attr("velocity", "1");
    joint.child(std::move(limit));
  }
  return joint;
}

}  // namespace

std::string sanitize_name(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    out += ok ? c : '_';
  }
  if (out.empty()) out = "unnamed";
  return out;
}

std::string export_urdf(const ContactGraph& graph) {
  XmlElement robot("robot");
  robot.attr("name", "scene");

  auto link_name = [](const std::string& object, const std::string& part) {
    return sanitize_name(object + "/" + part);
  };

  // floor root link: a thin slab for viewers
  const std::string floor_name = sanitize_name(graph.root_label);
  FittedModel floor_geom;
  floor_geom.kind = PrimitiveKind::Box;
  floor_geom.scale = {20.0, 20.0, 0.001};
  std::set<std::string> link_names;
  std::string collisions;

  auto claim = [&](const std::string& name) {
    if (!link_names.insert(name).second)
      collisions += (collisions.empty() ? "" : ", ") + name;
    return name;
  };

  std::vector<XmlElement> links;
  std::vector<JointSpec> joints;

  {
    XmlElement floor_link = link_element(claim(floor_name), &floor_geom);
    // drop the slab just below z = 0 so it does not intersect the objects
    floor_link.children[0].children[0] =
        origin_element({Eigen::Matrix3d::Identity(), {0.0, 0.0, -0.0005}});
    floor_link.children[1].children[0] =
        origin_element({Eigen::Matrix3d::Identity(), {0.0, 0.0, -0.0005}});
    links.push_back(std::move(floor_link));
  }

  // objects come sorted by label from assemble_scene; sort again for safety
  std::vector<const ObjectNode*> objects;
  for (const auto& o : graph.objects) objects.push_back(&o);
  std::sort(objects.begin(), objects.end(), [](const ObjectNode* a, const ObjectNode* b) {
    return a->object_label < b->object_label;
  });

  for (const ObjectNode* obj : objects) {
    // parts in BFS order from the tree root, children sorted by label
    std::deque<std::string> queue = {obj->part_tree.root};
    while (!queue.empty()) {
      const std::string part_label = queue.front();
      queue.pop_front();
      const PartEntity& part = obj->part_tree.node(part_label);
      const std::string name = claim(link_name(obj->object_label, part_label));
      links.push_back(link_element(name, part.model ? &*part.model : nullptr));

      auto children = obj->part_tree.children_of(part_label);
      std::sort(children.begin(), children.end(),
                [](const ParseTreeEdge* a, const ParseTreeEdge* b) { return a->child < b->child; });
      for (const auto* e : children) {
        JointSpec j;
        j.name = sanitize_name(obj->object_label + "/" + e->parent + "_" + e->child + "_joint");
        j.type = e->joint.type;
        j.parent = link_name(obj->object_label, e->parent);
        j.child = link_name(obj->object_label, e->child);
        j.origin = e->joint.parent_to_child;
        j.axis = e->joint.axis;
        j.limits = e->joint.limits;
        joints.push_back(std::move(j));
        queue.push_back(e->child);
      }
    }
  }

  // supporting relations become fixed joints between object root links
  auto supporting = graph.supporting;
  std::sort(supporting.begin(), supporting.end());
  for (const auto& [supporter, supportee] : supporting) {
    const ObjectNode& child_obj = graph.object(supportee);
    JointSpec j;
    j.name = sanitize_name(supporter + "_" + supportee + "_support");
    j.type = JointType::Fixed;
    j.child = link_name(supportee, child_obj.part_tree.root);
    if (supporter == graph.root_label) {
      j.parent = floor_name;
      j.origin = child_obj.world_pose;
    } else {
      const ObjectNode& parent_obj = graph.object(supporter);
      j.parent = link_name(supporter, parent_obj.part_tree.root);
      j.origin = compose(invert(parent_obj.world_pose), child_obj.world_pose);
    }
    joints.push_back(std::move(j));
  }

  if (!collisions.empty())
    throw NamingCollisionError("duplicate sanitized link names: " + collisions);
  std::set<std::string> joint_names;
  std::string joint_collisions;
  for (const auto& j : joints)
    if (!joint_names.insert(j.name).second)
      joint_collisions += (joint_collisions.empty() ? "" : ", ") + j.name;
  if (!joint_collisions.empty())
    throw NamingCollisionError("duplicate sanitized joint names: " + joint_collisions);

  for (auto& link : links) robot.child(std::move(link));
  for (const auto& j : joints) robot.child(joint_element(j));
  return write_xml(robot);
}

std::map<std::string, TriangleMesh> export_link_meshes(const ContactGraph& graph) {
  std::map<std::string, TriangleMesh> out;
  for (const auto& obj : graph.objects) {
    for (const auto& part : obj.part_tree.nodes) {
      if (!part.model) continue;
      const std::string name = sanitize_name(obj.object_label + "/" + part.instance_label);
      out[name] = part.model->local_mesh();
    }
  }
  return out;
}

UrdfReport validate_urdf(const std::string& urdf_text) {
  const XmlElement robot = parse_xml(urdf_text);
  if (robot.name != "robot") throw Error(ErrorKind::Validation, "urdf: root element is not <robot>");

  std::set<std::string> links;
  for (const auto* link : robot.find_all("link")) {
    const std::string* name = link->find_attr("name");
    if (!name) throw Error(ErrorKind::Validation, "urdf: link without a name");
    if (!links.insert(*name).second)
      throw Error(ErrorKind::Validation, "urdf: duplicate link name '" + *name + "'");
  }
  if (links.empty()) throw Error(ErrorKind::Validation, "urdf: no links");

  struct ParsedJoint {
    std::string parent;
    std::string child;
  };
  std::vector<ParsedJoint> joints;
  std::set<std::string> joint_names;
  std::map<std::string, int> child_counts;
  for (const auto* joint : robot.find_all("joint")) {
    const std::string* name = joint->find_attr("name");
    const std::string* type = joint->find_attr("type");
    if (!name || !type) throw Error(ErrorKind::Validation, "urdf: joint missing name or type");
    if (!joint_names.insert(*name).second)
      throw Error(ErrorKind::Validation, "urdf: duplicate joint name '" + *name + "'");
    const JointType jt = joint_type_from_string(*type);  // throws on unknown types

    const auto parents = joint->find_all("parent");
    const auto children = joint->find_all("child");
    if (parents.size() != 1 || children.size() != 1)
      throw Error(ErrorKind::Validation, "urdf: joint '" + *name + "' needs one parent and one child");
    const std::string* parent_link = parents[0]->find_attr("link");
    const std::string* child_link = children[0]->find_attr("link");
    if (!parent_link || !child_link || !links.count(*parent_link) || !links.count(*child_link))
      throw Error(ErrorKind::Validation,
                  "urdf: joint '" + *name + "' references an unknown link");

    if (jt != JointType::Fixed) {
      const auto axes = joint->find_all("axis");
      if (axes.size() != 1)
        throw Error(ErrorKind::Validation, "urdf: joint '" + *name + "' needs an axis");
      const std::string* xyz = axes[0]->find_attr("xyz");
      Eigen::Vector3d axis = Eigen::Vector3d::Zero();
      if (!xyz || std::sscanf(xyz->c_str(), "%lf %lf %lf", &axis.x(), &axis.y(), &axis.z()) != 3)
        throw Error(ErrorKind::Validation, "urdf: joint '" + *name + "' has a malformed axis");
      if (std::abs(axis.norm() - 1.0) > 1e-6)
        throw Error(ErrorKind::Validation, "urdf: joint '" + *name + "' axis is not unit length");
      const auto limits = joint->find_all("limit");
      if (limits.size() != 1)
        throw Error(ErrorKind::Validation, "urdf: joint '" + *name + "' needs limits");
      const std::string* lower = limits[0]->find_attr("lower");
      const std::string* upper = limits[0]->find_attr("upper");
      if (!lower || !upper || !(std::stod(*lower) < std::stod(*upper)))
        throw Error(ErrorKind::Validation,
                    "urdf: joint '" + *name + "' limits must satisfy lower < upper");
    }

    joints.push_back({*parent_link, *child_link});
    child_counts[*child_link] += 1;
  }

  std::string root;
  for (const auto& link : links) {
    if (child_counts.count(link)) continue;
    if (!root.empty())
      throw Error(ErrorKind::Validation, "urdf: multiple root links ('" + root + "', '" + link + "')");
    root = link;
  }
  if (root.empty()) throw Error(ErrorKind::Validation, "urdf: no root link (joint cycle)");
  for (const auto& [link, count] : child_counts)
    if (count != 1)
      throw Error(ErrorKind::Validation, "urdf: link '" + link + "' is the child of " +
                                             std::to_string(count) + " joints");
  if (joints.size() != links.size() - 1)
    throw Error(ErrorKind::Validation,
                "urdf: expected |joints| = |links| - 1, got " + std::to_string(joints.size()) +
                    " joints for " + std::to_string(links.size()) + " links");

  // acyclic + connected: every link reaches the root via parent joints
  std::map<std::string, std::string> parent_of;
  for (const auto& j : joints) parent_of[j.child] = j.parent;
  for (const auto& link : links) {
    std::string cur = link;
    size_t hops = 0;
    while (cur != root && hops <= links.size()) {
      cur = parent_of[cur];
      ++hops;
    }
    if (cur != root)
      throw Error(ErrorKind::Validation, "urdf: link '" + link + "' does not reach the root");
  }

  UrdfReport report;
  report.links = int(links.size());
  report.joints = int(joints.size());
  report.root_link = root;
  return report;
}

}  // namespace partscene
