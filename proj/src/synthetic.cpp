#include "partscene/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "partscene/config.hpp"
#include "partscene/errors.hpp"
#include "partscene/primitive_fit.hpp"

namespace partscene {

namespace {

struct TemplatePart {
  std::string label;
  std::string cls;
  PrimitiveKind kind;
  Eigen::Vector3d scale;
  Eigen::Vector3d center;  // object frame, feet at z = 0
};

struct TemplateEdge {
  std::string parent;
  std::string child;
  JointType type;
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();  // child frame
  std::pair<double, double> limits = {0.0, 0.0};
};

struct ObjectTemplate {
  std::string cls;
  std::string root;
  std::vector<TemplatePart> parts;
  std::vector<TemplateEdge> edges;
  double footprint = 1.0;  // placement spacing hint, meters
};

ObjectTemplate table_template() {
  ObjectTemplate t;
  t.cls = "table";
  t.root = "top";
  t.footprint = 1.4;
  t.parts.push_back({"top", "table_top", PrimitiveKind::Box, {1.2, 0.8, 0.05}, {0, 0, 0.695}});
  int i = 0;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) {
      t.parts.push_back({"leg_" + std::to_string(i), "table_leg", PrimitiveKind::Box,
                         {0.05, 0.05, 0.67},
                         {sx * 0.55, sy * 0.35, 0.335}});
      t.edges.push_back({"top", "leg_" + std::to_string(i), JointType::Fixed});
      ++i;
    }
  return t;
}

ObjectTemplate chair_template() {
  ObjectTemplate t;
  t.cls = "chair";
  t.root = "seat";
  t.footprint = 0.7;
  t.parts.push_back({"seat", "chair_seat", PrimitiveKind::Box, {0.45, 0.45, 0.05}, {0, 0, 0.425}});
  int i = 0;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) {
      t.parts.push_back({"leg_" + std::to_string(i), "chair_leg", PrimitiveKind::Box,
                         {0.04, 0.04, 0.40},
                         {sx * 0.19, sy * 0.19, 0.20}});
      t.edges.push_back({"seat", "leg_" + std::to_string(i), JointType::Fixed});
      ++i;
    }
  t.parts.push_back({"back", "chair_back", PrimitiveKind::Box, {0.45, 0.05, 0.50},
                     {0, -0.20, 0.70}});
  t.edges.push_back({"seat", "back", JointType::Fixed});
  return t;
}

ObjectTemplate cabinet_template() {
  ObjectTemplate t;
  t.cls = "cabinet";
  t.root = "base";
  t.footprint = 1.1;
  t.parts.push_back({"base", "cabinet_base", PrimitiveKind::Box, {0.6, 0.5, 0.8}, {0, 0, 0.4}});
  t.parts.push_back(
      {"drawer", "cabinet_drawer", PrimitiveKind::Box, {0.5, 0.4, 0.18}, {0, 0.45, 0.3}});
  t.edges.push_back(
      {"base", "drawer", JointType::Prismatic, Eigen::Vector3d::UnitY(), {0.0, 0.4}});
  return t;
}

ObjectTemplate microwave_template() {
  ObjectTemplate t;
  t.cls = "microwave";
  t.root = "base";
  t.footprint = 0.8;
  t.parts.push_back({"base", "microwave_base", PrimitiveKind::Box, {0.4, 0.5, 0.3}, {0, 0, 0.15}});
  t.parts.push_back(
      {"door", "microwave_door", PrimitiveKind::Box, {0.04, 0.38, 0.28}, {0.22, 0, 0.15}});
  t.edges.push_back(
      {"base", "door", JointType::Revolute, Eigen::Vector3d::UnitZ(), {0.0, M_PI / 2.0}});
  return t;
}

ObjectTemplate bed_template() {
  ObjectTemplate t;
  t.cls = "bed";
  t.root = "frame";
  t.footprint = 2.4;
  t.parts.push_back({"frame", "bed_frame", PrimitiveKind::Box, {2.0, 1.5, 0.35}, {0, 0, 0.175}});
  t.parts.push_back(
      {"mattress", "bed_mattress", PrimitiveKind::Box, {1.9, 1.4, 0.25}, {0, 0, 0.475}});
  t.parts.push_back(
      {"headboard", "bed_headboard", PrimitiveKind::Box, {0.08, 1.5, 0.9}, {-1.04, 0, 0.45}});
  t.edges.push_back({"frame", "mattress", JointType::Fixed});
  t.edges.push_back({"frame", "headboard", JointType::Fixed});
  return t;
}

ObjectTemplate get_template(const std::string& name) {
  if (name == "table") return table_template();
  if (name == "chair") return chair_template();
  if (name == "cabinet") return cabinet_template();
  if (name == "microwave") return microwave_template();
  if (name == "bed") return bed_template();
  throw ConfigError("unknown object template '" + name + "'");
}

}  // namespace

std::vector<std::string> known_templates() {
  return {"table", "chair", "cabinet", "microwave", "bed"};
}

void SyntheticSceneSpec::validate() const {
  if (templates.empty()) throw ConfigError("synthetic scene needs at least one template");
  for (const auto& name : templates) get_template(name);  // throws on unknown names
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
}

SyntheticScene generate_synthetic_scene(const SyntheticSceneSpec& spec) {
  spec.validate();

  SyntheticScene scene;
  scene.truth.root_label = "floor";
  scene.input.root_label = "floor";

  std::map<std::string, int> counts;
  std::mt19937_64 placement_rng(fnv1a("placement", spec.seed));
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  std::uniform_real_distribution<double> yaw_dist(0.0, 2.0 * M_PI);

  double cursor_x = 0.0;
  for (const auto& name : spec.templates) {
    const ObjectTemplate tmpl = get_template(name);
    const int index = counts[name]++;
    const std::string object_label = name + "_" + std::to_string(index);

    // deterministic placement: spaced along x with jittered offsets and yaw
    const double yaw = yaw_dist(placement_rng);
    RigidTransform object_pose;
    object_pose.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    object_pose.translation =
        Eigen::Vector3d(cursor_x + jitter(placement_rng), jitter(placement_rng), 0.0);
    cursor_x += tmpl.footprint + 2.0;

    // truth parts with their exact world poses
    PartParseTree tree;
    tree.root = tmpl.root;
    for (const auto& tp : tmpl.parts) {
      PartEntity part;
      part.instance_label = tp.label;
      part.semantic_class = tp.cls;
      FittedModel model;
      model.kind = tp.kind;
      model.scale = tp.scale;
      model.pose = compose(object_pose, {Eigen::Matrix3d::Identity(), tp.center});
      part.model = model;
      part.planes = extract_planes(part);
      tree.nodes.push_back(std::move(part));
    }
    for (const auto& te : tmpl.edges) {
      ParseTreeEdge edge;
      edge.parent = te.parent;
      edge.child = te.child;
      edge.joint.type = te.type;
      edge.joint.parent_to_child =
          compose(invert(tree.node(te.parent).pose()), tree.node(te.child).pose());
      if (te.type != JointType::Fixed) {
        edge.joint.axis = te.axis;
        edge.joint.limits = te.limits;
      }
      // evidence from the actual geometry so edge scores are meaningful
      ContactThresholds permissive;
      permissive.theta_c = 1e-6;
      const auto ev = check_contact(tree.node(te.parent), tree.node(te.child), permissive);
      if (ev) edge.evidence = *ev;
      tree.edges.push_back(std::move(edge));
    }
    scene.truth.objects.push_back(ObjectNode::from_tree(object_label, tmpl.cls, tree));

    for (const auto& te : tmpl.edges)
      scene.annotated[object_label].push_back({te.parent, te.child});

    // degraded input clouds
    ObjectNode input_obj;
    input_obj.object_label = object_label;
    input_obj.semantic_class = tmpl.cls;
    input_obj.part_tree.root = tmpl.root;
    const Eigen::Vector3d camera =
        object_pose.translation + Eigen::Vector3d(3.0, -3.0, 2.2);
    for (const auto& tp : tmpl.parts) {
      const PartEntity& truth_part =
          scene.truth.objects.back().part_tree.node(tp.label);
      const TriangleMesh local = truth_part.model->local_mesh();
      const double area = local.surface_area();
      const int n = std::clamp(int(std::lround(area * 6000.0)), 1500, 12000);
      const uint64_t part_seed = fnv1a(object_label + "/" + tp.label, spec.seed);

      std::vector<Eigen::Vector3d> normals;
      const PointCloud pts = sample_mesh_surface(local, n, part_seed, &normals);

      const RigidTransform& pose = truth_part.model->pose;
      std::mt19937_64 rng(fnv1a("degrade", part_seed));
      std::normal_distribution<double> gauss(0.0, spec.noise_sigma);
      std::uniform_real_distribution<double> coin(0.0, 1.0);

      PointCloud cloud;
      cloud.reserve(pts.size());
      for (size_t i = 0; i < pts.size(); ++i) {
        Eigen::Vector3d world = pose.apply(pts[i]);
        const Eigen::Vector3d world_n = pose.rotation * normals[i];
        if (spec.partial_view && world_n.dot(world - camera) > 0.0) continue;
        if (spec.dropout > 0.0 && coin(rng) < spec.dropout) continue;
        if (spec.noise_sigma > 0.0)
          world += Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
        cloud.push_back(world);
      }

      PartEntity input_part;
      input_part.instance_label = tp.label;
      input_part.semantic_class = tp.cls;
      input_part.cloud = std::move(cloud);
      input_obj.part_tree.nodes.push_back(std::move(input_part));
    }
    scene.input.objects.push_back(std::move(input_obj));
  }

  // scene-level truth relations from the actual geometry
  std::vector<ObjectNode> objects = scene.truth.objects;
  AssembleOptions opts;
  scene.truth = assemble_scene(std::move(objects), opts);
  // keep input object order aligned with the sorted truth
  std::sort(scene.input.objects.begin(), scene.input.objects.end(),
            [](const ObjectNode& a, const ObjectNode& b) {
              return a.object_label < b.object_label;
            });
  return scene;
}

}  // namespace partscene
