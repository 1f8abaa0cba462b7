#include "partscene/contact_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>

#include "partscene/errors.hpp"

namespace partscene {

ObjectNode ObjectNode::from_tree(std::string label, std::string cls, PartParseTree tree) {
  ObjectNode node;
  node.object_label = std::move(label);
  node.semantic_class = std::move(cls);
  node.part_tree = std::move(tree);
  node.part_tree.refresh_world_poses();
  node.world_pose = node.part_tree.node(node.part_tree.root).pose();
  return node;
}

void ObjectNode::apply_world_correction(const RigidTransform& fix) {
  world_pose = compose(fix, world_pose);
  PartEntity& root = part_tree.node(part_tree.root);
  if (root.model) root.model->pose = world_pose;
  part_tree.refresh_world_poses();
}

std::vector<SurfacePlane> ObjectNode::all_world_planes() const {
  std::vector<SurfacePlane> out;
  for (const auto& part : part_tree.nodes) {
    const auto planes = part.world_planes();
    out.insert(out.end(), planes.begin(), planes.end());
  }
  return out;
}

std::vector<OrientedBox> ObjectNode::part_boxes() const {
  std::vector<OrientedBox> out;
  for (const auto& part : part_tree.nodes) {
    OrientedBox box;
    if (part.model) {
      box.axes = part.model->pose.rotation;
      box.center = part.model->pose.translation;
      box.half_extents = part.model->scale / 2.0;
    } else if (part.cloud.size() >= 4) {
      box = fit_obb(part.cloud);
    } else {
      continue;
    }
    out.push_back(box);
  }
  return out;
}

const ObjectNode& ContactGraph::object(const std::string& label) const {
  for (const auto& o : objects)
    if (o.object_label == label) return o;
  throw Error(ErrorKind::Internal, "scene has no object '" + label + "'");
}

ObjectNode& ContactGraph::object(const std::string& label) {
  for (auto& o : objects)
    if (o.object_label == label) return o;
  throw Error(ErrorKind::Internal, "scene has no object '" + label + "'");
}

bool ContactGraph::supporting_is_tree() const {
  if (supporting.size() != objects.size()) return false;
  std::map<std::string, int> indegree;
  indegree[root_label] = 0;
  for (const auto& o : objects) indegree[o.object_label] = 0;
  for (const auto& [supporter, supportee] : supporting) {
    if (!indegree.count(supporter) || !indegree.count(supportee)) return false;
    indegree[supportee] += 1;
  }
  if (indegree[root_label] != 0) return false;
  for (const auto& o : objects)
    if (indegree[o.object_label] != 1) return false;
  // acyclic by reachability
  std::set<std::string> seen = {root_label};
  std::deque<std::string> queue = {root_label};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    for (const auto& [s, t] : supporting)
      if (s == cur && !seen.count(t)) {
        seen.insert(t);
        queue.push_back(t);
      }
  }
  return seen.size() == objects.size() + 1;
}

SurfacePlane floor_plane() {
  const Plane plane(Eigen::Vector3d::UnitZ(), 0.0);
  const double h = 10.0;
  return {plane,
          PlanarPolygon({{-h, -h, 0.0}, {h, -h, 0.0}, {h, h, 0.0}, {-h, h, 0.0}}, plane)};
}

namespace {

PartEntity pseudo_entity(const std::string& label, std::vector<SurfacePlane> planes) {
  PartEntity e;
  e.instance_label = label;
  e.planes = std::move(planes);
  return e;
}

double min_z(const ObjectNode& o) {
  double z = std::numeric_limits<double>::max();
  for (const auto& box : o.part_boxes())
    for (const auto& c : box.corners()) z = std::min(z, c.z());
  return z;
}

}  // namespace

ContactGraph assemble_scene(std::vector<ObjectNode> objects, const AssembleOptions& opts,
                            std::vector<std::string>* warnings) {
  if (objects.empty()) throw PreconditionError("assemble_scene: no objects");
  opts.thresholds.validate();

  ContactGraph graph;
  graph.thresholds = opts.thresholds;
  graph.proximity_radius = opts.proximity_radius;
  graph.objects = std::move(objects);
  std::sort(graph.objects.begin(), graph.objects.end(),
            [](const ObjectNode& a, const ObjectNode& b) {
              return a.object_label < b.object_label;
            });

  const PartEntity floor = pseudo_entity(graph.root_label, {floor_plane()});

  // supporters are assigned bottom-up so the supporting relation cannot cycle
  std::vector<int> order(graph.objects.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::vector<double> zs(graph.objects.size());
  for (size_t i = 0; i < graph.objects.size(); ++i) zs[i] = min_z(graph.objects[i]);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (zs[a] != zs[b]) return zs[a] < zs[b];
    return graph.objects[a].object_label < graph.objects[b].object_label;
  });

  std::vector<PartEntity> pseudo;
  pseudo.reserve(graph.objects.size());
  for (const auto& o : graph.objects)
    pseudo.push_back(pseudo_entity(o.object_label, o.all_world_planes()));

  std::vector<bool> placed(graph.objects.size(), false);
  for (int idx : order) {
    const ObjectNode& obj = graph.objects[idx];
    std::string best_supporter;
    double best_ratio = -1.0;

    const auto consider = [&](const PartEntity& candidate, const std::string& label) {
      const auto ev = check_contact(candidate, pseudo[idx], graph.thresholds);
      if (ev && ev->contact_ratio > best_ratio) {
        best_ratio = ev->contact_ratio;
        best_supporter = label;
      }
    };
    consider(floor, graph.root_label);
    for (size_t j = 0; j < graph.objects.size(); ++j)
      if (placed[j] && int(j) != idx) consider(pseudo[j], graph.objects[j].object_label);

    if (best_supporter.empty()) {
      if (warnings)
        warnings->push_back("object '" + obj.object_label +
                            "' has no satisfiable supporter; attached to the floor");
      best_supporter = graph.root_label;
    }
    graph.supporting.push_back({best_supporter, obj.object_label});
    placed[idx] = true;
  }
  std::sort(graph.supporting.begin(), graph.supporting.end());

  // proximal relations between non-supporting pairs
  std::set<std::pair<std::string, std::string>> support_pairs;
  for (const auto& [s, t] : graph.supporting) {
    support_pairs.insert({s, t});
    support_pairs.insert({t, s});
  }
  for (size_t a = 0; a < graph.objects.size(); ++a) {
    const auto boxes_a = graph.objects[a].part_boxes();
    for (size_t b = a + 1; b < graph.objects.size(); ++b) {
      if (support_pairs.count({graph.objects[a].object_label, graph.objects[b].object_label}))
        continue;
      const auto boxes_b = graph.objects[b].part_boxes();
      double sep = std::numeric_limits<double>::max();
      for (const auto& ba : boxes_a)
        for (const auto& bb : boxes_b) sep = std::min(sep, obb_distance(ba, bb));
      if (sep < graph.proximity_radius)
        graph.proximal.push_back(
            {graph.objects[a].object_label, graph.objects[b].object_label});
    }
  }
  std::sort(graph.proximal.begin(), graph.proximal.end());
  return graph;
}

ContactGraph refine_object_poses(const ContactGraph& graph) {
  ContactGraph out = graph;

  std::map<std::string, std::vector<std::string>> supportees;
  for (const auto& [s, t] : out.supporting) supportees[s].push_back(t);

  const PartEntity floor = pseudo_entity(out.root_label, {floor_plane()});

  std::deque<std::string> queue;
  for (const auto& t : supportees[out.root_label]) queue.push_back(t);
  // corrections cascade: each object's fix is applied to its whole subtree
  // before the subtree refines itself
  while (!queue.empty()) {
    const std::string label = queue.front();
    queue.pop_front();
    ObjectNode& obj = out.object(label);

    std::string supporter_label;
    for (const auto& [s, t] : out.supporting)
      if (t == label) supporter_label = s;
    const PartEntity supporter_entity =
        supporter_label == out.root_label
            ? floor
            : pseudo_entity(supporter_label,
                            out.object(supporter_label).all_world_planes());
    const PartEntity obj_entity = pseudo_entity(label, obj.all_world_planes());

    const auto ev = check_contact(supporter_entity, obj_entity, out.thresholds);
    if (ev) {
      const SurfacePlane sp = supporter_entity.planes[ev->parent_plane_index];
      const SurfacePlane cp = obj_entity.planes[ev->child_plane_index];

      // rotation: align the object's contact normal with the supporter's
      NormalCorrespondences corr;
      Eigen::Vector3d nc = cp.plane.normal;
      if (sp.plane.normal.dot(nc) < 0.0) nc = -nc;
      corr.parent_normals = {sp.plane.normal};
      corr.child_normals = {nc};
      const RigidTransform rot = refine_rotation(corr);

      // rotate about the contact polygon centroid to keep the footprint put
      Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
      for (const auto& v : cp.polygon.vertices) centroid += v;
      centroid /= double(cp.polygon.vertices.size());
      RigidTransform fix;
      fix.rotation = rot.rotation;
      fix.translation = centroid - rot.rotation * centroid;

      // then close the contact gap along the supporter normal
      double dist = 0.0;
      for (const auto& v : cp.polygon.vertices)
        dist += sp.plane.signed_distance(fix.apply(v));
      dist /= double(cp.polygon.vertices.size());
      fix.translation -= dist * sp.plane.normal;

      // the subtree of supported objects moves rigidly with this object
      std::deque<std::string> subtree = {label};
      while (!subtree.empty()) {
        const std::string cur = subtree.front();
        subtree.pop_front();
        out.object(cur).apply_world_correction(fix);
        for (const auto& t : supportees[cur]) subtree.push_back(t);
      }
    }
    for (const auto& t : supportees[label]) queue.push_back(t);
  }
  return out;
}

}  // namespace partscene
