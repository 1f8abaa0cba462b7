#include "partscene/parse_tree.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "partscene/errors.hpp"

namespace partscene {

const PartEntity& PartParseTree::node(const std::string& label) const {
  for (const auto& n : nodes)
    if (n.instance_label == label) return n;
  throw Error(ErrorKind::Internal, "parse tree has no node '" + label + "'");
}

PartEntity& PartParseTree::node(const std::string& label) {
  for (auto& n : nodes)
    if (n.instance_label == label) return n;
  throw Error(ErrorKind::Internal, "parse tree has no node '" + label + "'");
}

std::vector<const ParseTreeEdge*> PartParseTree::children_of(const std::string& label) const {
  std::vector<const ParseTreeEdge*> out;
  for (const auto& e : edges)
    if (e.parent == label) out.push_back(&e);
  return out;
}

bool PartParseTree::is_well_formed() const {
  if (nodes.empty()) return false;
  if (edges.size() != nodes.size() - 1) return false;
  std::map<std::string, int> indegree;
  for (const auto& n : nodes) indegree[n.instance_label] = 0;
  for (const auto& e : edges) {
    if (!indegree.count(e.parent) || !indegree.count(e.child)) return false;
    indegree[e.child] += 1;
  }
  if (indegree[root] != 0) return false;
  for (const auto& [label, deg] : indegree)
    if (label != root && deg != 1) return false;
  // reachability from root covers everything (no cycles possible then)
  std::set<std::string> seen = {root};
  std::deque<std::string> queue = {root};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    for (const auto& e : edges)
      if (e.parent == cur && !seen.count(e.child)) {
        seen.insert(e.child);
        queue.push_back(e.child);
      }
  }
  return seen.size() == nodes.size();
}

void PartParseTree::refresh_world_poses() {
  std::deque<std::string> queue = {root};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    const RigidTransform parent_pose = node(cur).pose();
    for (const auto& e : edges) {
      if (e.parent != cur) continue;
      PartEntity& child = node(e.child);
      if (child.model) child.model->pose = compose(parent_pose, e.joint.parent_to_child);
      queue.push_back(e.child);
    }
  }
}

std::string select_root(const std::vector<PartEntity>& parts, const ContactDigraph& digraph) {
  if (parts.empty()) throw PreconditionError("select_root: empty part list");
  (void)digraph;

  auto class_tokens = [](const std::string& cls) {
    std::vector<std::string> tokens;
    std::stringstream ss(cls);
    std::string tok;
    while (std::getline(ss, tok, '_'))
      if (!tok.empty()) tokens.push_back(tok);
    return tokens;
  };

  auto better_by_volume = [](const PartEntity* a, const PartEntity* b) {
    if (a->model_volume() != b->model_volume()) return a->model_volume() > b->model_volume();
    return a->instance_label < b->instance_label;
  };

  static const std::vector<std::string> base_classes = {"base", "top", "seat", "frame"};
  for (const auto& base : base_classes) {
    const PartEntity* best = nullptr;
    for (const auto& p : parts) {
      const auto tokens = class_tokens(p.semantic_class);
      if (std::find(tokens.begin(), tokens.end(), base) == tokens.end()) continue;
      if (!best || better_by_volume(&p, best)) best = &p;
    }
    if (best) return best->instance_label;
  }

  const PartEntity* best = &parts.front();
  for (const auto& p : parts)
    if (better_by_volume(&p, best)) best = &p;
  return best->instance_label;
}

std::vector<PartEntity> drop_unreachable_parts(std::vector<PartEntity>& parts,
                                               const ContactThresholds& th) {
  std::vector<PartEntity> planed;
  for (const auto& p : parts)
    if (!p.planes.empty()) planed.push_back(p);
  if (planed.empty()) return {};

  const ContactDigraph digraph = build_contact_digraph(planed, th);
  const std::string root = select_root(planed, digraph);
  std::set<std::string> reachable = {root};
  std::deque<std::string> queue = {root};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    for (const auto& e : digraph.edges) {
      const std::string& from = digraph.labels[e.parent];
      const std::string& to = digraph.labels[e.child];
      if (from == cur && !reachable.count(to)) {
        reachable.insert(to);
        queue.push_back(to);
      }
    }
  }

  std::vector<PartEntity> dropped;
  std::vector<PartEntity> kept;
  for (auto& p : parts) {
    if (!p.planes.empty() && !reachable.count(p.instance_label))
      dropped.push_back(std::move(p));
    else
      kept.push_back(std::move(p));
  }
  parts.swap(kept);
  return dropped;
}

PartParseTree infer_parse_tree(const std::vector<PartEntity>& parts, const ContactThresholds& th,
                               const JointRuleTable& rules) {
  if (parts.empty()) throw PreconditionError("infer_parse_tree: empty part list");

  PartParseTree tree;
  tree.nodes = parts;

  // plane-less parts (e.g. spheres) cannot satisfy the contact constraints;
  // they attach to the nearest planed part afterwards
  std::vector<PartEntity> planed;
  std::vector<const PartEntity*> planeless;
  for (const auto& p : parts) {
    if (p.planes.empty())
      planeless.push_back(&p);
    else
      planed.push_back(p);
  }

  if (planed.empty()) {
    // degenerate object: chain everything off the volume-rule root
    ContactDigraph empty_digraph;
    for (const auto& p : parts) empty_digraph.labels.push_back(p.instance_label);
    tree.root = select_root(parts, empty_digraph);
    for (const auto& p : parts) {
      if (p.instance_label == tree.root) continue;
      Joint joint;
      joint.heuristic_attach = true;
      joint.parent_to_child = compose(invert(tree.node(tree.root).pose()), p.pose());
      tree.edges.push_back({tree.root, p.instance_label, joint, ContactEvidence{}});
    }
    return tree;
  }

  const ContactDigraph digraph = build_contact_digraph(planed, th);
  tree.root = select_root(planed, digraph);
  int root_index = 0;
  for (size_t i = 0; i < digraph.labels.size(); ++i)
    if (digraph.labels[i] == tree.root) root_index = int(i);

  const std::vector<int> chosen = max_arborescence(digraph, root_index);
  for (int e : chosen) {
    const ContactEdge& edge = digraph.edges[e];
    const PartEntity& parent = planed[edge.parent];
    const PartEntity& child = planed[edge.child];
    tree.edges.push_back({parent.instance_label, child.instance_label,
                          assign_joint(parent, child, edge.evidence, rules), edge.evidence});
  }

  // heuristic attachment: nearest part by centroid distance
  for (const PartEntity* orphan : planeless) {
    const PartEntity* nearest = nullptr;
    double best = std::numeric_limits<double>::max();
    for (const auto& p : planed) {
      const double d = (p.world_centroid() - orphan->world_centroid()).norm();
      if (d < best) {
        best = d;
        nearest = &p;
      }
    }
    Joint joint;
    joint.heuristic_attach = true;
    joint.parent_to_child = compose(invert(nearest->pose()), orphan->pose());
    tree.edges.push_back(
        {nearest->instance_label, orphan->instance_label, joint, ContactEvidence{}});
  }
  return tree;
}

}  // namespace partscene
