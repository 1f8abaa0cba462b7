#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "partscene/arborescence.hpp"
#include "partscene/errors.hpp"
#include "partscene/parse_tree.hpp"

using namespace partscene;

namespace {

PartEntity unit_cube_at(const std::string& label, const Eigen::Vector3d& center,
                        const std::string& cls = "part") {
  return fixtures::make_box_part(label, cls, Eigen::Vector3d::Ones(), center);
}

ContactDigraph make_digraph(int n, const std::vector<std::tuple<int, int, double>>& edges) {
  ContactDigraph g;
  for (int i = 0; i < n; ++i) g.labels.push_back("n" + std::to_string(i));
  for (const auto& [from, to, w] : edges) g.edges.push_back({from, to, w, ContactEvidence{}});
  return g;
}

double arborescence_weight(const ContactDigraph& g, const std::vector<int>& chosen) {
  double acc = 0.0;
  for (int e : chosen) acc += g.edges[e].weight;
  return acc;
}

}  // namespace

TEST_CASE("check_contact perfect stack") {
  const PartEntity lower = unit_cube_at("a", {0, 0, 0.5});
  const PartEntity upper = unit_cube_at("b", {0, 0, 1.5});
  ContactThresholds th;
  const auto ev = check_contact(lower, upper, th);
  REQUIRE(ev.has_value());
  CHECK(ev->align_score == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ev->distance) < 1e-12);
  CHECK(ev->contact_ratio == doctest::Approx(1.0).epsilon(1e-9));

  // admissibility: stored evidence satisfies all three thresholds
  CHECK(ev->align_score >= th.theta_a);
  CHECK(std::abs(ev->distance) <= th.theta_d);
  CHECK(ev->contact_ratio >= th.theta_c);
}

TEST_CASE("check_contact separation beyond threshold") {
  ContactThresholds th;
  const PartEntity lower = unit_cube_at("a", {0, 0, 0.5});
  const PartEntity upper = unit_cube_at("b", {0, 0, 1.5 + 2.0 * th.theta_d});
  CHECK(!check_contact(lower, upper, th).has_value());
}

TEST_CASE("check_contact half overhang") {
  ContactThresholds th;
  const PartEntity lower = unit_cube_at("a", {0, 0, 0.5});
  const PartEntity upper = unit_cube_at("b", {0.5, 0, 1.5});
  const auto ev = check_contact(lower, upper, th);
  REQUIRE(ev.has_value());
  CHECK(ev->contact_ratio == doctest::Approx(0.5).epsilon(1e-9));

  // cross-check with the polygon clipping oracle quantities
  const auto pp = lower.world_planes()[ev->parent_plane_index];
  const auto cp = upper.world_planes()[ev->child_plane_index];
  const auto q = contact_quantities(pp, cp);
  CHECK(q.align == doctest::Approx(ev->align_score));
  CHECK(q.distance == doctest::Approx(ev->distance));
  CHECK(q.contact_ratio == doctest::Approx(ev->contact_ratio));
}

TEST_CASE("align predicate is symmetric") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d na = oracles::random_unit_vector(rng);
    const Eigen::Vector3d nc = oracles::random_unit_vector(rng);
    CHECK(std::abs(na.dot(nc)) == std::abs(nc.dot(na)));
  }
}

TEST_CASE("plane-less parts yield no contact") {
  const PartEntity cube = unit_cube_at("a", {0, 0, 0.5});
  PartEntity sphere;
  sphere.instance_label = "s";
  sphere.semantic_class = "ball";
  sphere.model = FittedModel{PrimitiveKind::Sphere, {1, 1, 1}, {Eigen::Matrix3d::Identity(),
                                                                Eigen::Vector3d(0, 0, 1.5)}};
  sphere.planes = extract_planes(sphere);
  ContactThresholds th;
  CHECK(!check_contact(cube, sphere, th).has_value());
  CHECK(!check_contact(sphere, cube, th).has_value());
}

TEST_CASE("contact digraph on a synthetic table") {
  const auto parts = fixtures::make_table();

  // with a permissive ratio threshold both directions satisfy the predicate
  ContactThresholds permissive;
  permissive.theta_c = 0.001;
  const ContactDigraph both = build_contact_digraph(parts, permissive);
  CHECK(both.edges.size() == 8);

  // the default ratio keeps only top->leg (a leg covers a sliver of the top)
  ContactThresholds th;
  const ContactDigraph g = build_contact_digraph(parts, th);
  CHECK(g.edges.size() == 4);
  for (const auto& e : g.edges) {
    CHECK(g.labels[e.parent] == "top");
    CHECK(e.weight == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("digraph edge monotonicity in theta_c") {
  const auto parts = fixtures::make_table();
  ContactThresholds lo, hi;
  lo.theta_c = 0.001;
  hi.theta_c = 0.5;
  const auto g_lo = build_contact_digraph(parts, lo);
  const auto g_hi = build_contact_digraph(parts, hi);
  CHECK(g_hi.edges.size() <= g_lo.edges.size());
  // every surviving edge also exists at the lower threshold
  for (const auto& eh : g_hi.edges) {
    bool found = false;
    for (const auto& el : g_lo.edges)
      if (el.parent == eh.parent && el.child == eh.child) found = true;
    CHECK(found);
  }
}

TEST_CASE("digraph trivial cases") {
  const PartEntity lone = unit_cube_at("only", {0, 0, 0.5});
  ContactThresholds th;
  const ContactDigraph g = build_contact_digraph({lone}, th);
  CHECK(g.labels.size() == 1);
  CHECK(g.edges.empty());

  const PartEntity far = unit_cube_at("far", {10, 0, 0.5});
  const ContactDigraph g2 = build_contact_digraph({lone, far}, th);
  CHECK(g2.edges.empty());
}

TEST_CASE("select_root rules") {
  const auto microwave = fixtures::make_microwave();
  ContactThresholds th;
  CHECK(select_root(microwave, build_contact_digraph(microwave, th)) == "base");

  const auto table = fixtures::make_table();
  CHECK(select_root(table, build_contact_digraph(table, th)) == "top");

  // volume rule for unlabeled parts
  const PartEntity big = fixtures::make_box_part("big", "blob", {1.0, 0.6, 0.5}, {0, 0, 0});
  const PartEntity small = fixtures::make_box_part("small", "blob", {0.5, 0.5, 0.4}, {3, 0, 0});
  ContactDigraph g;
  g.labels = {"big", "small"};
  CHECK(select_root({big, small}, g) == "big");
}

TEST_CASE("max_arborescence star graph") {
  const ContactDigraph g =
      make_digraph(4, {{0, 1, 0.9}, {0, 2, 0.9}, {0, 3, 0.9}});
  const auto chosen = max_arborescence(g, 0);
  REQUIRE(chosen.size() == 3);
  CHECK(arborescence_weight(g, chosen) == doctest::Approx(2.7));
}

TEST_CASE("max_arborescence breaks two-cycles correctly") {
  // 2-cycle between nodes 1 and 2; brute force gives the optimum
  const ContactDigraph g = make_digraph(
      3, {{0, 1, 0.5}, {0, 2, 0.1}, {1, 2, 0.9}, {2, 1, 0.8}});
  const auto chosen = max_arborescence(g, 0);
  CHECK(arborescence_weight(g, chosen) ==
        doctest::Approx(oracles::brute_force_arborescence(
            3, 0, {{0, 1, 0.5}, {0, 2, 0.1}, {1, 2, 0.9}, {2, 1, 0.8}})));
}

TEST_CASE("max_arborescence prefers the strong contact") {
  // leg connects to both the top (0.9) and an adjacent leg (0.2)
  const ContactDigraph g = make_digraph(3, {{0, 1, 0.9}, {0, 2, 0.9}, {1, 2, 0.2}, {2, 1, 0.2}});
  const auto chosen = max_arborescence(g, 0);
  std::set<std::pair<int, int>> edges;
  for (int e : chosen) edges.insert({g.edges[e].parent, g.edges[e].child});
  CHECK(edges.count({0, 1}) == 1);
  CHECK(edges.count({0, 2}) == 1);
}

TEST_CASE("max_arborescence equals brute force on random digraphs") {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  std::uniform_int_distribution<int> nodes(2, 6);
  std::uniform_real_distribution<double> density(0.25, 0.9);
  int solvable = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = nodes(rng);
    const double p = density(rng);
    std::vector<std::tuple<int, int, double>> edges;
    std::vector<oracles::OracleEdge> oracle_edges;
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b || coin(rng) > p) continue;
        const double w = weight(rng);
        edges.push_back({a, b, w});
        oracle_edges.push_back({a, b, w});
      }
    const ContactDigraph g = make_digraph(n, edges);
    const double expect = oracles::brute_force_arborescence(n, 0, oracle_edges);
    if (std::isinf(expect)) {
      CHECK_THROWS_AS(max_arborescence(g, 0), DisconnectedStructureError);
      continue;
    }
    ++solvable;
    const auto chosen = max_arborescence(g, 0);
    CHECK(chosen.size() == size_t(n - 1));
    CHECK(arborescence_weight(g, chosen) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(solvable > 100);  // the generator must actually exercise the solver
}

TEST_CASE("max_arborescence unreachable nodes named in the error") {
  const ContactDigraph g = make_digraph(3, {{0, 1, 0.5}});
  try {
    max_arborescence(g, 0);
    FAIL("expected DisconnectedStructureError");
  } catch (const DisconnectedStructureError& e) {
    CHECK(std::string(e.what()).find("n2") != std::string::npos);
  }
}

TEST_CASE("assign_joint: microwave door is a rim hinge") {
  const auto parts = fixtures::make_microwave();
  ContactThresholds th;
  const auto ev = check_contact(parts[0], parts[1], th);
  REQUIRE(ev.has_value());
  const Joint j = assign_joint(parts[0], parts[1], *ev, JointRuleTable::builtin_defaults());
  CHECK(j.type == JointType::Revolute);
  REQUIRE(j.axis.has_value());
  // door frame is axis-aligned here, so the hinge must be the vertical edge
  CHECK(std::abs(j.axis->z()) == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(j.limits.has_value());
  CHECK(j.limits->first == 0.0);
  CHECK(j.limits->second == doctest::Approx(M_PI / 2.0));
  // revolute axis parallel to the contact plane
  const auto pp = parts[0].world_planes()[ev->parent_plane_index];
  const Eigen::Vector3d axis_world = parts[1].pose().rotation * (*j.axis);
  CHECK(std::abs(pp.plane.normal.dot(axis_world)) < 1e-6);
}

TEST_CASE("assign_joint: table legs are fixed") {
  const auto parts = fixtures::make_table();
  ContactThresholds th;
  const auto ev = check_contact(parts[0], parts[1], th);
  REQUIRE(ev.has_value());
  const Joint j = assign_joint(parts[0], parts[1], *ev, JointRuleTable::builtin_defaults());
  CHECK(j.type == JointType::Fixed);
  CHECK(!j.axis.has_value());
  CHECK(!j.limits.has_value());
  CHECK(!j.defaulted);

  // T_{p,c} reproduces the child pose
  const RigidTransform recon = compose(parts[0].pose(), j.parent_to_child);
  CHECK((recon.translation - parts[1].pose().translation).norm() < 1e-12);
}

TEST_CASE("assign_joint: drawer slides along the outward normal") {
  const auto parts = fixtures::make_cabinet();
  ContactThresholds th;
  const auto ev = check_contact(parts[0], parts[1], th);
  REQUIRE(ev.has_value());
  const Joint j = assign_joint(parts[0], parts[1], *ev, JointRuleTable::builtin_defaults());
  CHECK(j.type == JointType::Prismatic);
  REQUIRE(j.axis.has_value());
  CHECK((*j.axis - Eigen::Vector3d::UnitY()).norm() < 1e-9);
  REQUIRE(j.limits.has_value());
  CHECK(j.limits->first == 0.0);
  CHECK(j.limits->second == doctest::Approx(0.4));  // drawer depth along the slide

  // at limit 0 the drawer back stays flush with the base front
  const Eigen::Vector3d drawer_back =
      parts[1].pose().translation - Eigen::Vector3d(0, 0.2, 0);
  CHECK(std::abs(drawer_back.y() - 0.25) < 1e-12);
}

TEST_CASE("assign_joint: unknown pair defaults to fixed") {
  const PartEntity a = unit_cube_at("a", {0, 0, 0.5}, "alien_widget");
  const PartEntity b = unit_cube_at("b", {0, 0, 1.5}, "alien_gadget");
  ContactThresholds th;
  const auto ev = check_contact(a, b, th);
  REQUIRE(ev.has_value());
  const Joint j = assign_joint(a, b, *ev, JointRuleTable::builtin_defaults());
  CHECK(j.type == JointType::Fixed);
  CHECK(j.defaulted);
}

TEST_CASE("joint rule table json round trip") {
  const JointRuleTable defaults = JointRuleTable::builtin_defaults();
  const std::string text = defaults.to_json_text();
  const JointRuleTable loaded = JointRuleTable::from_json_text(text);
  CHECK(loaded.rules().size() == defaults.rules().size());
  const auto rule = loaded.find("microwave_base", "microwave_door");
  REQUIRE(rule.has_value());
  CHECK(rule->type == JointType::Revolute);
  CHECK(rule->upper == doctest::Approx(M_PI / 2.0));

  CHECK_THROWS_AS(JointRuleTable::from_json_text("{"), ParseError);
  CHECK_THROWS_AS(JointRuleTable::from_json_text(R"({"rules":{"a/b":{"type":"bendy"}}})"),
                  ParseError);
}

TEST_CASE("infer_parse_tree on the table") {
  const auto parts = fixtures::make_table();
  ContactThresholds th;
  const PartParseTree tree = infer_parse_tree(parts, th);
  CHECK(tree.root == "top");
  CHECK(tree.nodes.size() == 5);
  CHECK(tree.edges.size() == 4);
  CHECK(tree.is_well_formed());
  for (const auto& e : tree.edges) {
    CHECK(e.parent == "top");
    CHECK(e.joint.type == JointType::Fixed);
  }
}

TEST_CASE("infer_parse_tree on the microwave") {
  const auto parts = fixtures::make_microwave();
  ContactThresholds th;
  const PartParseTree tree = infer_parse_tree(parts, th);
  CHECK(tree.root == "base");
  REQUIRE(tree.edges.size() == 1);
  CHECK(tree.edges[0].parent == "base");
  CHECK(tree.edges[0].child == "door");
  CHECK(tree.edges[0].joint.type == JointType::Revolute);
}

TEST_CASE("infer_parse_tree single part") {
  const PartEntity lone = unit_cube_at("only", {0, 0, 0.5});
  ContactThresholds th;
  const PartParseTree tree = infer_parse_tree({lone}, th);
  CHECK(tree.root == "only");
  CHECK(tree.edges.empty());
  CHECK(tree.is_well_formed());
}

TEST_CASE("infer_parse_tree attaches plane-less parts heuristically") {
  auto parts = fixtures::make_table();
  PartEntity ball;
  ball.instance_label = "ball";
  ball.semantic_class = "decor";
  ball.model = FittedModel{PrimitiveKind::Sphere, {0.1, 0.1, 0.1},
                           {Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, 0.8)}};
  ball.planes = extract_planes(ball);
  parts.push_back(ball);

  ContactThresholds th;
  const PartParseTree tree = infer_parse_tree(parts, th);
  CHECK(tree.is_well_formed());
  bool found = false;
  for (const auto& e : tree.edges) {
    if (e.child != "ball") continue;
    found = true;
    CHECK(e.parent == "top");  // nearest by centroid
    CHECK(e.joint.type == JointType::Fixed);
    CHECK(e.joint.heuristic_attach);
  }
  CHECK(found);
}

TEST_CASE("infer_parse_tree propagates disconnection") {
  std::vector<PartEntity> parts = {unit_cube_at("a", {0, 0, 0.5}),
                                   unit_cube_at("b", {10, 0, 0.5})};
  ContactThresholds th;
  CHECK_THROWS_AS(infer_parse_tree(parts, th), DisconnectedStructureError);
}
