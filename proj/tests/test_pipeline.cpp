#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "partscene/errors.hpp"
#include "partscene/pipeline.hpp"
#include "partscene/ply.hpp"
#include "partscene/urdf.hpp"

using namespace partscene;

namespace {

std::set<std::pair<std::string, std::string>> undirected_edges(const PartParseTree& tree) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& e : tree.edges)
    out.insert(e.parent < e.child ? std::make_pair(e.parent, e.child)
                                  : std::make_pair(e.child, e.parent));
  return out;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  PipelineConfig c;
  c.thresholds.theta_c = 0.2;
  c.seed = 99;
  c.contact_snap = true;
  c.joint_rules_path = "rules.json";
  const PipelineConfig back = PipelineConfig::from_json_text(c.to_json_text());
  CHECK(back.to_json_text() == c.to_json_text());
  CHECK(back.hash() == c.hash());
  CHECK(back.seed == 99);
  CHECK(back.contact_snap);

  PipelineConfig bad;
  bad.thresholds.theta_a = 2.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(PipelineConfig::from_json_text("{nope"), ConfigError);
}

TEST_CASE("ply round trip") {
  PointCloud cloud = {{0.5, -1.25, 3.0}, {0.001, 0.002, 0.003}};
  const PointCloud back = read_ply(write_ply(cloud));
  REQUIRE(back.size() == 2);
  for (size_t i = 0; i < cloud.size(); ++i) CHECK((back[i] - cloud[i]).norm() < 1e-6);
  CHECK_THROWS_AS(read_ply("obj nonsense"), ParseError);
  CHECK_THROWS_AS(read_ply("ply\nformat binary_little_endian 1.0\nend_header\n"), ParseError);
}

TEST_CASE("synthetic generator determinism and structure") {
  SyntheticSceneSpec spec;
  spec.seed = 5;
  spec.templates = {"table", "cabinet"};
  const SyntheticScene a = generate_synthetic_scene(spec);
  const SyntheticScene b = generate_synthetic_scene(spec);

  CHECK(serialize_graph(a.truth) == serialize_graph(b.truth));
  CHECK(serialize_graph(a.input, nullptr, true) == serialize_graph(b.input, nullptr, true));

  REQUIRE(a.truth.objects.size() == 2);
  const ObjectNode& cabinet = a.truth.object("cabinet_0");
  REQUIRE(cabinet.part_tree.edges.size() == 1);
  CHECK(cabinet.part_tree.edges[0].joint.type == JointType::Prismatic);
  REQUIRE(cabinet.part_tree.edges[0].joint.axis.has_value());
  CHECK((*cabinet.part_tree.edges[0].joint.axis - Eigen::Vector3d::UnitY()).norm() < 1e-12);

  // noiseless clouds lie on the truth primitive surfaces
  const ObjectNode& table_in = a.input.object("table_0");
  const ObjectNode& table_truth = a.truth.object("table_0");
  for (const auto& part : table_in.part_tree.nodes) {
    const auto& model = *table_truth.part_tree.node(part.instance_label).model;
    const TriangleMesh world_mesh = transform_mesh(model.pose, model.local_mesh());
    for (size_t i = 0; i < part.cloud.size(); i += 50)
      CHECK(mesh_surface_distance(world_mesh, part.cloud[i]) < 1e-9);
  }

  SyntheticSceneSpec bad;
  bad.templates = {"sofa"};
  CHECK_THROWS_AS(generate_synthetic_scene(bad), ConfigError);
}

TEST_CASE("degradation knobs change the clouds") {
  SyntheticSceneSpec clean;
  clean.seed = 6;
  clean.templates = {"microwave"};
  SyntheticSceneSpec noisy = clean;
  noisy.noise_sigma = 0.005;
  noisy.dropout = 0.3;
  SyntheticSceneSpec partial = clean;
  partial.partial_view = true;

  const auto base = generate_synthetic_scene(clean);
  const auto degraded = generate_synthetic_scene(noisy);
  const auto seen = generate_synthetic_scene(partial);

  const size_t base_n = base.input.objects[0].part_tree.nodes[0].cloud.size();
  const size_t deg_n = degraded.input.objects[0].part_tree.nodes[0].cloud.size();
  const size_t part_n = seen.input.objects[0].part_tree.nodes[0].cloud.size();
  CHECK(deg_n < base_n);   // dropout removes points
  CHECK(part_n < base_n);  // back faces removed
}

TEST_CASE("pipeline recovers the table structure from noiseless clouds") {
  SyntheticSceneSpec spec;
  spec.seed = 11;
  spec.templates = {"table"};
  const SyntheticScene scene = generate_synthetic_scene(spec);

  PipelineConfig config;
  config.seed = 11;
  const PipelineResult result = run_pipeline(scene.input, config);
  CHECK(result.failed_parts.empty());
  REQUIRE(result.scene.objects.size() == 1);

  const ObjectNode& obj = result.scene.objects[0];
  CHECK(obj.part_tree.root == "top");
  CHECK(obj.part_tree.is_well_formed());
  CHECK(undirected_edges(obj.part_tree) ==
        undirected_edges(scene.truth.objects[0].part_tree));
  for (const auto& e : obj.part_tree.edges) CHECK(e.joint.type == JointType::Fixed);

  // every part fitted as a box with roughly the right size
  for (const auto& part : obj.part_tree.nodes) {
    REQUIRE(part.model.has_value());
    CHECK(part.model->kind == PrimitiveKind::Box);
    const auto& truth_part = scene.truth.objects[0].part_tree.node(part.instance_label);
    Eigen::Vector3d got = part.model->scale, want = truth_part.model->scale;
    std::sort(got.data(), got.data() + 3);
    std::sort(want.data(), want.data() + 3);
    CHECK((got - want).norm() < 0.03);
  }

  // supporting: floor -> table
  REQUIRE(result.scene.supporting.size() == 1);
  CHECK(result.scene.supporting[0] ==
        std::pair<std::string, std::string>("floor", "table_0"));

  // 5 part links + floor, 4 fixed part joints + 1 support joint
  const UrdfReport urdf = validate_urdf(export_urdf(result.scene));
  CHECK(urdf.links == 6);
  CHECK(urdf.joints == 5);
}

TEST_CASE("pipeline recovers the microwave revolute joint") {
  SyntheticSceneSpec spec;
  spec.seed = 21;
  spec.templates = {"microwave"};
  const SyntheticScene scene = generate_synthetic_scene(spec);

  PipelineConfig config;
  config.seed = 21;
  const PipelineResult result = run_pipeline(scene.input, config);
  const ObjectNode& obj = result.scene.objects[0];
  REQUIRE(obj.part_tree.edges.size() == 1);
  CHECK(obj.part_tree.edges[0].parent == "base");
  CHECK(obj.part_tree.edges[0].child == "door");
  CHECK(obj.part_tree.edges[0].joint.type == JointType::Revolute);

  const std::string urdf = export_urdf(result.scene);
  CHECK(urdf.find("type=\"revolute\"") != std::string::npos);
  validate_urdf(urdf);
}

TEST_CASE("pipeline outputs are deterministic") {
  SyntheticSceneSpec spec;
  spec.seed = 31;
  spec.templates = {"chair"};
  spec.noise_sigma = 0.003;
  spec.dropout = 0.1;
  const SyntheticScene scene = generate_synthetic_scene(spec);

  PipelineConfig config;
  config.seed = 31;
  const PipelineResult a = run_pipeline(scene.input, config);
  const PipelineResult b = run_pipeline(scene.input, config);
  CHECK(export_urdf(a.scene) == export_urdf(b.scene));
  CHECK(serialize_graph(a.scene) == serialize_graph(b.scene));
}

TEST_CASE("pipeline input validation") {
  PipelineConfig config;
  ContactGraph empty;
  CHECK_THROWS_AS(run_pipeline(empty, config), ParseError);

  ContactGraph no_cloud;
  ObjectNode obj;
  obj.object_label = "o";
  PartEntity part;
  part.instance_label = "p";
  obj.part_tree.nodes.push_back(part);
  obj.part_tree.root = "p";
  no_cloud.objects.push_back(obj);
  CHECK_THROWS_AS(run_pipeline(no_cloud, config), ParseError);
}

TEST_CASE("pipeline tolerates a bad part but fails past half") {
  SyntheticSceneSpec spec;
  spec.seed = 41;
  spec.templates = {"table"};
  SyntheticScene scene = generate_synthetic_scene(spec);

  // corrupt one leg: too few points to fit
  for (auto& part : scene.input.objects[0].part_tree.nodes)
    if (part.instance_label == "leg_0") part.cloud.resize(3);

  PipelineConfig config;
  config.seed = 41;
  const PipelineResult result = run_pipeline(scene.input, config);
  REQUIRE(result.failed_parts.size() == 1);
  CHECK(result.failed_parts[0].find("leg_0") != std::string::npos);
  // remaining parts still form a tree
  CHECK(result.scene.objects[0].part_tree.nodes.size() == 4);
  CHECK(result.scene.objects[0].part_tree.is_well_formed());

  // corrupt more than half of the parts: the run aborts
  for (auto& part : scene.input.objects[0].part_tree.nodes)
    if (part.instance_label != "top") part.cloud.resize(3);
  CHECK_THROWS_AS(run_pipeline(scene.input, config), Error);
}

TEST_CASE("evaluate: truth against itself is perfect") {
  SyntheticSceneSpec spec;
  spec.seed = 51;
  spec.templates = {"table", "microwave"};
  const SyntheticScene scene = generate_synthetic_scene(spec);
  const EvaluationReport report =
      evaluate(scene.truth, scene.truth, scene.annotated, &scene.input);
  CHECK(report.mean_chamfer == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(report.mean_iou == doctest::Approx(1.0));
  CHECK(report.mean_map == doctest::Approx(1.0));
  for (const auto& c : report.per_category_map) CHECK(c.map == doctest::Approx(1.0));
}

TEST_CASE("evaluate: part-level beats the single-box baseline on a table") {
  SyntheticSceneSpec spec;
  spec.seed = 61;
  spec.templates = {"table"};
  const SyntheticScene scene = generate_synthetic_scene(spec);

  PipelineConfig config;
  config.seed = 61;
  const PipelineResult result = run_pipeline(scene.input, config);
  const EvaluationReport report =
      evaluate(result.scene, scene.truth, scene.annotated, &scene.input);
  CHECK(report.mean_chamfer < report.baseline_mean_chamfer);
  CHECK(report.mean_iou > report.baseline_mean_iou);
  CHECK(report.mean_map == doctest::Approx(1.0));
  CHECK(report.mean_iou > 0.9);
  CHECK(report.mean_chamfer < 0.02);
}

TEST_CASE("iou degrades monotonically with noise") {
  double clean_acc = 0.0, noisy_acc = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    for (double sigma : {0.0, 0.01}) {
      SyntheticSceneSpec spec;
      spec.seed = 8800 + s;
      spec.templates = {"table", "microwave"};
      spec.noise_sigma = sigma;
      const SyntheticScene scene = generate_synthetic_scene(spec);
      PipelineConfig config;
      config.seed = spec.seed;
      double iou = 0.0;  // a failed run contributes zero quality
      try {
        const PipelineResult result = run_pipeline(scene.input, config);
        const EvaluationReport report =
            evaluate(result.scene, scene.truth, scene.annotated, &scene.input);
        iou = report.mean_iou;
      } catch (const Error&) {
      }
      (sigma == 0.0 ? clean_acc : noisy_acc) += iou;
    }
  }
  CHECK(clean_acc / seeds >= noisy_acc / seeds);
}

TEST_CASE("output bundle writes the requested formats") {
  SyntheticSceneSpec spec;
  spec.seed = 71;
  spec.templates = {"microwave"};
  const SyntheticScene scene = generate_synthetic_scene(spec);
  PipelineConfig config;
  config.seed = 71;
  const PipelineResult result = run_pipeline(scene.input, config);

  const std::string dir = (std::filesystem::temp_directory_path() / "partscene_test_out").string();
  std::filesystem::remove_all(dir);
  const auto written = write_output_bundle(result, config, dir, "all");
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "scene.urdf"));
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "scene.json"));
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "manifest.json"));
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "meshes" / "microwave_0_door.obj"));

  // emitted scene json loads back
  std::ifstream in(std::filesystem::path(dir) / "scene.json");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const LoadedScene loaded = load_graph(text);
  CHECK(loaded.graph.objects.size() == 1);
  std::filesystem::remove_all(dir);

  CHECK_THROWS_AS(write_output_bundle(result, config, dir, "gltf"), ConfigError);
}
