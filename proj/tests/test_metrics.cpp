#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "partscene/errors.hpp"
#include "partscene/metrics.hpp"

using namespace partscene;

namespace {

PointCloud random_cloud(int n, std::mt19937_64& rng, double span = 1.0) {
  std::uniform_real_distribution<double> u(-span, span);
  PointCloud out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng), u(rng));
  return out;
}

TriangleMesh box_mesh(const Eigen::Vector3d& scale, const Eigen::Vector3d& center) {
  TriangleMesh m = scale_mesh(make_unit_box(), scale);
  for (auto& v : m.vertices) v += center;
  return m;
}

}  // namespace

TEST_CASE("chamfer identity and symmetry") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud a = random_cloud(200, rng);
    CHECK(chamfer_distance(a, a) == 0.0);
    const PointCloud b = random_cloud(150, rng);
    CHECK(chamfer_distance(a, b) == chamfer_distance(b, a));
  }
  CHECK_THROWS_AS(chamfer_distance({}, {{0, 0, 0}}), PreconditionError);
}

TEST_CASE("chamfer equals brute force") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud a = random_cloud(400, rng);
    const PointCloud b = random_cloud(380, rng);
    CHECK(std::abs(chamfer_distance(a, b) - oracles::brute_force_chamfer(a, b)) < 1e-12);
  }
}

TEST_CASE("chamfer on jointly normalized corner sets") {
  // two unit-cube corner sets offset by 0.1 along x, normalized together
  PointCloud a, b;
  for (int sx : {0, 1})
    for (int sy : {0, 1})
      for (int sz : {0, 1}) {
        a.emplace_back(sx, sy, sz);
        b.emplace_back(sx + 0.1, sy, sz);
      }
  normalize_to_unit_box(a, b);
  const double got = chamfer_distance(a, b);
  CHECK(got == doctest::Approx(oracles::brute_force_chamfer(a, b)).epsilon(1e-12));
  // joint span is 1.1 x 1 x 1; the offset shrinks to 0.1/1.1 in x
  CHECK(got == doctest::Approx(2.0 * 0.1 / 1.1).epsilon(1e-9));
}

TEST_CASE("voxel iou identical and disjoint") {
  const TriangleMesh cube = box_mesh({1, 1, 1}, {0, 0, 0});
  CHECK(voxel_iou(cube, cube) == doctest::Approx(1.0));

  const TriangleMesh far = box_mesh({0.2, 0.2, 0.2}, {0.0, 0.0, 0.4});
  // inside the frame of `cube` but disjoint from the small gt box
  const TriangleMesh small = box_mesh({0.2, 0.2, 0.2}, {0.0, 0.0, -0.2});
  const OrientedBox frame = voxel_frame(cube);
  const auto occ_a = voxelize(far, frame, 32);
  const auto occ_b = voxelize(small, frame, 32);
  size_t inter = 0;
  for (size_t i = 0; i < occ_a.size(); ++i) inter += occ_a[i] && occ_b[i];
  CHECK(inter == 0);
}

TEST_CASE("voxel iou half-shifted cube") {
  const TriangleMesh gt = box_mesh({1, 1, 1}, {0, 0, 0});
  const TriangleMesh shifted = box_mesh({1, 1, 1}, {0.5, 0, 0});
  // analytic: overlap 0.5, union 1.5 -> 1/3, quantization tolerance at 32^3
  CHECK(voxel_iou(gt, shifted) == doctest::Approx(1.0 / 3.0).epsilon(0.12));
  CHECK(std::abs(voxel_iou(gt, shifted) - 1.0 / 3.0) < 0.04);
}

TEST_CASE("voxel iou bounds and symmetry in a shared frame") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> off(-0.3, 0.3);
  for (int trial = 0; trial < 5; ++trial) {
    const TriangleMesh a = box_mesh({1, 0.8, 0.6}, {off(rng), off(rng), off(rng)});
    const TriangleMesh b = box_mesh({0.9, 0.7, 0.8}, {off(rng), off(rng), off(rng)});
    const OrientedBox frame = voxel_frame(merge_meshes({a, b}));
    const auto occ_a = voxelize(a, frame, 32);
    const auto occ_b = voxelize(b, frame, 32);
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < occ_a.size(); ++i) {
      inter += occ_a[i] && occ_b[i];
      uni += occ_a[i] || occ_b[i];
    }
    const double iou = double(inter) / double(uni);
    CHECK(iou >= 0.0);
    CHECK(iou <= 1.0);
  }
}

TEST_CASE("voxel iou resolution convergence") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> off(0.05, 0.45);
  double err16 = 0.0, err64 = 0.0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const double dx = off(rng);
    const TriangleMesh gt = box_mesh({1, 1, 1}, {0, 0, 0});
    const TriangleMesh moved = box_mesh({1, 1, 1}, {dx, 0, 0});
    const double overlap = 1.0 - dx;
    const double analytic = overlap / (2.0 - overlap);
    err16 += std::abs(voxel_iou(gt, moved, 16) - analytic);
    err64 += std::abs(voxel_iou(gt, moved, 64) - analytic);
  }
  CHECK(err64 / trials <= err16 / trials);
}

TEST_CASE("voxelize rejects open meshes") {
  TriangleMesh open = box_mesh({1, 1, 1}, {0, 0, 0});
  open.triangles.pop_back();
  const OrientedBox frame = voxel_frame(box_mesh({1, 1, 1}, {0, 0, 0}));
  CHECK_THROWS_AS(voxelize(open, frame, 16), VoxelizationIntegrityError);
}

TEST_CASE("average precision hand cases") {
  // perfect prediction
  CHECK(average_precision({{"a", "b", 0.9}, {"b", "c", 0.8}},
                          {{"a", "b"}, {"b", "c"}}) == doctest::Approx(1.0));

  // no predictions on an annotated object
  CHECK(average_precision({}, {{"a", "b"}}) == 0.0);

  // 1 correct above 1 spurious, 2 annotated: precision 1.0 at recall 0.5,
  // recall never reaches 1 -> AP = 0.5
  CHECK(average_precision({{"a", "b", 0.9}, {"c", "d", 0.5}},
                          {{"a", "b"}, {"b", "c"}}) == doctest::Approx(0.5));

  // order within the file does not matter, only scores
  CHECK(average_precision({{"c", "d", 0.5}, {"a", "b", 0.9}},
                          {{"b", "a"}}) == doctest::Approx(1.0));
}

TEST_CASE("average precision range property") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 6);
  const std::vector<std::string> names = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredEdge> pred;
    EdgeSet ann;
    for (int i = 0; i < count(rng); ++i) {
      const std::string x = names[rng() % names.size()];
      const std::string y = names[rng() % names.size()];
      if (x == y) continue;
      pred.push_back({x, y, score(rng)});
    }
    for (int i = 0; i < count(rng); ++i) {
      const std::string x = names[rng() % names.size()];
      const std::string y = names[rng() % names.size()];
      if (x == y) continue;
      ann.push_back({x, y});
    }
    const double ap = average_precision(pred, ann);
    CHECK(ap >= 0.0);
    CHECK(ap <= 1.0);
  }
}

TEST_CASE("structure_map groups by category") {
  std::vector<ObjectPrediction> pred = {
      {"table_0", "table", {{"top", "leg_0", 1.0}, {"top", "leg_1", 1.0}}},
      {"table_1", "table", {{"top", "leg_0", 1.0}}},
      {"chair_0", "chair", {{"seat", "back", 0.9}}},
  };
  std::vector<ObjectAnnotation> ann = {
      {"table_0", {{"top", "leg_0"}, {"top", "leg_1"}}, {"top", "leg_0", "leg_1"}},
      {"table_1", {{"top", "leg_0"}, {"top", "leg_1"}}, {"top", "leg_0", "leg_1"}},
      {"chair_0", {{"seat", "back"}}, {"seat", "back"}},
  };
  const auto result = structure_map(pred, ann);
  CHECK(result.at("table") == doctest::Approx(0.75));  // (1.0 + 0.5) / 2
  CHECK(result.at("chair") == doctest::Approx(1.0));

  std::vector<ObjectAnnotation> bad = {{"sofa_0", {{"a", "b"}}, {"a", "b"}}};
  CHECK_THROWS_AS(structure_map(pred, bad), Error);

  std::vector<ObjectAnnotation> bad_label = {
      {"table_0", {{"top", "wing"}}, {"top", "leg_0", "leg_1"}}};
  CHECK_THROWS_AS(structure_map(pred, bad_label), Error);
}

TEST_CASE("report serialization") {
  EvaluationReport report;
  report.per_object = {{"table_0", 0.01, 0.95}};
  report.per_category_map = {{"table", 1.0}};
  report.mean_chamfer = 0.01;
  report.mean_iou = 0.95;
  report.mean_map = 1.0;
  const std::string json = report.to_json_text();
  CHECK(json.find("\"mean_iou\": 0.95") != std::string::npos);
  const std::string table = report.to_table_text();
  CHECK(table.find("table_0") != std::string::npos);
  CHECK(table.find("mAP") != std::string::npos);
}
