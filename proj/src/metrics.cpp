#include "partscene/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "partscene/errors.hpp"

namespace partscene {

void normalize_to_unit_box(PointCloud& a, PointCloud& b) {
  if (a.empty() || b.empty()) throw PreconditionError("normalize_to_unit_box: empty point set");
  Eigen::Vector3d lo = a.front(), hi = a.front();
  for (const auto& p : a) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  for (const auto& p : b) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector3d span = (hi - lo).cwiseMax(1e-12);
  auto map = [&](PointCloud& pts) {
    for (auto& p : pts) p = (p - lo).cwiseQuotient(span);
  };
  map(a);
  map(b);
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw PreconditionError("chamfer_distance: empty point set");
  const KdTree3 tree_a(a);
  const KdTree3 tree_b(b);
  double ab = 0.0, ba = 0.0;
  for (const auto& p : a) {
    double d;
    tree_b.nearest(p, &d);
    ab += d;
  }
  for (const auto& q : b) {
    double d;
    tree_a.nearest(q, &d);
    ba += d;
  }
  return ab / double(a.size()) + ba / double(b.size());
}

OrientedBox voxel_frame(const TriangleMesh& ground_truth) {
  OrientedBox box = fit_obb(ground_truth.vertices);
  box.half_extents *= 1.05;
  return box;
}

std::vector<bool> voxelize(const TriangleMesh& mesh, const OrientedBox& frame, int resolution) {
  if (resolution < 2) throw PreconditionError("voxelize: resolution must be >= 2");
  if (!mesh.is_watertight())
    throw VoxelizationIntegrityError("voxelize: mesh is not watertight");

  // triangles in the frame's local coordinates
  std::vector<Eigen::Vector3d> local(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    local[i] = frame.axes.transpose() * (mesh.vertices[i] - frame.center);

  // slightly irrational ray direction avoids edge/vertex grazing
  const Eigen::Vector3d dir =
      Eigen::Vector3d(1.0, 3.897531e-4, 7.182634e-4).normalized();

  const Eigen::Vector3d lo = -frame.half_extents;
  const Eigen::Vector3d step = 2.0 * frame.half_extents / double(resolution);

  std::vector<bool> occupancy(size_t(resolution) * resolution * resolution, false);
  for (int iy = 0; iy < resolution; ++iy) {
    for (int iz = 0; iz < resolution; ++iz) {
      // one ray per (y, z) column; mark voxels between odd/even crossings
      const Eigen::Vector3d origin(lo.x() - frame.half_extents.x(),
                                   lo.y() + (iy + 0.5) * step.y(),
                                   lo.z() + (iz + 0.5) * step.z());
      std::vector<double> crossings;
      for (const auto& tri : mesh.triangles) {
        // Moller-Trumbore
        const Eigen::Vector3d& a = local[tri[0]];
        const Eigen::Vector3d e1 = local[tri[1]] - a;
        const Eigen::Vector3d e2 = local[tri[2]] - a;
        const Eigen::Vector3d pvec = dir.cross(e2);
        const double det = e1.dot(pvec);
        if (std::abs(det) < 1e-14) continue;
        const double inv_det = 1.0 / det;
        const Eigen::Vector3d tvec = origin - a;
        const double u = tvec.dot(pvec) * inv_det;
        if (u < 0.0 || u > 1.0) continue;
        const Eigen::Vector3d qvec = tvec.cross(e1);
        const double v = dir.dot(qvec) * inv_det;
        if (v < 0.0 || u + v > 1.0) continue;
        crossings.push_back(e2.dot(qvec) * inv_det);
      }
      std::sort(crossings.begin(), crossings.end());
      // walk voxel centers along x through the sorted crossings
      size_t k = 0;
      for (int ix = 0; ix < resolution; ++ix) {
        const double t = (lo.x() + (ix + 0.5) * step.x() - origin.x()) / dir.x();
        while (k < crossings.size() && crossings[k] < t) ++k;
        if (k % 2 == 1)
          occupancy[(size_t(ix) * resolution + iy) * resolution + iz] = true;
      }
    }
  }
  return occupancy;
}

namespace {

double iou_of(const std::vector<bool>& a, const std::vector<bool>& b) {
  size_t inter = 0, uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

std::vector<bool> voxelize_union(const std::vector<TriangleMesh>& meshes,
                                 const OrientedBox& frame, int resolution) {
  std::vector<bool> acc(size_t(resolution) * resolution * resolution, false);
  for (const auto& mesh : meshes) {
    const std::vector<bool> occ = voxelize(mesh, frame, resolution);
    for (size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] || occ[i];
  }
  return acc;
}

}  // namespace

double voxel_iou(const TriangleMesh& predicted, const TriangleMesh& ground_truth,
                 int resolution) {
  // frame covers both meshes so displaced predictions are not cropped away
  const OrientedBox frame = voxel_frame(merge_meshes({ground_truth, predicted}));
  return iou_of(voxelize(predicted, frame, resolution),
                voxelize(ground_truth, frame, resolution));
}

double voxel_iou_parts(const std::vector<TriangleMesh>& predicted,
                       const std::vector<TriangleMesh>& ground_truth, int resolution) {
  if (ground_truth.empty()) throw PreconditionError("voxel_iou_parts: empty ground truth");
  std::vector<TriangleMesh> all = ground_truth;
  all.insert(all.end(), predicted.begin(), predicted.end());
  const OrientedBox frame = voxel_frame(merge_meshes(all));
  return iou_of(voxelize_union(predicted, frame, resolution),
                voxelize_union(ground_truth, frame, resolution));
}

namespace {

std::pair<std::string, std::string> undirected(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

double average_precision(std::vector<ScoredEdge> predicted, const EdgeSet& annotated) {
  std::set<std::pair<std::string, std::string>> truth;
  for (const auto& [a, b] : annotated) truth.insert(undirected(a, b));
  if (truth.empty()) return predicted.empty() ? 1.0 : 0.0;
  if (predicted.empty()) return 0.0;

  // collapse duplicate undirected predictions, keeping the best score
  std::map<std::pair<std::string, std::string>, double> best;
  for (const auto& e : predicted) {
    const auto key = undirected(e.a, e.b);
    auto it = best.find(key);
    if (it == best.end() || e.score > it->second) best[key] = e.score;
  }
  std::vector<std::pair<double, std::pair<std::string, std::string>>> ranked;
  for (const auto& [key, score] : best) ranked.push_back({score, key});
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;  // deterministic tie order
  });

  // precision/recall at every cut, all-points interpolation
  std::vector<double> precision, recall;
  int hits = 0;
  for (size_t k = 0; k < ranked.size(); ++k) {
    if (truth.count(ranked[k].second)) ++hits;
    precision.push_back(double(hits) / double(k + 1));
    recall.push_back(double(hits) / double(truth.size()));
  }
  for (int k = int(precision.size()) - 2; k >= 0; --k)
    precision[k] = std::max(precision[k], precision[k + 1]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

std::map<std::string, double> structure_map(const std::vector<ObjectPrediction>& predicted,
                                            const std::vector<ObjectAnnotation>& annotated) {
  std::map<std::string, const ObjectPrediction*> by_label;
  for (const auto& p : predicted) by_label[p.label] = &p;

  std::map<std::string, std::vector<double>> per_category;
  for (const auto& ann : annotated) {
    const auto it = by_label.find(ann.label);
    if (it == by_label.end())
      throw Error(ErrorKind::Validation,
                  "structure_map: annotation for unknown object '" + ann.label + "'");
    const ObjectPrediction& pred = *it->second;
    if (!ann.part_labels.empty()) {
      const std::set<std::string> known(ann.part_labels.begin(), ann.part_labels.end());
      for (const auto& [a, b] : ann.edges) {
        if (!known.count(a) || !known.count(b))
          throw Error(ErrorKind::Validation, "structure_map: annotated edge (" + a + ", " + b +
                                                 ") references an unknown part label");
      }
    }
    per_category[pred.category].push_back(average_precision(pred.edges, ann.edges));
  }

  std::map<std::string, double> out;
  for (const auto& [category, values] : per_category) {
    double acc = 0.0;
    for (double v : values) acc += v;
    out[category] = acc / double(values.size());
  }
  return out;
}

std::string EvaluationReport::to_json_text() const {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : per_object)
    objects.push_back({{"label", o.label}, {"chamfer", o.chamfer}, {"iou", o.iou}});
  doc["per_object"] = objects;
  nlohmann::json categories = nlohmann::json::array();
  for (const auto& c : per_category_map)
    categories.push_back({{"category", c.category}, {"map", c.map}});
  doc["per_category_map"] = categories;
  doc["aggregates"] = {{"mean_chamfer", mean_chamfer},
                       {"mean_iou", mean_iou},
                       {"mean_map", mean_map},
                       {"baseline_mean_chamfer", baseline_mean_chamfer},
                       {"baseline_mean_iou", baseline_mean_iou}};
  return doc.dump(2) + "\n";
}

std::string EvaluationReport::to_table_text() const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-24s %10s %10s\n", "object", "chamfer", "iou");
  out += buf;
  for (const auto& o : per_object) {
    std::snprintf(buf, sizeof(buf), "%-24s %10.4f %10.4f\n", o.label.c_str(), o.chamfer, o.iou);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-24s %10.4f %10.4f\n", "mean", mean_chamfer, mean_iou);
  out += buf;
  out += "\n";
  std::snprintf(buf, sizeof(buf), "%-24s %10s\n", "category", "mAP");
  out += buf;
  for (const auto& c : per_category_map) {
    std::snprintf(buf, sizeof(buf), "%-24s %10.4f\n", c.category.c_str(), c.map);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-24s %10.4f\n", "mean", mean_map);
  out += buf;
  out += "\n";
  std::snprintf(buf, sizeof(buf), "%-24s %10.4f %10.4f\n", "baseline(single-box)",
                baseline_mean_chamfer, baseline_mean_iou);
  out += buf;
  return out;
}

}  // namespace partscene
