#pragma once

#include <map>
#include <string>
#include <vector>

#include "partscene/kdtree.hpp"
#include "partscene/mesh.hpp"

namespace partscene {

// Joint normalization: one affine map taking the union's axis-aligned
// bounding box onto the unit cube, applied to both sets. Keeps relative pose
// error visible in the metric.
void normalize_to_unit_box(PointCloud& a, PointCloud& b);

// Symmetric Chamfer distance: mean nearest-neighbor distance a->b plus
// b->a (euclidean, not squared). Callers normalize first (or use the helper).
double chamfer_distance(const PointCloud& a, const PointCloud& b);

// Solid occupancy on a resolution^3 grid over a shared frame (the
// ground-truth OBB expanded 5%): parity of ray crossings per voxel center.
// Throws VoxelizationIntegrityError for non-watertight meshes.
std::vector<bool> voxelize(const TriangleMesh& mesh, const OrientedBox& frame, int resolution);

double voxel_iou(const TriangleMesh& predicted, const TriangleMesh& ground_truth,
                 int resolution = 32);
// Multi-part variant: per-part occupancies are OR-ed before comparison, so
// face-to-face touching parts stay well defined.
double voxel_iou_parts(const std::vector<TriangleMesh>& predicted,
                       const std::vector<TriangleMesh>& ground_truth, int resolution = 32);

// 5%-expanded OBB of the ground-truth mesh: the shared voxelization frame.
OrientedBox voxel_frame(const TriangleMesh& ground_truth);

struct ScoredEdge {
  std::string a;
  std::string b;
  double score = 0.0;  // ranking signal (contact ratio)
};

using EdgeSet = std::vector<std::pair<std::string, std::string>>;

// Average precision of a scored undirected edge ranking against an
// annotated edge set (all-points interpolated PR curve).
double average_precision(std::vector<ScoredEdge> predicted, const EdgeSet& annotated);

struct ObjectPrediction {
  std::string label;
  std::string category;
  std::vector<ScoredEdge> edges;
};

struct ObjectAnnotation {
  std::string label;
  EdgeSet edges;
  std::vector<std::string> part_labels;  // for consistency checking
};

// Per-category mean AP over objects. Throws when an annotation references a
// part label the prediction does not know.
std::map<std::string, double> structure_map(const std::vector<ObjectPrediction>& predicted,
                                            const std::vector<ObjectAnnotation>& annotated);

struct ObjectMetrics {
  std::string label;
  double chamfer = 0.0;
  double iou = 0.0;
};

struct CategoryMap {
  std::string category;
  double map = 0.0;
};

struct EvaluationReport {
  std::vector<ObjectMetrics> per_object;
  std::vector<CategoryMap> per_category_map;
  double mean_chamfer = 0.0;
  double mean_iou = 0.0;
  double mean_map = 0.0;
  // the same metrics for the single-box object-level baseline
  double baseline_mean_chamfer = 0.0;
  double baseline_mean_iou = 0.0;

  std::string to_json_text() const;
  std::string to_table_text() const;
};

}  // namespace partscene
