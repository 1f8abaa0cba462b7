#include "partscene/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "partscene/errors.hpp"
#include "partscene/primitive_fit.hpp"
#include "partscene/refine.hpp"
#include "partscene/urdf.hpp"

namespace partscene {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

JointRuleTable load_rules(const PipelineConfig& config) {
  if (config.joint_rules_path.empty()) return JointRuleTable::builtin_defaults();
  std::ifstream in(config.joint_rules_path);
  if (!in) throw ConfigError("cannot open joint rule table '" + config.joint_rules_path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return JointRuleTable::from_json_text(text);
}

// Surface samples of every part of an object, in world coordinates,
// area-proportional across parts.
PointCloud object_surface_samples(const ObjectNode& obj, int total, uint64_t seed) {
  std::vector<double> areas;
  double total_area = 0.0;
  for (const auto& part : obj.part_tree.nodes) {
    const double a = part.model ? part.model->local_mesh().surface_area() : 0.0;
    areas.push_back(a);
    total_area += a;
  }
  PointCloud out;
  for (size_t i = 0; i < obj.part_tree.nodes.size(); ++i) {
    const auto& part = obj.part_tree.nodes[i];
    if (!part.model || areas[i] <= 0.0) continue;
    const int n = std::max(100, int(std::lround(total * areas[i] / total_area)));
    const PointCloud local = sample_mesh_surface(part.model->local_mesh(), n,
                                                 fnv1a(part.instance_label, seed));
    for (const auto& p : local) out.push_back(part.model->pose.apply(p));
  }
  return out;
}

std::vector<TriangleMesh> object_world_meshes(const ObjectNode& obj) {
  std::vector<TriangleMesh> out;
  for (const auto& part : obj.part_tree.nodes) {
    if (!part.model) continue;
    out.push_back(transform_mesh(part.model->pose, part.model->local_mesh()));
  }
  return out;
}

// Chamfer between surfaces: sampled points of each side measured against the
// other side's actual mesh, under the shared unit-box normalization. Unlike
// point-set chamfer this has no sampling floor, so identical geometry scores
// exactly zero.
double surface_chamfer(const ObjectNode& a, const ObjectNode& b, uint64_t seed) {
  PointCloud pa = object_surface_samples(a, 2048, seed);
  PointCloud pb = object_surface_samples(b, 2048, seed);
  TriangleMesh ma = merge_meshes(object_world_meshes(a));
  TriangleMesh mb = merge_meshes(object_world_meshes(b));

  Eigen::Vector3d lo = ma.vertices.front(), hi = lo;
  for (const auto& v : ma.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (const auto& v : mb.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Eigen::Vector3d span = (hi - lo).cwiseMax(1e-12);
  auto norm_pts = [&](PointCloud& pts) {
    for (auto& p : pts) p = (p - lo).cwiseQuotient(span);
  };
  auto norm_mesh = [&](TriangleMesh& m) {
    for (auto& v : m.vertices) v = (v - lo).cwiseQuotient(span);
  };
  norm_pts(pa);
  norm_pts(pb);
  norm_mesh(ma);
  norm_mesh(mb);

  double ab = 0.0, ba = 0.0;
  for (const auto& p : pa) ab += mesh_surface_distance(mb, p);
  for (const auto& p : pb) ba += mesh_surface_distance(ma, p);
  return ab / double(pa.size()) + ba / double(pb.size());
}

}  // namespace

PartEntity fit_part(const std::string& label, const std::string& cls, const PointCloud& cloud,
                    const PipelineConfig& config) {
  IcpOptions opts;
  opts.surface_samples = config.model_surface_samples;
  opts.max_iterations = config.icp_max_iterations;
  opts.cost_tolerance = config.icp_tolerance;
  opts.seed = fnv1a(label, config.seed);

  PartEntity part;
  part.instance_label = label;
  part.semantic_class = cls;
  part.cloud = cloud;
  const AlignmentResult fit = best_primitive(cloud, opts);
  part.model = FittedModel{fit.model.kind, fit.model.scale, fit.transform};
  part.planes = extract_planes(part, opts.seed);
  return part;
}

PipelineResult run_pipeline(const ContactGraph& input, const PipelineConfig& config) {
  config.validate();
  if (input.objects.empty())
    throw ParseError("pipeline input: scene has no objects");
  for (const auto& obj : input.objects) {
    if (obj.part_tree.nodes.empty())
      throw ParseError("pipeline input: object '" + obj.object_label + "' has no parts");
    for (const auto& part : obj.part_tree.nodes)
      if (part.cloud.empty() && !part.model)
        throw ParseError("pipeline input: part '" + obj.object_label + "/" +
                         part.instance_label + "' carries neither a cloud nor a model");
  }

  const JointRuleTable rules = load_rules(config);
  PipelineResult result;

  // stage 1: per-part primitive fitting (parallel, deterministic merge)
  auto t0 = Clock::now();
  struct FitJob {
    const ObjectNode* object;
    const PartEntity* part;
  };
  std::vector<FitJob> jobs;
  for (const auto& obj : input.objects)
    for (const auto& part : obj.part_tree.nodes) jobs.push_back({&obj, &part});
  result.total_parts = int(jobs.size());

  std::vector<std::optional<PartEntity>> fitted(jobs.size());
  std::vector<std::string> job_errors(jobs.size());
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const FitJob& job = jobs[i];
      const std::string qualified =
          job.object->object_label + "/" + job.part->instance_label;
      try {
        if (job.part->model) {
          // pre-fitted parts pass through (fit/infer subcommand replay)
          PartEntity part = *job.part;
          if (part.planes.empty()) part.planes = extract_planes(part);
          fitted[i] = std::move(part);
        } else {
          fitted[i] = fit_part(job.part->instance_label, job.part->semantic_class,
                               job.part->cloud, config);
        }
      } catch (const Error& e) {
        job_errors[i] = qualified + ": " + e.what();
      }
    }
  };
  {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& err : job_errors)
    if (!err.empty()) result.failed_parts.push_back(err);
  result.timings_ms["fit"] = ms_since(t0);

  // stage 2: per-object structure inference
  t0 = Clock::now();
  std::vector<ObjectNode> objects;
  size_t job_index = 0;
  for (const auto& obj : input.objects) {
    std::vector<PartEntity> parts;
    for (size_t k = 0; k < obj.part_tree.nodes.size(); ++k, ++job_index)
      if (fitted[job_index]) parts.push_back(*fitted[job_index]);
    if (parts.empty()) {
      result.warnings.push_back("object '" + obj.object_label + "' lost all parts to fitting");
      continue;
    }
    // parts the contact graph cannot reach from the root degrade to
    // warnings instead of sinking the whole object
    const std::vector<PartEntity> unreachable =
        drop_unreachable_parts(parts, config.thresholds);
    for (const auto& part : unreachable)
      result.failed_parts.push_back(obj.object_label + "/" + part.instance_label +
                                    ": unreachable in the contact graph");
    try {
      PartParseTree tree = infer_parse_tree(parts, config.thresholds, rules);
      if (config.refinement_enabled) {
        RefineOptions opts;
        opts.gate = config.refinement_gate;
        opts.contact_snap = config.contact_snap;
        tree = refine_tree(tree, opts);
      }
      objects.push_back(
          ObjectNode::from_tree(obj.object_label, obj.semantic_class, std::move(tree)));
    } catch (const Error& e) {
      for (const auto& part : parts)
        result.failed_parts.push_back(obj.object_label + "/" + part.instance_label + ": " +
                                      e.what());
      result.warnings.push_back("object '" + obj.object_label + "' dropped: " + e.what());
    }
  }
  result.timings_ms["infer"] = ms_since(t0);

  if (result.total_parts > 0 &&
      int(result.failed_parts.size()) * 2 > result.total_parts) {
    std::string detail;
    for (const auto& f : result.failed_parts) detail += "\n  " + f;
    throw Error(ErrorKind::Pipeline,
                "pipeline failed: " + std::to_string(result.failed_parts.size()) + " of " +
                    std::to_string(result.total_parts) + " parts failed" + detail);
  }
  if (objects.empty()) throw Error(ErrorKind::Pipeline, "pipeline failed: no objects survived");

  // stage 3: scene assembly + object pose refinement
  t0 = Clock::now();
  AssembleOptions assemble_opts;
  assemble_opts.thresholds = config.thresholds;
  assemble_opts.proximity_radius = config.proximity_radius;
  result.scene = assemble_scene(std::move(objects), assemble_opts, &result.warnings);
  if (config.refinement_enabled) result.scene = refine_object_poses(result.scene);
  result.timings_ms["assemble"] = ms_since(t0);
  return result;
}

std::string manifest_json(const PipelineResult& result, const PipelineConfig& config) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["config"] = nlohmann::json::parse(config.to_json_text());
  doc["config_hash"] = config.hash();
  doc["seed"] = config.seed;
  doc["total_parts"] = result.total_parts;
  doc["failed_parts"] = result.failed_parts;
  doc["warnings"] = result.warnings;
  doc["timings_ms"] = result.timings_ms;
  return doc.dump(2) + "\n";
}

std::vector<std::string> write_output_bundle(const PipelineResult& result,
                                             const PipelineConfig& config,
                                             const std::string& out_dir,
                                             const std::string& format) {
  namespace fs = std::filesystem;
  if (format != "urdf" && format != "json" && format != "obj" && format != "all")
    throw ConfigError("unknown output format '" + format + "'");
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto write_file = [&](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Internal, "cannot write '" + path.string() + "'");
    out << content;
    written.push_back(path.string());
  };

  if (format == "urdf" || format == "all")
    write_file(fs::path(out_dir) / "scene.urdf", export_urdf(result.scene));
  if (format == "json" || format == "all")
    write_file(fs::path(out_dir) / "scene.json", serialize_graph(result.scene));
  if (format == "obj" || format == "all") {
    const fs::path mesh_dir = fs::path(out_dir) / "meshes";
    fs::create_directories(mesh_dir);
    for (const auto& [name, mesh] : export_link_meshes(result.scene))
      write_file(mesh_dir / (name + ".obj"), write_obj(mesh));
  }
  write_file(fs::path(out_dir) / "manifest.json", manifest_json(result, config));
  return written;
}

EvaluationReport evaluate(const ContactGraph& predicted, const ContactGraph& truth,
                          const AnnotatedEdges& annotated, const ContactGraph* input_clouds) {
  EvaluationReport report;
  std::vector<ObjectPrediction> predictions;
  std::vector<ObjectAnnotation> annotations;

  double chamfer_acc = 0.0, iou_acc = 0.0;
  double base_chamfer_acc = 0.0, base_iou_acc = 0.0;
  int evaluated = 0;

  for (const auto& truth_obj : truth.objects) {
    const ObjectNode* pred_obj = nullptr;
    for (const auto& o : predicted.objects)
      if (o.object_label == truth_obj.object_label) pred_obj = &o;
    if (!pred_obj)
      throw Error(ErrorKind::Validation,
                  "evaluate: prediction is missing object '" + truth_obj.object_label + "'");

    const uint64_t seed = fnv1a(truth_obj.object_label, 1234567);
    const double chamfer = surface_chamfer(*pred_obj, truth_obj, seed);

    const double iou =
        voxel_iou_parts(object_world_meshes(*pred_obj), object_world_meshes(truth_obj), 32);

    report.per_object.push_back({truth_obj.object_label, chamfer, iou});
    chamfer_acc += chamfer;
    iou_acc += iou;

    // object-level baseline: one OBB-aligned box per object
    PointCloud baseline_source;
    if (input_clouds) {
      for (const auto& o : input_clouds->objects) {
        if (o.object_label != truth_obj.object_label) continue;
        for (const auto& part : o.part_tree.nodes)
          baseline_source.insert(baseline_source.end(), part.cloud.begin(), part.cloud.end());
      }
    }
    if (baseline_source.empty())
      baseline_source = object_surface_samples(truth_obj, 2048, seed);
    const OrientedBox obb = fit_obb(baseline_source);
    ObjectNode baseline_obj;
    baseline_obj.object_label = truth_obj.object_label;
    PartEntity box_part;
    box_part.instance_label = "box";
    box_part.model = FittedModel{PrimitiveKind::Box, 2.0 * obb.half_extents, obb.pose()};
    baseline_obj.part_tree.root = "box";
    baseline_obj.part_tree.nodes.push_back(std::move(box_part));
    base_chamfer_acc += surface_chamfer(baseline_obj, truth_obj, seed);
    base_iou_acc +=
        voxel_iou_parts(object_world_meshes(baseline_obj), object_world_meshes(truth_obj), 32);
    ++evaluated;

    // structure edges ranked by contact score
    ObjectPrediction pred;
    pred.label = truth_obj.object_label;
    pred.category = truth_obj.semantic_class;
    for (const auto& e : pred_obj->part_tree.edges)
      pred.edges.push_back({e.parent, e.child, e.evidence.contact_ratio});
    predictions.push_back(std::move(pred));

    ObjectAnnotation ann;
    ann.label = truth_obj.object_label;
    const auto it = annotated.find(truth_obj.object_label);
    if (it != annotated.end()) {
      ann.edges = it->second;
    } else {
      for (const auto& e : truth_obj.part_tree.edges) ann.edges.push_back({e.parent, e.child});
    }
    // the annotation vocabulary is the truth's part set; a degraded
    // prediction that lost a part just misses that edge in its ranking
    for (const auto& part : truth_obj.part_tree.nodes)
      ann.part_labels.push_back(part.instance_label);
    annotations.push_back(std::move(ann));
  }

  const auto category_map = structure_map(predictions, annotations);
  double map_acc = 0.0;
  for (const auto& [category, value] : category_map) {
    report.per_category_map.push_back({category, value});
    map_acc += value;
  }
  report.mean_chamfer = evaluated ? chamfer_acc / evaluated : 0.0;
  report.mean_iou = evaluated ? iou_acc / evaluated : 0.0;
  report.mean_map = category_map.empty() ? 0.0 : map_acc / double(category_map.size());
  report.baseline_mean_chamfer = evaluated ? base_chamfer_acc / evaluated : 0.0;
  report.baseline_mean_iou = evaluated ? base_iou_acc / evaluated : 0.0;
  return report;
}

}  // namespace partscene
