#pragma once

#include <map>
#include <string>
#include <vector>

#include "partscene/config.hpp"
#include "partscene/metrics.hpp"
#include "partscene/scene_json.hpp"
#include "partscene/synthetic.hpp"

namespace partscene {

struct PipelineResult {
  ContactGraph scene;
  std::vector<std::string> warnings;
  std::vector<std::string> failed_parts;  // "object/part: reason"
  int total_parts = 0;
  std::map<std::string, double> timings_ms;  // per stage
};

// Full reconstruction: per-part primitive fitting, per-object parse-tree
// inference and refinement, scene assembly, object pose refinement. Parts
// whose fitting or structure inference fails are reported and skipped; the
// run aborts (Error, kind Pipeline) only when more than half of all parts
// fail.
PipelineResult run_pipeline(const ContactGraph& input, const PipelineConfig& config);

// Fit a single part cloud: best primitive + its surface planes.
PartEntity fit_part(const std::string& label, const std::string& cls, const PointCloud& cloud,
                    const PipelineConfig& config);

// Run manifest (config echo + hash, seed, counts, warnings, timings). Not
// byte-stable across runs: it includes wall-clock timings.
std::string manifest_json(const PipelineResult& result, const PipelineConfig& config);

// Writes scene.urdf / scene.json / meshes/*.obj / manifest.json per the
// format flags ("urdf", "json", "obj", "all"). Returns the written paths.
std::vector<std::string> write_output_bundle(const PipelineResult& result,
                                             const PipelineConfig& config,
                                             const std::string& out_dir,
                                             const std::string& format);

// Metrics against the generator truth: per-object chamfer + voxel IoU,
// per-category structure mAP, and the single-box object-level baseline
// (OBB of each object's merged input cloud; truth surface samples when no
// input clouds are available).
EvaluationReport evaluate(const ContactGraph& predicted, const ContactGraph& truth,
                          const AnnotatedEdges& annotated,
                          const ContactGraph* input_clouds = nullptr);

}  // namespace partscene
