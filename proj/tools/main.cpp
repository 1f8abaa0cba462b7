// Command-line front end: synth / fit / infer / reconstruct / eval / validate.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "partscene/errors.hpp"
#include "partscene/pipeline.hpp"
#include "partscene/ply.hpp"
#include "partscene/urdf.hpp"

namespace fs = std::filesystem;
using namespace partscene;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Internal, "cannot write '" + path.string() + "'");
  out << content;
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string format = "all";
  uint64_t seed = 0;
  bool seed_set = false;
  double theta_a = -1.0, theta_d = -1.0, theta_c = -1.0;
  bool no_refine = false;

  PipelineConfig resolve() const {
    PipelineConfig config;
    if (!config_path.empty()) config = PipelineConfig::from_json_text(read_file(config_path));
    if (seed_set) config.seed = seed;
    if (theta_a > 0.0) config.thresholds.theta_a = theta_a;
    if (theta_d > 0.0) config.thresholds.theta_d = theta_d;
    if (theta_c > 0.0) config.thresholds.theta_c = theta_c;
    if (no_refine) config.refinement_enabled = false;
    config.validate();
    return config;
  }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "pipeline config JSON");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--format", flags.format, "urdf|json|obj|all")->default_str("all");
  cmd->add_option("--seed", flags.seed, "RNG seed")->each([&](const std::string&) {
    flags.seed_set = true;
  });
  cmd->add_option("--theta-a", flags.theta_a, "normal alignment threshold");
  cmd->add_option("--theta-d", flags.theta_d, "plane distance threshold, meters");
  cmd->add_option("--theta-c", flags.theta_c, "contact ratio threshold");
  cmd->add_flag("--no-refine", flags.no_refine, "skip spatial refinement");
}

nlohmann::json part_summary(const PartEntity& part) {
  nlohmann::json out;
  out["label"] = part.instance_label;
  out["class"] = part.semantic_class;
  out["kind"] = to_string(part.model->kind);
  out["scale"] = {part.model->scale.x(), part.model->scale.y(), part.model->scale.z()};
  const Eigen::Vector3d t = part.model->pose.translation;
  out["translation"] = {t.x(), t.y(), t.z()};
  out["planes"] = part.planes.size();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"part-level interactive scene reconstruction"};
  app.require_subcommand(1);

  // synth
  CommonFlags synth_flags;
  std::string templates_csv = "table,chair,cabinet,microwave,bed";
  double sigma = 0.0, dropout = 0.0;
  bool partial_view = false;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene with ground truth");
  add_common(synth, synth_flags);
  synth->add_option("--templates", templates_csv, "comma-separated template list");
  synth->add_option("--sigma", sigma, "gaussian noise sigma, meters");
  synth->add_option("--dropout", dropout, "point dropout fraction [0,1)");
  synth->add_flag("--partial-view", partial_view, "remove back-facing points");

  // fit
  CommonFlags fit_flags;
  std::string fit_input;
  CLI::App* fit = app.add_subcommand("fit", "fit one part cloud (ascii PLY)");
  add_common(fit, fit_flags);
  fit->add_option("--input", fit_input, "part cloud .ply")->required();

  // infer
  CommonFlags infer_flags;
  std::string infer_input, infer_object;
  CLI::App* infer = app.add_subcommand("infer", "infer one object's part tree");
  add_common(infer, infer_flags);
  infer->add_option("--input", infer_input, "scene JSON with part clouds")->required();
  infer->add_option("--object", infer_object, "object label (default: first object)");

  // reconstruct
  CommonFlags rec_flags;
  std::string rec_input;
  CLI::App* rec = app.add_subcommand("reconstruct", "run the full pipeline on a scene");
  add_common(rec, rec_flags);
  rec->add_option("--input", rec_input, "scene JSON with part clouds")->required();

  // eval
  CommonFlags eval_flags;
  std::string eval_pred, eval_truth, eval_input;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a reconstruction against ground truth");
  add_common(eval, eval_flags);
  eval->add_option("--pred", eval_pred, "predicted scene JSON")->required();
  eval->add_option("--truth", eval_truth, "ground-truth scene JSON")->required();
  eval->add_option("--input", eval_input, "input scene JSON with clouds (baseline source)");

  // validate
  CommonFlags val_flags;
  std::string val_input;
  CLI::App* validate = app.add_subcommand("validate", "validate a scene JSON or URDF file");
  add_common(validate, val_flags);
  validate->add_option("--input", val_input, "file to validate (.json or .urdf)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      SyntheticSceneSpec spec;
      spec.seed = synth_flags.seed_set ? synth_flags.seed : 0;
      spec.noise_sigma = sigma;
      spec.dropout = dropout;
      spec.partial_view = partial_view;
      spec.templates.clear();
      std::stringstream ss(templates_csv);
      std::string token;
      while (std::getline(ss, token, ','))
        if (!token.empty()) spec.templates.push_back(token);
      const SyntheticScene scene = generate_synthetic_scene(spec);
      const std::string out_dir = synth_flags.out_dir.empty() ? "." : synth_flags.out_dir;
      write_file(fs::path(out_dir) / "scene_input.json",
                 serialize_graph(scene.input, nullptr, true));
      write_file(fs::path(out_dir) / "truth.json", serialize_graph(scene.truth, &scene.annotated));
      std::cout << "wrote " << (fs::path(out_dir) / "scene_input.json").string() << " and "
                << (fs::path(out_dir) / "truth.json").string() << "\n";
      return 0;
    }

    if (fit->parsed()) {
      const PipelineConfig config = fit_flags.resolve();
      const PointCloud cloud = read_ply(read_file(fit_input));
      const PartEntity part =
          fit_part(fs::path(fit_input).stem().string(), "unknown", cloud, config);
      std::cout << part_summary(part).dump(2) << "\n";
      if (!fit_flags.out_dir.empty()) {
        write_file(fs::path(fit_flags.out_dir) / (part.instance_label + ".obj"),
                   write_obj(transform_mesh(part.model->pose, part.model->local_mesh())));
      }
      return 0;
    }

    if (infer->parsed()) {
      const PipelineConfig config = infer_flags.resolve();
      const LoadedScene scene = load_graph(read_file(infer_input));
      ContactGraph one;
      one.thresholds = config.thresholds;
      for (const auto& obj : scene.graph.objects) {
        if (infer_object.empty() || obj.object_label == infer_object) {
          one.objects.push_back(obj);
          break;
        }
      }
      if (one.objects.empty())
        throw ConfigError("object '" + infer_object + "' not found in the input scene");
      const PipelineResult result = run_pipeline(one, config);
      const std::string text = serialize_graph(result.scene);
      if (infer_flags.out_dir.empty()) {
        std::cout << text;
      } else {
        write_file(fs::path(infer_flags.out_dir) / "object.json", text);
        std::cout << "wrote " << (fs::path(infer_flags.out_dir) / "object.json").string() << "\n";
      }
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      return 0;
    }

    if (rec->parsed()) {
      const PipelineConfig config = rec_flags.resolve();
      const LoadedScene scene = load_graph(read_file(rec_input));
      const PipelineResult result = run_pipeline(scene.graph, config);
      const std::string out_dir = rec_flags.out_dir.empty() ? "out" : rec_flags.out_dir;
      const auto written = write_output_bundle(result, config, out_dir, rec_flags.format);
      for (const auto& path : written) std::cout << "wrote " << path << "\n";
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& f : result.failed_parts) std::cerr << "failed part: " << f << "\n";
      return 0;
    }

    if (eval->parsed()) {
      const LoadedScene pred = load_graph(read_file(eval_pred));
      const LoadedScene truth = load_graph(read_file(eval_truth));
      LoadedScene input;
      const bool has_input = !eval_input.empty();
      if (has_input) input = load_graph(read_file(eval_input));
      const EvaluationReport report = evaluate(pred.graph, truth.graph, truth.annotated,
                                               has_input ? &input.graph : nullptr);
      if (eval_flags.out_dir.empty()) {
        std::cout << report.to_table_text();
      } else {
        write_file(fs::path(eval_flags.out_dir) / "report.json", report.to_json_text());
        write_file(fs::path(eval_flags.out_dir) / "report.txt", report.to_table_text());
        std::cout << "wrote " << (fs::path(eval_flags.out_dir) / "report.json").string() << "\n";
      }
      return 0;
    }

    if (validate->parsed()) {
      const std::string text = read_file(val_input);
      const std::string ext = fs::path(val_input).extension().string();
      if (ext == ".urdf" || ext == ".xml") {
        const UrdfReport report = validate_urdf(text);
        std::cout << "valid urdf: " << report.links << " links, " << report.joints
                  << " joints, root '" << report.root_link << "'\n";
      } else {
        const LoadedScene scene = load_graph(text);
        std::cout << "valid scene: " << scene.graph.objects.size() << " objects\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Validation:
        return 1;
      case ErrorKind::Pipeline:
        return 2;
      case ErrorKind::Internal:
        return 3;
    }
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
