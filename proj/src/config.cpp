#include "partscene/config.hpp"

#include <json.hpp>

#include "partscene/errors.hpp"

namespace partscene {

using nlohmann::json;

void PipelineConfig::validate() const {
  thresholds.validate();
  if (!(refinement_gate > 0.0 && refinement_gate < 1.0))
    throw ConfigError("refinement gate must be in (0, 1)");
  if (model_surface_samples < 500)
    throw ConfigError("model_surface_samples must be >= 500");
  if (icp_max_iterations < 1) throw ConfigError("icp_max_iterations must be >= 1");
  if (!(icp_tolerance > 0.0)) throw ConfigError("icp_tolerance must be positive");
  if (!(proximity_radius > 0.0)) throw ConfigError("proximity_radius must be positive");
}

std::string PipelineConfig::to_json_text() const {
  json doc;
  doc["schema_version"] = 1;
  doc["thresholds"] = {{"theta_a", thresholds.theta_a},
                       {"theta_d", thresholds.theta_d},
                       {"theta_c", thresholds.theta_c}};
  doc["refinement"] = {{"enabled", refinement_enabled},
                       {"gate", refinement_gate},
                       {"contact_snap", contact_snap}};
  doc["sampling"] = {{"model_surface_samples", model_surface_samples},
                     {"icp_max_iterations", icp_max_iterations},
                     {"icp_tolerance", icp_tolerance},
                     {"seed", seed}};
  doc["proximity_radius"] = proximity_radius;
  doc["joint_rules_path"] = joint_rules_path;
  return doc.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  PipelineConfig c;
  if (doc.contains("thresholds")) {
    const json& th = doc["thresholds"];
    c.thresholds.theta_a = th.value("theta_a", c.thresholds.theta_a);
    c.thresholds.theta_d = th.value("theta_d", c.thresholds.theta_d);
    c.thresholds.theta_c = th.value("theta_c", c.thresholds.theta_c);
  }
  if (doc.contains("refinement")) {
    const json& r = doc["refinement"];
    c.refinement_enabled = r.value("enabled", c.refinement_enabled);
    c.refinement_gate = r.value("gate", c.refinement_gate);
    c.contact_snap = r.value("contact_snap", c.contact_snap);
  }
  if (doc.contains("sampling")) {
    const json& s = doc["sampling"];
    c.model_surface_samples = s.value("model_surface_samples", c.model_surface_samples);
    c.icp_max_iterations = s.value("icp_max_iterations", c.icp_max_iterations);
    c.icp_tolerance = s.value("icp_tolerance", c.icp_tolerance);
    c.seed = s.value("seed", c.seed);
  }
  c.proximity_radius = doc.value("proximity_radius", c.proximity_radius);
  c.joint_rules_path = doc.value("joint_rules_path", c.joint_rules_path);
  c.validate();
  return c;
}

uint64_t fnv1a(const std::string& data, uint64_t seed) {
  uint64_t hash = seed;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

uint64_t PipelineConfig::hash() const { return fnv1a(to_json_text()); }

}  // namespace partscene
