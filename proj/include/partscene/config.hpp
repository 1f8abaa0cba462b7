#pragma once

#include <cstdint>
#include <string>

#include "partscene/contact.hpp"

namespace partscene {

// Pipeline-wide knobs. Round-trips losslessly through its JSON form.
struct PipelineConfig {
  ContactThresholds thresholds;

  bool refinement_enabled = true;
  double refinement_gate = 0.9;
  bool contact_snap = false;

  int model_surface_samples = 1000;
  int icp_max_iterations = 100;
  double icp_tolerance = 1e-6;
  uint64_t seed = 17;

  double proximity_radius = 0.1;
  std::string joint_rules_path;  // empty: built-in defaults

  void validate() const;
  std::string to_json_text() const;
  static PipelineConfig from_json_text(const std::string& text);

  // Stable content hash (FNV-1a of the canonical JSON form).
  uint64_t hash() const;
};

uint64_t fnv1a(const std::string& data, uint64_t seed = 14695981039346656037ull);

}  // namespace partscene
