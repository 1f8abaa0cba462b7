#pragma once

#include <string>
#include <vector>

#include "partscene/scene_json.hpp"

namespace partscene {

// Synthetic scene recipe. Identical spec + seed produce bit-identical output.
struct SyntheticSceneSpec {
  uint64_t seed = 0;
  std::vector<std::string> templates = {"table", "chair", "cabinet", "microwave", "bed"};
  double noise_sigma = 0.0;   // meters, gaussian per coordinate
  double dropout = 0.0;       // fraction of points removed, in [0, 1)
  bool partial_view = false;  // drop points facing away from a fixed camera

  void validate() const;
};

struct SyntheticScene {
  ContactGraph truth;   // fitted models, parse trees, supporting relations
  ContactGraph input;   // the same labels, but parts carry only noisy clouds
  AnnotatedEdges annotated;  // undirected truth contact edges per object
};

// Assembles template objects (known primitives, joints, and contacts) on the
// floor, then samples and degrades per-part surface clouds. The truth graph
// is the oracle the pipeline output is evaluated against.
SyntheticScene generate_synthetic_scene(const SyntheticSceneSpec& spec);

std::vector<std::string> known_templates();

}  // namespace partscene
