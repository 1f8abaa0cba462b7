#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "partscene/contact_graph.hpp"

namespace partscene {

// Human-annotated undirected contact edges per object (metrics input).
using AnnotatedEdges = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;

// Scene-graph JSON (schema_version 1). Poses serialize as translation +
// quaternion_wxyz; quaternions are emitted on a 1e-13 grid with the largest
// component re-derived from the unit norm, which keeps re-serialization
// byte-identical. Per-part clouds embed as base64 float32 LE xyz triples.
std::string serialize_graph(const ContactGraph& graph,
                            const AnnotatedEdges* annotated = nullptr,
                            bool embed_clouds = false);

struct LoadedScene {
  ContactGraph graph;
  AnnotatedEdges annotated;
};

// Parses a scene document. Accepts both full graphs (pipeline output) and
// input scenes that carry only labeled part clouds. Schema violations raise
// ParseError naming the offending field path.
LoadedScene load_graph(const std::string& text);

std::string base64_encode(const std::vector<uint8_t>& data);
std::vector<uint8_t> base64_decode(const std::string& text);

std::string encode_cloud(const PointCloud& cloud);
PointCloud decode_cloud(const std::string& text);

}  // namespace partscene
