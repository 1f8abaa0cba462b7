#include "partscene/scene_json.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

#include "partscene/errors.hpp"

namespace partscene {

using nlohmann::json;

namespace {

constexpr double kQuatGrid = 1e-13;

json vec3_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(path + ": expected an array of 3 numbers");
  for (const auto& c : j)
    if (!c.is_number()) throw ParseError(path + ": expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Quaternion on a fixed grid with the dominant component re-derived from the
// unit norm: converting back through a rotation matrix perturbs components
// by ~1e-16, far below the grid step, so the emitted digits are stable.
std::array<double, 4> stable_quaternion(const Eigen::Matrix3d& rotation) {
  Eigen::Quaterniond q(rotation);
  std::array<double, 4> c = {q.w(), q.x(), q.y(), q.z()};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(c[i]) > 1e-6) {
      if (c[i] < 0.0)
        for (auto& v : c) v = -v;
      break;
    }
  }
  double max_abs = 0.0;
  for (double v : c) max_abs = std::max(max_abs, std::abs(v));
  int dominant = 0;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(c[i]) >= max_abs - 1e-9) {
      dominant = i;
      break;
    }
  }
  double sum_sq = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (i == dominant) continue;
    c[i] = std::nearbyint(c[i] / kQuatGrid) * kQuatGrid;
    sum_sq += c[i] * c[i];
  }
  const double sign = c[dominant] < 0.0 ? -1.0 : 1.0;
  c[dominant] = sign * std::sqrt(std::max(0.0, 1.0 - sum_sq));
  return c;
}

json pose_json(const RigidTransform& t) {
  const auto q = stable_quaternion(t.rotation);
  return {{"translation", vec3_json(t.translation)},
          {"quaternion_wxyz", json::array({q[0], q[1], q[2], q[3]})}};
}

RigidTransform pose_from(const json& j, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected a pose object");
  if (!j.contains("translation")) throw ParseError(path + ".translation: missing");
  if (!j.contains("quaternion_wxyz")) throw ParseError(path + ".quaternion_wxyz: missing");
  RigidTransform t;
  t.translation = vec3_from(j["translation"], path + ".translation");
  const json& q = j["quaternion_wxyz"];
  if (!q.is_array() || q.size() != 4)
    throw ParseError(path + ".quaternion_wxyz: expected an array of 4 numbers");
  Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                          q[3].get<double>());
  if (quat.norm() < 1e-6) throw ParseError(path + ".quaternion_wxyz: zero quaternion");
  t.rotation = quat.normalized().toRotationMatrix();
  return t;
}

json plane_json(const SurfacePlane& sp) {
  json polygon = json::array();
  for (const auto& v : sp.polygon.vertices) polygon.push_back(vec3_json(v));
  return {{"normal", vec3_json(sp.plane.normal)},
          {"offset", sp.plane.offset},
          {"polygon", polygon}};
}

SurfacePlane plane_from(const json& j, const std::string& path) {
  if (!j.contains("normal") || !j.contains("offset") || !j.contains("polygon"))
    throw ParseError(path + ": plane needs normal, offset, polygon");
  const Plane plane(vec3_from(j["normal"], path + ".normal"), j["offset"].get<double>());
  std::vector<Eigen::Vector3d> verts;
  for (size_t i = 0; i < j["polygon"].size(); ++i)
    verts.push_back(vec3_from(j["polygon"][i], path + ".polygon[" + std::to_string(i) + "]"));
  try {
    return {plane, PlanarPolygon(verts, plane)};
  } catch (const Error& e) {
    throw ParseError(path + ".polygon: " + e.what());
  }
}

json joint_json(const Joint& joint) {
  json out = {{"type", to_string(joint.type)}, {"origin", pose_json(joint.parent_to_child)}};
  out["axis"] = joint.axis ? vec3_json(*joint.axis) : json(nullptr);
  out["limits"] =
      joint.limits ? json::array({joint.limits->first, joint.limits->second}) : json(nullptr);
  if (joint.defaulted) out["defaulted"] = true;
  if (joint.heuristic_attach) out["heuristic_attach"] = true;
  return out;
}

Joint joint_from(const json& j, const std::string& path) {
  Joint joint;
  if (!j.contains("type") || !j["type"].is_string())
    throw ParseError(path + ".type: missing joint type");
  joint.type = joint_type_from_string(j["type"].get<std::string>());  // ParseError on unknown
  if (!j.contains("origin")) throw ParseError(path + ".origin: missing");
  joint.parent_to_child = pose_from(j["origin"], path + ".origin");
  if (j.contains("axis") && !j["axis"].is_null())
    joint.axis = vec3_from(j["axis"], path + ".axis");
  if (j.contains("limits") && !j["limits"].is_null()) {
    const json& l = j["limits"];
    if (!l.is_array() || l.size() != 2) throw ParseError(path + ".limits: expected [lower, upper]");
    joint.limits = std::make_pair(l[0].get<double>(), l[1].get<double>());
  }
  joint.defaulted = j.value("defaulted", false);
  joint.heuristic_attach = j.value("heuristic_attach", false);
  return joint;
}

json evidence_json(const ContactEvidence& ev) {
  return {{"parent_plane", ev.parent_plane_index},
          {"child_plane", ev.child_plane_index},
          {"align", ev.align_score},
          {"distance", ev.distance},
          {"contact_ratio", ev.contact_ratio}};
}

ContactEvidence evidence_from(const json& j) {
  ContactEvidence ev;
  ev.parent_plane_index = j.value("parent_plane", -1);
  ev.child_plane_index = j.value("child_plane", -1);
  ev.align_score = j.value("align", 0.0);
  ev.distance = j.value("distance", 0.0);
  ev.contact_ratio = j.value("contact_ratio", 0.0);
  return ev;
}

}  // namespace

std::string base64_encode(const std::vector<uint8_t>& data) {
  static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  for (size_t i = 0; i < data.size(); i += 3) {
    uint32_t chunk = uint32_t(data[i]) << 16;
    if (i + 1 < data.size()) chunk |= uint32_t(data[i + 1]) << 8;
    if (i + 2 < data.size()) chunk |= uint32_t(data[i + 2]);
    out += table[(chunk >> 18) & 0x3F];
    out += table[(chunk >> 12) & 0x3F];
    out += i + 1 < data.size() ? table[(chunk >> 6) & 0x3F] : '=';
    out += i + 2 < data.size() ? table[chunk & 0x3F] : '=';
  }
  return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    if (c == '=') return -1;
    throw ParseError("base64: invalid character");
  };
  if (text.size() % 4 != 0) throw ParseError("base64: length must be a multiple of 4");
  std::vector<uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (size_t i = 0; i < text.size(); i += 4) {
    int v[4];
    for (int k = 0; k < 4; ++k) v[k] = value(text[i + k]);
    const uint32_t chunk = (uint32_t(v[0]) << 18) | (uint32_t(v[1]) << 12) |
                           (v[2] < 0 ? 0u : uint32_t(v[2]) << 6) | (v[3] < 0 ? 0u : uint32_t(v[3]));
    out.push_back(uint8_t((chunk >> 16) & 0xFF));
    if (v[2] >= 0) out.push_back(uint8_t((chunk >> 8) & 0xFF));
    if (v[3] >= 0) out.push_back(uint8_t(chunk & 0xFF));
  }
  return out;
}

std::string encode_cloud(const PointCloud& cloud) {
  std::vector<uint8_t> bytes(cloud.size() * 12);
  size_t offset = 0;
  for (const auto& p : cloud) {
    for (int axis = 0; axis < 3; ++axis) {
      const float f = float(p[axis]);
      std::memcpy(bytes.data() + offset, &f, 4);  // little-endian host
      offset += 4;
    }
  }
  return base64_encode(bytes);
}

PointCloud decode_cloud(const std::string& text) {
  const std::vector<uint8_t> bytes = base64_decode(text);
  if (bytes.size() % 12 != 0)
    throw ParseError("cloud: payload is not a sequence of float32 xyz triples");
  PointCloud out(bytes.size() / 12);
  for (size_t i = 0; i < out.size(); ++i) {
    float xyz[3];
    std::memcpy(xyz, bytes.data() + i * 12, 12);
    out[i] = {double(xyz[0]), double(xyz[1]), double(xyz[2])};
  }
  return out;
}

std::string serialize_graph(const ContactGraph& graph, const AnnotatedEdges* annotated,
                            bool embed_clouds) {
  json doc;
  doc["schema_version"] = 1;
  doc["root"] = graph.root_label;
  doc["thresholds"] = {{"theta_a", graph.thresholds.theta_a},
                       {"theta_d", graph.thresholds.theta_d},
                       {"theta_c", graph.thresholds.theta_c}};
  doc["proximity_radius"] = graph.proximity_radius;

  json objects = json::array();
  for (const auto& obj : graph.objects) {
    json parts = json::array();
    for (const auto& part : obj.part_tree.nodes) {
      json p = {{"label", part.instance_label}, {"class", part.semantic_class}};
      if (part.model) {
        p["primitive"] = {{"kind", to_string(part.model->kind)},
                          {"scale", vec3_json(part.model->scale)}};
        p["pose"] = pose_json(part.model->pose);
      }
      json planes = json::array();
      for (const auto& sp : part.planes) planes.push_back(plane_json(sp));
      p["planes"] = planes;
      if (embed_clouds && !part.cloud.empty()) p["cloud"] = encode_cloud(part.cloud);
      parts.push_back(std::move(p));
    }
    json edges = json::array();
    for (const auto& e : obj.part_tree.edges) {
      edges.push_back({{"parent", e.parent},
                       {"child", e.child},
                       {"joint", joint_json(e.joint)},
                       {"contact", evidence_json(e.evidence)}});
    }
    objects.push_back({{"label", obj.object_label},
                       {"class", obj.semantic_class},
                       {"pose", pose_json(obj.world_pose)},
                       {"root_part", obj.part_tree.root},
                       {"parts", parts},
                       {"edges", edges}});
  }
  doc["objects"] = objects;

  json supporting = json::array();
  for (const auto& [s, t] : graph.supporting) supporting.push_back(json::array({s, t}));
  doc["supporting"] = supporting;
  json proximal = json::array();
  for (const auto& [a, b] : graph.proximal) proximal.push_back(json::array({a, b}));
  doc["proximal"] = proximal;

  if (annotated && !annotated->empty()) {
    json ann = json::object();
    for (const auto& [object_label, edges] : *annotated) {
      json list = json::array();
      for (const auto& [a, b] : edges) list.push_back(json::array({a, b}));
      ann[object_label] = list;
    }
    doc["annotated_edges"] = ann;
  }
  return doc.dump(2) + "\n";
}

LoadedScene load_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene json: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scene json: root must be an object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
    throw ParseError("schema_version: missing or not an integer");
  if (doc["schema_version"].get<int>() != 1)
    throw ParseError("schema_version: unsupported version " + doc["schema_version"].dump());

  LoadedScene out;
  ContactGraph& graph = out.graph;
  graph.root_label = doc.value("root", std::string("floor"));
  if (doc.contains("thresholds")) {
    const json& th = doc["thresholds"];
    graph.thresholds.theta_a = th.value("theta_a", graph.thresholds.theta_a);
    graph.thresholds.theta_d = th.value("theta_d", graph.thresholds.theta_d);
    graph.thresholds.theta_c = th.value("theta_c", graph.thresholds.theta_c);
  }
  graph.proximity_radius = doc.value("proximity_radius", graph.proximity_radius);

  if (!doc.contains("objects") || !doc["objects"].is_array())
    throw ParseError("objects: missing array");
  for (size_t i = 0; i < doc["objects"].size(); ++i) {
    const json& jo = doc["objects"][i];
    const std::string opath = "objects[" + std::to_string(i) + "]";
    if (!jo.contains("label") || !jo["label"].is_string())
      throw ParseError(opath + ".label: missing");
    ObjectNode obj;
    obj.object_label = jo["label"].get<std::string>();
    obj.semantic_class = jo.value("class", std::string());
    if (jo.contains("pose")) obj.world_pose = pose_from(jo["pose"], opath + ".pose");

    if (!jo.contains("parts") || !jo["parts"].is_array())
      throw ParseError(opath + ".parts: missing array");
    for (size_t k = 0; k < jo["parts"].size(); ++k) {
      const json& jp = jo["parts"][k];
      const std::string ppath = opath + ".parts[" + std::to_string(k) + "]";
      if (!jp.contains("label") || !jp["label"].is_string())
        throw ParseError(ppath + ".label: missing");
      PartEntity part;
      part.instance_label = jp["label"].get<std::string>();
      part.semantic_class = jp.value("class", std::string());
      if (jp.contains("primitive")) {
        const json& prim = jp["primitive"];
        if (!prim.contains("kind") || !prim["kind"].is_string())
          throw ParseError(ppath + ".primitive.kind: missing");
        FittedModel model;
        try {
          model.kind = primitive_kind_from_string(prim["kind"].get<std::string>());
        } catch (const ParseError&) {
          throw ParseError(ppath + ".primitive.kind: unknown value '" +
                           prim["kind"].get<std::string>() + "'");
        }
        model.scale = vec3_from(prim.value("scale", json::array({1.0, 1.0, 1.0})),
                                ppath + ".primitive.scale");
        if (jp.contains("pose")) model.pose = pose_from(jp["pose"], ppath + ".pose");
        part.model = model;
      }
      if (jp.contains("planes")) {
        for (size_t n = 0; n < jp["planes"].size(); ++n)
          part.planes.push_back(plane_from(jp["planes"][n],
                                           ppath + ".planes[" + std::to_string(n) + "]"));
      }
      if (jp.contains("cloud")) {
        if (!jp["cloud"].is_string()) throw ParseError(ppath + ".cloud: expected base64 string");
        part.cloud = decode_cloud(jp["cloud"].get<std::string>());
      }
      obj.part_tree.nodes.push_back(std::move(part));
    }

    obj.part_tree.root = jo.value("root_part", obj.part_tree.nodes.empty()
                                                   ? std::string()
                                                   : obj.part_tree.nodes.front().instance_label);
    if (jo.contains("edges")) {
      for (size_t k = 0; k < jo["edges"].size(); ++k) {
        const json& je = jo["edges"][k];
        const std::string epath = opath + ".edges[" + std::to_string(k) + "]";
        if (!je.contains("parent") || !je.contains("child"))
          throw ParseError(epath + ": needs parent and child");
        ParseTreeEdge edge;
        edge.parent = je["parent"].get<std::string>();
        edge.child = je["child"].get<std::string>();
        if (!je.contains("joint")) throw ParseError(epath + ".joint: missing");
        edge.joint = joint_from(je["joint"], epath + ".joint");
        if (je.contains("contact")) edge.evidence = evidence_from(je["contact"]);
        obj.part_tree.edges.push_back(std::move(edge));
      }
    }
    graph.objects.push_back(std::move(obj));
  }

  auto read_pairs = [&](const char* key) {
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!doc.contains(key)) return pairs;
    const json& arr = doc[key];
    if (!arr.is_array()) throw ParseError(std::string(key) + ": expected an array");
    for (size_t i = 0; i < arr.size(); ++i) {
      const json& pair = arr[i];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
        throw ParseError(std::string(key) + "[" + std::to_string(i) + "]: expected [a, b]");
      pairs.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
    }
    return pairs;
  };
  graph.supporting = read_pairs("supporting");
  graph.proximal = read_pairs("proximal");

  if (doc.contains("annotated_edges")) {
    const json& ann = doc["annotated_edges"];
    if (!ann.is_object()) throw ParseError("annotated_edges: expected an object");
    for (const auto& [object_label, list] : ann.items()) {
      std::vector<std::pair<std::string, std::string>> edges;
      for (size_t i = 0; i < list.size(); ++i) {
        const json& pair = list[i];
        if (!pair.is_array() || pair.size() != 2)
          throw ParseError("annotated_edges." + object_label + "[" + std::to_string(i) +
                           "]: expected [a, b]");
        edges.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
      }
      out.annotated[object_label] = edges;
    }
  }
  return out;
}

}  // namespace partscene
