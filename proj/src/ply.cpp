#include "partscene/ply.hpp"

#include <cstdio>
#include <sstream>

#include "partscene/errors.hpp"

namespace partscene {

std::string write_ply(const PointCloud& cloud) {
  std::string out = "ply\nformat ascii 1.0\nelement vertex " + std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[96];
  for (const auto& p : cloud) {
    std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f\n", p.x(), p.y(), p.z());
    out += buf;
  }
  return out;
}

PointCloud read_ply(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw ParseError("ply: missing 'ply' magic");

  size_t vertex_count = 0;
  bool header_done = false;
  int xyz_seen = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "end_header") {
      header_done = true;
      break;
    }
    std::istringstream ls(line);
    std::string keyword;
    ls >> keyword;
    if (keyword == "format") {
      std::string kind;
      ls >> kind;
      if (kind != "ascii") throw ParseError("ply: only ascii format is supported");
    } else if (keyword == "element") {
      std::string what;
      ls >> what >> vertex_count;
      if (what != "vertex") throw ParseError("ply: only vertex elements are supported");
    } else if (keyword == "property") {
      std::string type, name;
      ls >> type >> name;
      if (name == "x" || name == "y" || name == "z") ++xyz_seen;
    }
  }
  if (!header_done) throw ParseError("ply: header not terminated by end_header");
  if (xyz_seen != 3) throw ParseError("ply: needs x, y, z float properties");

  PointCloud out;
  out.reserve(vertex_count);
  for (size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line))
      throw ParseError("ply: expected " + std::to_string(vertex_count) + " vertices, got " +
                       std::to_string(i));
    std::istringstream ls(line);
    Eigen::Vector3d p;
    if (!(ls >> p.x() >> p.y() >> p.z()))
      throw ParseError("ply: malformed vertex line " + std::to_string(i + 1));
    out.push_back(p);
  }
  return out;
}

}  // namespace partscene
