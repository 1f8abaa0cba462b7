#include "partscene/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>

namespace partscene {

double TriangleMesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  const Eigen::Vector3d& a = vertices[tri[0]];
  const Eigen::Vector3d& b = vertices[tri[1]];
  const Eigen::Vector3d& c = vertices[tri[2]];
  return 0.5 * (b - a).cross(c - a).norm();
}

Eigen::Vector3d TriangleMesh::triangle_normal(int t) const {
  const auto& tri = triangles[t];
  const Eigen::Vector3d& a = vertices[tri[0]];
  const Eigen::Vector3d& b = vertices[tri[1]];
  const Eigen::Vector3d& c = vertices[tri[2]];
  Eigen::Vector3d n = (b - a).cross(c - a);
  const double len = n.norm();
  return len > 1e-15 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::UnitZ();
}

double TriangleMesh::surface_area() const {
  double acc = 0.0;
  for (size_t t = 0; t < triangles.size(); ++t) acc += triangle_area(int(t));
  return acc;
}

bool TriangleMesh::is_watertight() const {
  // every directed edge must be matched by exactly one reverse edge
  std::map<std::pair<int, int>, int> edges;
  for (const auto& tri : triangles) {
    for (int i = 0; i < 3; ++i) {
      const int a = tri[i];
      const int b = tri[(i + 1) % 3];
      if (a == b) return false;
      edges[{a, b}] += 1;
    }
  }
  for (const auto& [edge, count] : edges) {
    if (count != 1) return false;
    auto rev = edges.find({edge.second, edge.first});
    if (rev == edges.end() || rev->second != 1) return false;
  }
  return true;
}

TriangleMesh transform_mesh(const RigidTransform& t, const TriangleMesh& mesh) {
  TriangleMesh out;
  out.triangles = mesh.triangles;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.vertices.push_back(t.apply(v));
  return out;
}

TriangleMesh scale_mesh(const TriangleMesh& mesh, const Eigen::Vector3d& scale) {
  TriangleMesh out;
  out.triangles = mesh.triangles;
  out.vertices.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) out.vertices.push_back(v.cwiseProduct(scale));
  return out;
}

TriangleMesh merge_meshes(const std::vector<TriangleMesh>& meshes) {
  TriangleMesh out;
  for (const auto& m : meshes) {
    const int base = int(out.vertices.size());
    out.vertices.insert(out.vertices.end(), m.vertices.begin(), m.vertices.end());
    for (const auto& tri : m.triangles)
      out.triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
  }
  return out;
}

TriangleMesh make_unit_box() {
  TriangleMesh m;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1}) m.vertices.emplace_back(0.5 * sx, 0.5 * sy, 0.5 * sz);
  // indices: bit2 = x, bit1 = y, bit0 = z with -1 -> 0
  auto idx = [](int x, int y, int z) { return (x << 2) | (y << 1) | z; };
  auto quad = [&](int a, int b, int c, int d) {
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
  };
  quad(idx(0, 0, 0), idx(0, 1, 0), idx(1, 1, 0), idx(1, 0, 0));  // -z
  quad(idx(0, 0, 1), idx(1, 0, 1), idx(1, 1, 1), idx(0, 1, 1));  // +z
  quad(idx(0, 0, 0), idx(0, 0, 1), idx(0, 1, 1), idx(0, 1, 0));  // -x
  quad(idx(1, 0, 0), idx(1, 1, 0), idx(1, 1, 1), idx(1, 0, 1));  // +x
  quad(idx(0, 0, 0), idx(1, 0, 0), idx(1, 0, 1), idx(0, 0, 1));  // -y
  quad(idx(0, 1, 0), idx(0, 1, 1), idx(1, 1, 1), idx(1, 1, 0));  // +y
  return m;
}

TriangleMesh make_unit_cylinder(int segments) {
  TriangleMesh m;
  const double r = 0.5, h = 0.5;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * M_PI * i / segments;
    m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), -h);
    m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), h);
  }
  const int bottom_center = int(m.vertices.size());
  m.vertices.emplace_back(0.0, 0.0, -h);
  const int top_center = bottom_center + 1;
  m.vertices.emplace_back(0.0, 0.0, h);
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    m.triangles.push_back({b0, b1, t1});
    m.triangles.push_back({b0, t1, t0});
    m.triangles.push_back({bottom_center, b1, b0});
    m.triangles.push_back({top_center, t0, t1});
  }
  return m;
}

TriangleMesh make_unit_sphere(int stacks, int slices) {
  TriangleMesh m;
  const double r = 0.5;
  m.vertices.emplace_back(0.0, 0.0, r);   // north pole
  m.vertices.emplace_back(0.0, 0.0, -r);  // south pole
  for (int i = 1; i < stacks; ++i) {
    const double theta = M_PI * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double phi = 2.0 * M_PI * j / slices;
      m.vertices.emplace_back(r * std::sin(theta) * std::cos(phi),
                              r * std::sin(theta) * std::sin(phi), r * std::cos(theta));
    }
  }
  auto ring = [&](int i, int j) { return 2 + (i - 1) * slices + (j % slices); };
  for (int j = 0; j < slices; ++j) {
    m.triangles.push_back({0, ring(1, j), ring(1, j + 1)});
    m.triangles.push_back({1, ring(stacks - 1, j + 1), ring(stacks - 1, j)});
  }
  for (int i = 1; i < stacks - 1; ++i)
    for (int j = 0; j < slices; ++j) {
      m.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      m.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  return m;
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, int n, uint64_t seed,
                               std::vector<Eigen::Vector3d>* normals) {
  const size_t nt = mesh.triangles.size();
  std::vector<double> areas(nt);
  double total = 0.0;
  for (size_t t = 0; t < nt; ++t) {
    areas[t] = mesh.triangle_area(int(t));
    total += areas[t];
  }
  // largest-remainder allocation keeps per-triangle counts proportional
  std::vector<int> counts(nt, 0);
  std::vector<std::pair<double, size_t>> remainders(nt);
  int assigned = 0;
  for (size_t t = 0; t < nt; ++t) {
    const double exact = n * areas[t] / total;
    counts[t] = int(std::floor(exact));
    remainders[t] = {exact - counts[t], t};
    assigned += counts[t];
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (int k = 0; assigned < n; ++k, ++assigned) counts[remainders[k % nt].second] += 1;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud out;
  out.reserve(n);
  if (normals) {
    normals->clear();
    normals->reserve(n);
  }
  for (size_t t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d& a = mesh.vertices[tri[0]];
    const Eigen::Vector3d& b = mesh.vertices[tri[1]];
    const Eigen::Vector3d& c = mesh.vertices[tri[2]];
    const Eigen::Vector3d tri_normal = normals ? mesh.triangle_normal(int(t)) : Eigen::Vector3d();
    for (int k = 0; k < counts[t]; ++k) {
      double u = unit(rng), v = unit(rng);
      if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
      }
      out.push_back(a + u * (b - a) + v * (c - a));
      if (normals) normals->push_back(tri_normal);
    }
  }
  return out;
}

namespace {

Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace

double mesh_surface_distance(const TriangleMesh& mesh, const Eigen::Vector3d& p) {
  double best = std::numeric_limits<double>::max();
  for (const auto& tri : mesh.triangles) {
    const Eigen::Vector3d q = closest_point_on_triangle(p, mesh.vertices[tri[0]],
                                                        mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    best = std::min(best, (p - q).norm());
  }
  return best;
}

std::string write_obj(const TriangleMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.triangles.size() * 20);
  char buf[96];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.6f %.6f %.6f\n", v.x(), v.y(), v.z());
    out += buf;
  }
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof(buf), "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    out += buf;
  }
  return out;
}

}  // namespace partscene
