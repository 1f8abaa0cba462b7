#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "partscene/obb.hpp"
#include "partscene/transform.hpp"

namespace partscene {

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  double surface_area() const;
  Eigen::Vector3d triangle_normal(int t) const;
  double triangle_area(int t) const;
  bool is_watertight() const;
};

TriangleMesh transform_mesh(const RigidTransform& t, const TriangleMesh& mesh);
TriangleMesh scale_mesh(const TriangleMesh& mesh, const Eigen::Vector3d& scale);
TriangleMesh merge_meshes(const std::vector<TriangleMesh>& meshes);

// Canonical primitives, centered at the origin, fitting the unit cube.
TriangleMesh make_unit_box();
// Unit diameter and height, axis +z.
TriangleMesh make_unit_cylinder(int segments = 64);
// Unit diameter lat/long sphere.
TriangleMesh make_unit_sphere(int stacks = 24, int slices = 48);

// n points spread area-proportionally over the triangles (largest-remainder
// allocation, seeded in-triangle placement). Deterministic for a fixed seed.
// When `normals` is given it receives the owning triangle's normal per point.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, int n, uint64_t seed,
                               std::vector<Eigen::Vector3d>* normals = nullptr);

// Distance from p to the closest point on the mesh surface.
double mesh_surface_distance(const TriangleMesh& mesh, const Eigen::Vector3d& p);

std::string write_obj(const TriangleMesh& mesh);

}  // namespace partscene
