#pragma once

#include <vector>

#include <Eigen/Dense>

#include "partscene/transform.hpp"

namespace partscene {

inline constexpr double kOnPlaneTol = 1e-6;

// Plane n^T u + d = 0 with unit normal n.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  Plane() = default;
  Plane(const Eigen::Vector3d& n, double d);
  static Plane through_point(const Eigen::Vector3d& n, const Eigen::Vector3d& point);

  double signed_distance(const Eigen::Vector3d& u) const { return normal.dot(u) + offset; }
  // Some point on the plane (-d * n).
  Eigen::Vector3d anchor() const { return -offset * normal; }
};

// Plane expressed in a new frame: points u on the plane map to t.apply(u).
Plane transform_plane(const RigidTransform& t, const Plane& p);

// Convex-in-practice planar polygon. Vertices are stored counter-clockwise
// when viewed from the +normal side; the constructor reorders if needed.
struct PlanarPolygon {
  std::vector<Eigen::Vector3d> vertices;
  Plane supporting_plane;

  PlanarPolygon() = default;
  PlanarPolygon(std::vector<Eigen::Vector3d> verts, const Plane& plane);
};

PlanarPolygon transform_polygon(const RigidTransform& t, const PlanarPolygon& poly);

// Orthogonal projection of u onto the plane through `anchor`.
Eigen::Vector3d project_point(const Eigen::Vector3d& u, const Plane& plane,
                              const Eigen::Vector3d& anchor);

// Per-vertex projection of a polygon onto `target`. Throws
// DegenerateGeometryError when the planes are near-perpendicular and the
// projection collapses.
PlanarPolygon project_polygon(const PlanarPolygon& poly, const Plane& target,
                              const Eigen::Vector3d& anchor);

// Shoelace area in the polygon's plane, m^2.
double polygon_area(const PlanarPolygon& p);

// Area of a intersect b for coplanar polygons (clipping in the shared 2D
// frame). Non-convex inputs are convexified first; *convexified, when given,
// reports whether that happened.
double polygon_intersection_area(const PlanarPolygon& a, const PlanarPolygon& b,
                                 bool* convexified = nullptr);

// 2D helpers shared with plane extraction and contact geometry.
// Orthonormal in-plane axes (e1, e2) with e1 x e2 = normal.
void plane_basis(const Plane& plane, Eigen::Vector3d& e1, Eigen::Vector3d& e2);
std::vector<Eigen::Vector2d> to_plane_frame(const PlanarPolygon& poly, const Plane& frame_plane);
// Andrew monotone chain, CCW output.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> pts);
double polygon_area_2d(const std::vector<Eigen::Vector2d>& pts);
// Sutherland-Hodgman clip of convex `subject` against convex CCW `clip`.
std::vector<Eigen::Vector2d> clip_convex_2d(const std::vector<Eigen::Vector2d>& subject,
                                            const std::vector<Eigen::Vector2d>& clip);
bool point_in_convex_2d(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly);

}  // namespace partscene
