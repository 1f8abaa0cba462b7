#include "partscene/plane.hpp"

#include <algorithm>
#include <cmath>

#include "partscene/errors.hpp"

namespace partscene {

Plane::Plane(const Eigen::Vector3d& n, double d) : normal(n), offset(d) {
  const double len = normal.norm();
  if (len < 1e-12) throw DegenerateGeometryError("plane normal has zero length");
  normal /= len;
  offset /= len;
}

Plane Plane::through_point(const Eigen::Vector3d& n, const Eigen::Vector3d& point) {
  Plane p(n, 0.0);
  p.offset = -p.normal.dot(point);
  return p;
}

Plane transform_plane(const RigidTransform& t, const Plane& p) {
  Plane out;
  out.normal = t.rotation * p.normal;
  out.offset = p.offset - out.normal.dot(t.translation);
  return out;
}

void plane_basis(const Plane& plane, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
  e1 = plane.normal.unitOrthogonal();
  e2 = plane.normal.cross(e1);
}

namespace {

double signed_area_2d(const std::vector<Eigen::Vector2d>& pts) {
  double acc = 0.0;
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = pts[i];
    const Eigen::Vector2d& b = pts[(i + 1) % n];
    acc += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * acc;
}

bool is_convex_ccw(const std::vector<Eigen::Vector2d>& pts, double tol) {
  const size_t n = pts.size();
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = pts[i];
    const Eigen::Vector2d& b = pts[(i + 1) % n];
    const Eigen::Vector2d& c = pts[(i + 2) % n];
    const double cross = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (cross < -tol) return false;
  }
  return true;
}

}  // namespace

PlanarPolygon::PlanarPolygon(std::vector<Eigen::Vector3d> verts, const Plane& plane)
    : vertices(std::move(verts)), supporting_plane(plane) {
  if (vertices.size() < 3)
    throw InvalidPolygonError("polygon needs at least 3 vertices, got " +
                              std::to_string(vertices.size()));
  for (const auto& v : vertices) {
    if (std::abs(supporting_plane.signed_distance(v)) >= kOnPlaneTol)
      throw InvalidPolygonError("polygon vertex off its supporting plane");
  }
  // enforce CCW seen from +normal
  std::vector<Eigen::Vector2d> flat = to_plane_frame(*this, supporting_plane);
  if (signed_area_2d(flat) < 0.0) std::reverse(vertices.begin(), vertices.end());
}

PlanarPolygon transform_polygon(const RigidTransform& t, const PlanarPolygon& poly) {
  PlanarPolygon out;
  out.supporting_plane = transform_plane(t, poly.supporting_plane);
  out.vertices.reserve(poly.vertices.size());
  for (const auto& v : poly.vertices) out.vertices.push_back(t.apply(v));
  return out;
}

Eigen::Vector3d project_point(const Eigen::Vector3d& u, const Plane& plane,
                              const Eigen::Vector3d& anchor) {
  if (std::abs(plane.signed_distance(anchor)) >= kOnPlaneTol)
    throw PreconditionError("projection anchor does not lie on the target plane");
  return u - plane.normal.dot(u - anchor) * plane.normal;
}

PlanarPolygon project_polygon(const PlanarPolygon& poly, const Plane& target,
                              const Eigen::Vector3d& anchor) {
  if (std::abs(poly.supporting_plane.normal.dot(target.normal)) <= 1e-3)
    throw DegenerateGeometryError("polygon projection collapses: planes are near-perpendicular");
  std::vector<Eigen::Vector3d> projected;
  projected.reserve(poly.vertices.size());
  for (const auto& v : poly.vertices) projected.push_back(project_point(v, target, anchor));
  return PlanarPolygon(std::move(projected), target);
}

std::vector<Eigen::Vector2d> to_plane_frame(const PlanarPolygon& poly, const Plane& frame_plane) {
  Eigen::Vector3d e1, e2;
  plane_basis(frame_plane, e1, e2);
  const Eigen::Vector3d origin = frame_plane.anchor();
  std::vector<Eigen::Vector2d> out;
  out.reserve(poly.vertices.size());
  for (const auto& v : poly.vertices) {
    const Eigen::Vector3d rel = v - origin;
    out.emplace_back(e1.dot(rel), e2.dot(rel));
  }
  return out;
}

double polygon_area_2d(const std::vector<Eigen::Vector2d>& pts) {
  if (pts.size() < 3) return 0.0;
  return std::abs(signed_area_2d(pts));
}

double polygon_area(const PlanarPolygon& p) {
  if (p.vertices.size() < 3) throw InvalidPolygonError("polygon area needs at least 3 vertices");
  return polygon_area_2d(to_plane_frame(p, p.supporting_plane));
}

std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> pts) {
  if (pts.size() < 3) return pts;
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * n);
  size_t k = 0;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  for (size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const size_t lower = k + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Eigen::Vector2d> clip_convex_2d(const std::vector<Eigen::Vector2d>& subject,
                                            const std::vector<Eigen::Vector2d>& clip) {
  std::vector<Eigen::Vector2d> output = subject;
  const size_t m = clip.size();
  for (size_t i = 0; i < m && !output.empty(); ++i) {
    const Eigen::Vector2d a = clip[i];
    const Eigen::Vector2d b = clip[(i + 1) % m];
    const Eigen::Vector2d edge = b - a;
    std::vector<Eigen::Vector2d> input;
    input.swap(output);
    auto inside = [&](const Eigen::Vector2d& p) {
      return edge.x() * (p.y() - a.y()) - edge.y() * (p.x() - a.x()) >= 0.0;
    };
    auto intersect = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& q) {
      const Eigen::Vector2d dir = q - p;
      const double denom = edge.x() * dir.y() - edge.y() * dir.x();
      const double t = (edge.x() * (a.y() - p.y()) - edge.y() * (a.x() - p.x())) / denom;
      return Eigen::Vector2d(p + t * dir);
    };
    const size_t n = input.size();
    for (size_t j = 0; j < n; ++j) {
      const Eigen::Vector2d& cur = input[j];
      const Eigen::Vector2d& prev = input[(j + n - 1) % n];
      const bool cur_in = inside(cur);
      const bool prev_in = inside(prev);
      if (cur_in) {
        if (!prev_in) output.push_back(intersect(prev, cur));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(intersect(prev, cur));
      }
    }
  }
  return output;
}

bool point_in_convex_2d(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = poly[i];
    const Eigen::Vector2d& b = poly[(i + 1) % n];
    if ((b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x()) < 0.0) return false;
  }
  return true;
}

double polygon_intersection_area(const PlanarPolygon& a, const PlanarPolygon& b,
                                 bool* convexified) {
  if (convexified) *convexified = false;
  for (const auto& v : b.vertices) {
    if (std::abs(a.supporting_plane.signed_distance(v)) >= kOnPlaneTol)
      throw PreconditionError("polygon_intersection_area: inputs are not coplanar");
  }
  std::vector<Eigen::Vector2d> fa = to_plane_frame(a, a.supporting_plane);
  std::vector<Eigen::Vector2d> fb = to_plane_frame(b, a.supporting_plane);
  // clipping assumes convex CCW rings; fall back to hulls otherwise
  const double tol = 1e-12;
  if (!is_convex_ccw(fa, tol)) {
    fa = convex_hull_2d(fa);
    if (convexified) *convexified = true;
  }
  if (signed_area_2d(fb) < 0.0) std::reverse(fb.begin(), fb.end());
  if (!is_convex_ccw(fb, tol)) {
    fb = convex_hull_2d(fb);
    if (convexified) *convexified = true;
  }
  return polygon_area_2d(clip_convex_2d(fb, fa));
}

}  // namespace partscene
