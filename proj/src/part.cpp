#include "partscene/part.hpp"

#include <cmath>

#include "partscene/errors.hpp"

namespace partscene {

const char* to_string(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Box:
      return "box";
    case PrimitiveKind::Cylinder:
      return "cylinder";
    case PrimitiveKind::Sphere:
      return "sphere";
  }
  return "box";
}

PrimitiveKind primitive_kind_from_string(const std::string& s) {
  if (s == "box") return PrimitiveKind::Box;
  if (s == "cylinder") return PrimitiveKind::Cylinder;
  if (s == "sphere") return PrimitiveKind::Sphere;
  throw ParseError("unknown primitive kind '" + s + "'");
}

TriangleMesh FittedModel::local_mesh(int cylinder_segments) const {
  switch (kind) {
    case PrimitiveKind::Box:
      return scale_mesh(make_unit_box(), scale);
    case PrimitiveKind::Cylinder:
      return scale_mesh(make_unit_cylinder(cylinder_segments), scale);
    case PrimitiveKind::Sphere:
      return scale_mesh(make_unit_sphere(), scale);
  }
  return {};
}

double FittedModel::volume() const {
  switch (kind) {
    case PrimitiveKind::Box:
      return scale.prod();
    case PrimitiveKind::Cylinder:
      return M_PI * (scale.x() / 2.0) * (scale.y() / 2.0) * scale.z();
    case PrimitiveKind::Sphere:
      return M_PI / 6.0 * scale.prod();
  }
  return 0.0;
}

double FittedModel::support_width(const Eigen::Vector3d& axis_local) const {
  const Eigen::Vector3d a = axis_local.normalized();
  switch (kind) {
    case PrimitiveKind::Box:
      return scale.cwiseProduct(a.cwiseAbs()).sum();
    case PrimitiveKind::Cylinder: {
      const double radial = std::hypot(a.x(), a.y());
      return scale.z() * std::abs(a.z()) + scale.x() * radial;
    }
    case PrimitiveKind::Sphere:
      return scale.x();
  }
  return 0.0;
}

std::vector<SurfacePlane> PartEntity::world_planes() const {
  if (!model) return planes;
  const RigidTransform& t = model->pose;
  std::vector<SurfacePlane> out;
  out.reserve(planes.size());
  for (const auto& sp : planes)
    out.push_back({transform_plane(t, sp.plane), transform_polygon(t, sp.polygon)});
  return out;
}

Eigen::Vector3d PartEntity::world_centroid() const {
  if (model) return model->pose.translation;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  if (cloud.empty()) return c;
  for (const auto& p : cloud) c += p;
  return c / double(cloud.size());
}

}  // namespace partscene
