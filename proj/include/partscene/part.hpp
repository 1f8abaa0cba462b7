#pragma once

#include <optional>
#include <string>
#include <vector>

#include "partscene/mesh.hpp"
#include "partscene/obb.hpp"
#include "partscene/plane.hpp"
#include "partscene/transform.hpp"

namespace partscene {

enum class PrimitiveKind { Box, Cylinder, Sphere };

const char* to_string(PrimitiveKind kind);
PrimitiveKind primitive_kind_from_string(const std::string& s);

// Surface plane with its boundary polygon, expressed in the owning part's
// local frame (world frame for unfitted raw-cloud parts).
struct SurfacePlane {
  Plane plane;
  PlanarPolygon polygon;
};

// Fitted primitive replacing a part's point cloud. `scale` are full extents
// of the canonical unit shape; `pose` maps the canonical frame to world.
struct FittedModel {
  PrimitiveKind kind = PrimitiveKind::Box;
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();
  RigidTransform pose;

  TriangleMesh local_mesh(int cylinder_segments = 64) const;
  double volume() const;
  // Full width of the solid along a unit direction in the local frame.
  double support_width(const Eigen::Vector3d& axis_local) const;
};

// One object part: segmented cloud plus (after fitting) its primitive model
// and surface planes.
struct PartEntity {
  std::string instance_label;
  std::string semantic_class;
  PointCloud cloud;  // world frame
  std::optional<FittedModel> model;
  std::vector<SurfacePlane> planes;

  RigidTransform pose() const { return model ? model->pose : RigidTransform::Identity(); }
  std::vector<SurfacePlane> world_planes() const;
  Eigen::Vector3d world_centroid() const;
  double model_volume() const { return model ? model->volume() : 0.0; }
};

}  // namespace partscene
