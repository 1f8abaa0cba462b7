// Hand-built part/object fixtures for kinematics, refinement, and scene tests.
#pragma once

#include <string>

#include "partscene/parse_tree.hpp"
#include "partscene/primitive_fit.hpp"

namespace fixtures {

inline partscene::PartEntity make_part(const std::string& label, const std::string& cls,
                                       partscene::PrimitiveKind kind,
                                       const Eigen::Vector3d& scale,
                                       const partscene::RigidTransform& pose) {
  partscene::PartEntity part;
  part.instance_label = label;
  part.semantic_class = cls;
  part.model = partscene::FittedModel{kind, scale, pose};
  part.planes = partscene::extract_planes(part);
  return part;
}

inline partscene::PartEntity make_box_part(const std::string& label, const std::string& cls,
                                           const Eigen::Vector3d& scale,
                                           const Eigen::Vector3d& center) {
  return make_part(label, cls, partscene::PrimitiveKind::Box, scale,
                   {Eigen::Matrix3d::Identity(), center});
}

// Table: 1.2 x 0.8 top slab on four 0.05-square legs, feet on z = 0.
inline std::vector<partscene::PartEntity> make_table(double top_z = 0.72) {
  const double top_thick = 0.05;
  const double leg_h = top_z - top_thick;
  std::vector<partscene::PartEntity> parts;
  parts.push_back(make_box_part("top", "table_top", {1.2, 0.8, top_thick},
                                {0.0, 0.0, leg_h + top_thick / 2.0}));
  int i = 0;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) {
      parts.push_back(make_box_part("leg_" + std::to_string(i++), "table_leg",
                                    {0.05, 0.05, leg_h},
                                    {sx * 0.55, sy * 0.35, leg_h / 2.0}));
    }
  return parts;
}

// Microwave: base box with a thin door flush on its +x face.
inline std::vector<partscene::PartEntity> make_microwave(const Eigen::Vector3d& base_center = {
                                                             0.0, 0.0, 0.15}) {
  std::vector<partscene::PartEntity> parts;
  const Eigen::Vector3d base_scale(0.4, 0.5, 0.3);
  parts.push_back(make_box_part("base", "microwave_base", base_scale, base_center));
  const Eigen::Vector3d door_scale(0.04, 0.38, 0.28);
  const Eigen::Vector3d door_center =
      base_center + Eigen::Vector3d(base_scale.x() / 2.0 + door_scale.x() / 2.0, 0.0, 0.0);
  parts.push_back(make_box_part("door", "microwave_door", door_scale, door_center));
  return parts;
}

// Cabinet: solid base with a drawer flush against its +y face.
inline std::vector<partscene::PartEntity> make_cabinet() {
  std::vector<partscene::PartEntity> parts;
  parts.push_back(make_box_part("base", "cabinet_base", {0.6, 0.5, 0.8}, {0.0, 0.0, 0.4}));
  parts.push_back(make_box_part("drawer", "cabinet_drawer", {0.5, 0.4, 0.18}, {0.0, 0.45, 0.3}));
  return parts;
}

}  // namespace fixtures
