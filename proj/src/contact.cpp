#include "partscene/contact.hpp"

#include <cmath>

#include "partscene/errors.hpp"

namespace partscene {

void ContactThresholds::validate() const {
  if (!(theta_a > 0.0 && theta_a <= 1.0))
    throw ConfigError("theta_a must be in (0, 1], got " + std::to_string(theta_a));
  if (!(theta_d > 0.0)) throw ConfigError("theta_d must be positive");
  if (!(theta_c > 0.0 && theta_c <= 1.0))
    throw ConfigError("theta_c must be in (0, 1], got " + std::to_string(theta_c));
}

ContactQuantities contact_quantities(const SurfacePlane& parent, const SurfacePlane& child) {
  ContactQuantities q;
  q.align = std::abs(parent.plane.normal.dot(child.plane.normal));

  double acc = 0.0;
  for (const auto& u : child.polygon.vertices) acc += parent.plane.signed_distance(u);
  q.distance = acc / double(child.polygon.vertices.size());

  if (q.align > 1e-3) {
    const PlanarPolygon projected =
        project_polygon(child.polygon, parent.plane, parent.plane.anchor());
    q.contact_ratio =
        polygon_intersection_area(parent.polygon, projected) / polygon_area(child.polygon);
  }
  return q;
}

std::optional<ContactEvidence> check_contact(const PartEntity& parent, const PartEntity& child,
                                             const ContactThresholds& th) {
  th.validate();
  const std::vector<SurfacePlane> parent_planes = parent.world_planes();
  const std::vector<SurfacePlane> child_planes = child.world_planes();
  std::optional<ContactEvidence> best;
  for (size_t i = 0; i < parent_planes.size(); ++i) {
    for (size_t j = 0; j < child_planes.size(); ++j) {
      const double align =
          std::abs(parent_planes[i].plane.normal.dot(child_planes[j].plane.normal));
      if (align < th.theta_a || align <= 1e-3) continue;  // 1e-3: projection degenerates

      double acc = 0.0;
      for (const auto& u : child_planes[j].polygon.vertices)
        acc += parent_planes[i].plane.signed_distance(u);
      const double dist = acc / double(child_planes[j].polygon.vertices.size());
      // the constraint is written signed; the symmetric bound rejects deep
      // interpenetration as well
      if (dist > th.theta_d || std::abs(dist) > th.theta_d) continue;

      const PlanarPolygon projected = project_polygon(
          child_planes[j].polygon, parent_planes[i].plane, parent_planes[i].plane.anchor());
      const double cont = polygon_intersection_area(parent_planes[i].polygon, projected) /
                          polygon_area(child_planes[j].polygon);
      if (cont < th.theta_c) continue;

      if (!best || cont > best->contact_ratio) {
        ContactEvidence ev;
        ev.parent_plane_index = int(i);
        ev.child_plane_index = int(j);
        ev.align_score = align;
        ev.distance = dist;
        ev.contact_ratio = cont;
        best = ev;
      }
    }
  }
  return best;
}

ContactDigraph build_contact_digraph(const std::vector<PartEntity>& parts,
                                     const ContactThresholds& th) {
  if (parts.empty()) throw PreconditionError("build_contact_digraph needs at least one part");
  ContactDigraph g;
  g.labels.reserve(parts.size());
  for (const auto& p : parts) g.labels.push_back(p.instance_label);
  for (size_t p = 0; p < parts.size(); ++p) {
    for (size_t c = 0; c < parts.size(); ++c) {
      if (p == c) continue;
      const auto evidence = check_contact(parts[p], parts[c], th);
      if (!evidence) continue;
      g.edges.push_back({int(p), int(c), evidence->contact_ratio, *evidence});
    }
  }
  return g;
}

}  // namespace partscene
