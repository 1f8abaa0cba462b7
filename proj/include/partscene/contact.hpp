#pragma once

#include <optional>
#include <string>
#include <vector>

#include "partscene/part.hpp"

namespace partscene {

// Thresholds for the three contact constraints: normal alignment, mean
// plane distance, and minimum contact ratio.
struct ContactThresholds {
  double theta_a = 0.95;  // |n_p . n_c| lower bound; 1 = perfectly parallel
  double theta_d = 0.03;  // meters
  double theta_c = 0.15;  // area ratio lower bound

  void validate() const;
};

// Best satisfying plane pair between a parent and a child entity.
struct ContactEvidence {
  int parent_plane_index = -1;
  int child_plane_index = -1;
  double align_score = 0.0;    // |n_p . n_c|
  double distance = 0.0;       // signed mean vertex distance, meters
  double contact_ratio = 0.0;  // area(U_p ^ proj(U_c)) / area(U_c)
};

// Evaluates the three contact constraints over all plane pairs of the two
// entities (world frame) and returns the pair maximizing the contact ratio,
// or nullopt when no pair satisfies all thresholds.
std::optional<ContactEvidence> check_contact(const PartEntity& parent, const PartEntity& child,
                                             const ContactThresholds& th);

struct ContactEdge {
  int parent = 0;  // node indices
  int child = 0;
  double weight = 0.0;  // best contact ratio
  ContactEvidence evidence;
};

struct ContactDigraph {
  std::vector<std::string> labels;
  std::vector<ContactEdge> edges;
};

// One node per part; a directed edge (p, c) with weight max_ij Cont for every
// ordered pair whose contact check succeeds.
ContactDigraph build_contact_digraph(const std::vector<PartEntity>& parts,
                                     const ContactThresholds& th);

// Raw constraint quantities for a single plane pair, exposed for fixtures.
struct ContactQuantities {
  double align = 0.0;
  double distance = 0.0;
  double contact_ratio = 0.0;  // only valid when the projection is non-degenerate
};
ContactQuantities contact_quantities(const SurfacePlane& parent, const SurfacePlane& child);

}  // namespace partscene
