#pragma once

#include <vector>

#include "partscene/contact.hpp"

namespace partscene {

// Maximum-weight spanning arborescence rooted at `root` (Chu-Liu/Edmonds).
// Returns indices into digraph.edges, one incoming edge per non-root node.
// Throws DisconnectedStructureError naming the nodes unreachable from root.
std::vector<int> max_arborescence(const ContactDigraph& digraph, int root);

}  // namespace partscene
