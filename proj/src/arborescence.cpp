#include "partscene/arborescence.hpp"

#include <algorithm>
#include <string>

#include "partscene/errors.hpp"

namespace partscene {

namespace {

struct WorkEdge {
  int from;
  int to;
  double weight;
  int original;  // index into the input edge list
};

// Chu-Liu/Edmonds by cycle contraction. `n` counts current nodes; node ids
// are remapped on each contraction level.
std::vector<int> solve(int n, int root, std::vector<WorkEdge> edges) {
  // best incoming edge per node
  std::vector<int> best(n, -1);
  for (size_t e = 0; e < edges.size(); ++e) {
    const WorkEdge& edge = edges[e];
    if (edge.to == root || edge.from == edge.to) continue;
    if (best[edge.to] < 0 || edge.weight > edges[best[edge.to]].weight) best[edge.to] = int(e);
  }

  // find a cycle among the chosen edges
  std::vector<int> visited(n, -1), cycle_id(n, -1);
  int cycles = 0;
  for (int v = 0; v < n; ++v) {
    if (v == root) continue;
    if (best[v] < 0) continue;  // caller guarantees reachability; treated later
    int walk = v;
    while (walk != root && visited[walk] < 0) {
      visited[walk] = v;
      if (best[walk] < 0) break;
      walk = edges[best[walk]].from;
    }
    if (walk != root && best[walk] >= 0 && visited[walk] == v && cycle_id[walk] < 0) {
      // walked back into this iteration's own path: a cycle through `walk`
      int u = walk;
      do {
        cycle_id[u] = cycles;
        u = edges[best[u]].from;
      } while (u != walk);
      ++cycles;
    }
  }

  if (cycles == 0) {
    std::vector<int> result;
    for (int v = 0; v < n; ++v)
      if (v != root && best[v] >= 0) result.push_back(edges[best[v]].original);
    return result;
  }

  // contract every cycle into a supernode
  int next_id = 0;
  std::vector<int> remap(n, -1);
  for (int v = 0; v < n; ++v)
    if (cycle_id[v] < 0) remap[v] = next_id++;
  std::vector<int> cycle_node(cycles);
  for (int c = 0; c < cycles; ++c) cycle_node[c] = next_id++;
  for (int v = 0; v < n; ++v)
    if (cycle_id[v] >= 0) remap[v] = cycle_node[cycle_id[v]];

  std::vector<WorkEdge> contracted;
  // edge ids chosen inside cycles, needed for expansion
  for (const auto& edge : edges) {
    const int nf = remap[edge.from];
    const int nt = remap[edge.to];
    if (nf == nt) continue;
    WorkEdge w = edge;
    w.from = nf;
    w.to = nt;
    if (cycle_id[edge.to] >= 0) {
      // entering a cycle: pay for displacing the cycle's own incoming edge
      w.weight = edge.weight - edges[best[edge.to]].weight;
    }
    contracted.push_back(w);
  }

  const std::vector<int> sub = solve(next_id, remap[root], contracted);

  // expansion: keep every cycle edge except the one displaced by the chosen
  // entering edge of its cycle. `original` ids are stable across levels, so
  // each selected sub edge maps back to exactly one edge of this level.
  std::vector<int> result(sub);
  std::vector<int> entered_target(cycles, -1);
  for (int orig : sub) {
    for (const auto& e : edges) {
      if (e.original == orig) {
        if (cycle_id[e.to] >= 0) entered_target[cycle_id[e.to]] = e.to;
        break;
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (cycle_id[v] < 0 || v == root) continue;
    if (entered_target[cycle_id[v]] == v) continue;  // displaced
    result.push_back(edges[best[v]].original);
  }
  return result;
}

}  // namespace

std::vector<int> max_arborescence(const ContactDigraph& digraph, int root) {
  const int n = int(digraph.labels.size());
  if (n == 0) throw PreconditionError("max_arborescence: empty digraph");
  if (root < 0 || root >= n) throw PreconditionError("max_arborescence: root out of range");

  // reachability check with explicit offender list
  std::vector<std::vector<int>> adjacency(n);
  for (const auto& e : digraph.edges) adjacency[e.parent].push_back(e.child);
  std::vector<bool> reachable(n, false);
  std::vector<int> stack = {root};
  reachable[root] = true;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adjacency[v])
      if (!reachable[w]) {
        reachable[w] = true;
        stack.push_back(w);
      }
  }
  std::string offenders;
  for (int v = 0; v < n; ++v) {
    if (!reachable[v]) offenders += (offenders.empty() ? "" : ", ") + digraph.labels[v];
  }
  if (!offenders.empty())
    throw DisconnectedStructureError("parts unreachable from root '" + digraph.labels[root] +
                                     "': " + offenders);

  std::vector<WorkEdge> edges;
  edges.reserve(digraph.edges.size());
  for (size_t e = 0; e < digraph.edges.size(); ++e) {
    const auto& edge = digraph.edges[e];
    edges.push_back({edge.parent, edge.child, edge.weight, int(e)});
  }
  std::vector<int> result = solve(n, root, std::move(edges));
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace partscene
