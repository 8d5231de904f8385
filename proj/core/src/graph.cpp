#include "climatescope/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>

#include "climatescope/error.hpp"

namespace climatescope {

void DirectedGraph::add_edge(std::size_t from, std::size_t to) {
  if (from >= nodes_ || to >= nodes_) {
    throw ContractError("edge (" + std::to_string(from) + ", " + std::to_string(to) +
                        ") references a node outside the graph");
  }
  if (from == to) {
    throw ContractError("self-loop on node " + std::to_string(from));
  }
  edges_.insert({from, to});
}

std::vector<std::size_t> DirectedGraph::parents(std::size_t node) const {
  std::vector<std::size_t> out;
  for (const auto& [u, v] : edges_) {
    if (v == node) {
      out.push_back(u);
    }
  }
  return out;
}

std::vector<std::size_t> DirectedGraph::children(std::size_t node) const {
  std::vector<std::size_t> out;
  for (auto it = edges_.lower_bound({node, 0}); it != edges_.end() && it->first == node; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::optional<std::vector<std::size_t>> DirectedGraph::topological_sort() const {
  std::vector<std::size_t> indegree(nodes_, 0);
  for (const auto& e : edges_) {
    ++indegree[e.second];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < nodes_; ++v) {
    if (indegree[v] == 0) {
      ready.push(v);
    }
  }
  std::vector<std::size_t> order;
  order.reserve(nodes_);
  while (!ready.empty()) {
    const auto v = ready.top();
    ready.pop();
    order.push_back(v);
    for (auto c : children(v)) {
      if (--indegree[c] == 0) {
        ready.push(c);
      }
    }
  }
  if (order.size() != nodes_) {
    return std::nullopt;
  }
  return order;
}

std::size_t structural_hamming_distance(const DirectedGraph& a, const DirectedGraph& b) {
  if (a.node_count() != b.node_count()) {
    throw ContractError("SHD between graphs of different size");
  }
  std::size_t distance = 0;
  const auto n = a.node_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool a_ij = a.has_edge(i, j);
      const bool a_ji = a.has_edge(j, i);
      const bool b_ij = b.has_edge(i, j);
      const bool b_ji = b.has_edge(j, i);
      if (a_ij != b_ij || a_ji != b_ji) {
        ++distance;
      }
    }
  }
  return distance;
}

}  // namespace climatescope
