#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace climatescope {

using Edge = std::pair<std::size_t, std::size_t>;  // (parent, child)

/// Simple directed graph over nodes 0..n-1 with an ordered edge set.
class DirectedGraph {
 public:
  explicit DirectedGraph(std::size_t nodes = 0) : nodes_(nodes) {}

  std::size_t node_count() const noexcept { return nodes_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::set<Edge>& edges() const noexcept { return edges_; }

  void add_edge(std::size_t from, std::size_t to);
  void remove_edge(std::size_t from, std::size_t to) { edges_.erase({from, to}); }
  bool has_edge(std::size_t from, std::size_t to) const { return edges_.contains({from, to}); }

  std::vector<std::size_t> parents(std::size_t node) const;
  std::vector<std::size_t> children(std::size_t node) const;

  /// Kahn's algorithm, smallest available index first; nullopt on a cycle.
  std::optional<std::vector<std::size_t>> topological_sort() const;
  bool is_acyclic() const { return topological_sort().has_value(); }

  friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

 private:
  std::size_t nodes_;
  std::set<Edge> edges_;
};

/// Number of unordered node pairs whose edge status differs (missing, extra
/// or reversed edge each count once).
std::size_t structural_hamming_distance(const DirectedGraph& a, const DirectedGraph& b);

}  // namespace climatescope
