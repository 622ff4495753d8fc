// Undirected connected graphs: generators, edge-list file IO, neighbor sets.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace opsim {

/// Undirected graph over agents 0..N-1. Always connected, no self-loops, no
/// duplicate edges (enforced at construction).
class Graph {
 public:
  static Graph from_edges(int n_agents, std::vector<std::pair<int, int>> edges);
  static Graph ring(int n_agents);
  static Graph path(int n_agents);
  static Graph complete(int n_agents);

  /// G(n, p) with rejection-resampling until connected.
  static Graph random_gnp(int n_agents, double edge_prob, std::uint64_t seed);

  /// Text file: first line N, then one `i j` pair per line (0-based).
  static Graph load_edge_list(const std::string& path);

  int n_agents() const { return n_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  /// Edges as (i, j) with i < j, lexicographically sorted.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  /// Sorted neighbor list of agent i.
  const std::vector<int>& neighbors(int i) const { return neighbors_.at(i); }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

 private:
  Graph(int n, std::vector<std::pair<int, int>> edges);

  int n_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> neighbors_;
};

}  // namespace opsim
