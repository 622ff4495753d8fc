#include "opsim/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "opsim/random.hpp"

namespace opsim {

namespace {

bool is_connected(int n, const std::vector<std::vector<int>>& neighbors) {
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : neighbors[v])
      if (!seen[u]) {
        seen[u] = true;
        ++count;
        stack.push_back(u);
      }
  }
  return count == n;
}

}  // namespace

Graph::Graph(int n, std::vector<std::pair<int, int>> edges)
    : n_(n), edges_(std::move(edges)), neighbors_(n) {
  for (auto& [i, j] : edges_) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n_ || i == j) throw std::invalid_argument("Graph: invalid edge");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw std::invalid_argument("Graph: duplicate edge");
  for (auto [i, j] : edges_) {
    neighbors_[i].push_back(j);
    neighbors_[j].push_back(i);
  }
  for (auto& list : neighbors_) std::sort(list.begin(), list.end());
  if (n_ <= 0) throw std::invalid_argument("Graph: need at least one agent");
  if (n_ > 1 && !is_connected(n_, neighbors_)) throw std::invalid_argument("Graph: not connected");
}

Graph Graph::from_edges(int n_agents, std::vector<std::pair<int, int>> edges) {
  return Graph(n_agents, std::move(edges));
}

Graph Graph::ring(int n_agents) {
  if (n_agents < 3) throw std::invalid_argument("ring: need at least 3 agents");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n_agents; ++i) edges.emplace_back(i, (i + 1) % n_agents);
  return Graph(n_agents, std::move(edges));
}

Graph Graph::path(int n_agents) {
  if (n_agents < 2) throw std::invalid_argument("path: need at least 2 agents");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n_agents; ++i) edges.emplace_back(i, i + 1);
  return Graph(n_agents, std::move(edges));
}

Graph Graph::complete(int n_agents) {
  if (n_agents < 2) throw std::invalid_argument("complete: need at least 2 agents");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n_agents; ++i)
    for (int j = i + 1; j < n_agents; ++j) edges.emplace_back(i, j);
  return Graph(n_agents, std::move(edges));
}

Graph Graph::random_gnp(int n_agents, double edge_prob, std::uint64_t seed) {
  if (n_agents < 2) throw std::invalid_argument("random_gnp: need at least 2 agents");
  if (!(edge_prob > 0.0 && edge_prob <= 1.0))
    throw std::invalid_argument("random_gnp: edge_prob must be in (0,1]");
  Rng rng(seed);
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n_agents; ++i)
      for (int j = i + 1; j < n_agents; ++j)
        if (rng.bernoulli(edge_prob)) edges.emplace_back(i, j);
    try {
      return Graph(n_agents, std::move(edges));
    } catch (const std::invalid_argument&) {
      // disconnected sample; draw again
    }
  }
  throw std::runtime_error("random_gnp: failed to sample a connected graph");
}

Graph Graph::load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  int n = 0;
  if (!(in >> n)) throw std::runtime_error("edge list missing agent count: " + path);
  std::vector<std::pair<int, int>> edges;
  int i, j;
  while (in >> i >> j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

}  // namespace opsim
