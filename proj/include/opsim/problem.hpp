// Consensus optimization problem: one cost per agent over a shared dimension,
// a network, and an optional reference solution.
#pragma once

#include <optional>
#include <vector>

#include "opsim/consensus.hpp"
#include "opsim/cost.hpp"

namespace opsim {

class ConsensusProblem {
 public:
  ConsensusProblem(std::vector<CostFunction> costs, ConsensusMatrix network,
                   std::optional<Vec> reference = std::nullopt);

  int n_agents() const { return static_cast<int>(costs_.size()); }
  int block_dim() const { return costs_.front().dim(); }
  int stacked_dim() const { return n_agents() * block_dim(); }

  const std::vector<CostFunction>& costs() const { return costs_; }
  const CostFunction& cost(int i) const { return costs_.at(i); }
  const ConsensusMatrix& network() const { return network_; }
  const Graph& graph() const { return network_.graph; }

  /// Reference solution x*; validated (sum-gradient residual <= 1e-8) when the
  /// costs are smooth.
  const std::optional<Vec>& reference() const { return reference_; }
  void set_reference(Vec x_star);

  bool all_smooth() const;
  /// Lipschitz constant of the stacked gradient = max over agents; throws when
  /// some agent has no declared smoothness.
  double max_smoothness() const;

  /// Blockwise gradient of f(x) = sum_i f_i(x_i) on a stacked vector.
  Vec stacked_gradient(const Vec& x) const;

  Vec stack(const Vec& per_agent_value) const;  // repeat one block N times

 private:
  std::vector<CostFunction> costs_;
  ConsensusMatrix network_;
  std::optional<Vec> reference_;
};

}  // namespace opsim
