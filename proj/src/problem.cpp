#include "opsim/problem.hpp"

#include <stdexcept>

namespace opsim {

ConsensusProblem::ConsensusProblem(std::vector<CostFunction> costs, ConsensusMatrix network,
                                   std::optional<Vec> reference)
    : costs_(std::move(costs)), network_(std::move(network)) {
  if (costs_.empty()) throw std::invalid_argument("ConsensusProblem: no costs");
  for (const auto& c : costs_)
    if (c.dim() != costs_.front().dim())
      throw std::invalid_argument("ConsensusProblem: cost dimensions disagree");
  if (network_.n_agents() != n_agents())
    throw std::invalid_argument("ConsensusProblem: network size does not match cost count");
  if (reference) set_reference(std::move(*reference));
}

void ConsensusProblem::set_reference(Vec x_star) {
  if (x_star.size() != block_dim())
    throw std::invalid_argument("ConsensusProblem: reference dimension mismatch");
  if (all_smooth()) {
    Vec g = Vec::Zero(block_dim());
    for (const auto& c : costs_) g += c.gradient(x_star);
    if (g.norm() > 1e-8)
      throw std::invalid_argument("ConsensusProblem: reference is not a stationary point");
  }
  reference_ = std::move(x_star);
}

bool ConsensusProblem::all_smooth() const {
  for (const auto& c : costs_)
    if (!c.has_gradient()) return false;
  return true;
}

double ConsensusProblem::max_smoothness() const {
  double out = 0.0;
  for (const auto& c : costs_) {
    if (!c.smoothness())
      throw std::invalid_argument("ConsensusProblem: cost '" + c.name() +
                                  "' has no declared smoothness");
    out = std::max(out, *c.smoothness());
  }
  return out;
}

Vec ConsensusProblem::stacked_gradient(const Vec& x) const {
  if (x.size() != stacked_dim())
    throw std::invalid_argument("stacked_gradient: dimension mismatch");
  const int n = block_dim();
  Vec g(x.size());
  for (int i = 0; i < n_agents(); ++i)
    g.segment(Eigen::Index(i) * n, n) = costs_[i].gradient(x.segment(Eigen::Index(i) * n, n));
  return g;
}

Vec ConsensusProblem::stack(const Vec& per_agent_value) const {
  if (per_agent_value.size() != block_dim()) throw std::invalid_argument("stack: dimension mismatch");
  Vec out(stacked_dim());
  for (int i = 0; i < n_agents(); ++i)
    out.segment(Eigen::Index(i) * block_dim(), block_dim()) = per_agent_value;
  return out;
}

}  // namespace opsim
