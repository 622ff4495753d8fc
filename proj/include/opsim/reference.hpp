// Centralized reference solution of min_x sum_i f_i(x).
#pragma once

#include <string>

#include "opsim/problem.hpp"

namespace opsim {

struct ReferenceSolution {
  Vec x_star;
  std::string method;  // "closed_form" or "centralized_descent"
  double residual = 0.0;  // ||sum_i grad f_i(x_star)||
};

/// Closed form for quadratic-family costs (normal system), otherwise
/// centralized gradient descent with backtracking to residual 1e-10.
/// Throws SolveError after 1e6 iterations without convergence.
ReferenceSolution solve_reference(const std::vector<CostFunction>& costs);

inline ReferenceSolution solve_reference(const ConsensusProblem& p) {
  return solve_reference(p.costs());
}

}  // namespace opsim
