#include "opsim/reference.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "opsim/errors.hpp"

namespace opsim {

namespace {

struct AffineGradient {
  Mat hessian;
  Vec offset;  // grad f(x) = hessian * x - offset
};

// Probe whether the summed gradient is affine (quadratic-family costs); if so
// return its normal system.
std::optional<AffineGradient> probe_affine(const std::vector<CostFunction>& costs) {
  const int n = costs.front().dim();
  auto grad_sum = [&costs, n](const Vec& x) {
    Vec g = Vec::Zero(n);
    for (const auto& c : costs) g += c.gradient(x);
    return g;
  };
  const Vec g0 = grad_sum(Vec::Zero(n));
  Mat H(n, n);
  for (int j = 0; j < n; ++j) H.col(j) = grad_sum(Vec::Unit(n, j)) - g0;
  // Linearity check at an uneven probe point.
  Vec t(n);
  for (int j = 0; j < n; ++j) t[j] = 0.5 + 0.25 * double(j % 3);
  const Vec predicted = H * t + g0;
  const Vec actual = grad_sum(t);
  if ((predicted - actual).norm() > 1e-9 * (1.0 + actual.norm())) return std::nullopt;
  return AffineGradient{std::move(H), Vec(-g0)};
}

}  // namespace

ReferenceSolution solve_reference(const std::vector<CostFunction>& costs) {
  if (costs.empty()) throw std::invalid_argument("solve_reference: no costs");
  const int n = costs.front().dim();
  for (const auto& c : costs) {
    if (c.dim() != n) throw std::invalid_argument("solve_reference: cost dimensions disagree");
    if (!c.has_gradient())
      throw std::invalid_argument("solve_reference: cost '" + c.name() + "' has no gradient");
  }
  constexpr double kTol = 1e-10;

  auto grad_sum = [&costs, n](const Vec& x) {
    Vec g = Vec::Zero(n);
    for (const auto& c : costs) g += c.gradient(x);
    return g;
  };
  auto value_sum = [&costs](const Vec& x) {
    double v = 0.0;
    for (const auto& c : costs) v += c.value(x);
    return v;
  };

  if (auto affine = probe_affine(costs)) {
    Vec x = affine->hessian.ldlt().solve(affine->offset);
    const double res = grad_sum(x).norm();
    if (res <= kTol) return {std::move(x), "closed_form", res};
    // Singular normal system (merely convex quadratic); fall through to descent.
  }

  constexpr long kMaxIter = 1000000;
  Vec x = Vec::Zero(n);
  double fx = value_sum(x);
  for (long it = 0; it < kMaxIter; ++it) {
    const Vec g = grad_sum(x);
    const double gnorm = g.norm();
    if (gnorm <= kTol) return {std::move(x), "centralized_descent", gnorm};
    // Armijo backtracking.
    double t = 1.0;
    const double slope = -0.5 * gnorm * gnorm;
    while (t > 1e-18 && value_sum(x - t * g) > fx + t * slope) t *= 0.5;
    if (t <= 1e-18) throw SolveError("solve_reference: line search stalled");
    x -= t * g;
    fx = value_sum(x);
  }
  throw SolveError("solve_reference: descent did not reach tolerance");
}

}  // namespace opsim
