// Monitors asserting the convergence bounds on recorded traces. These are
// necessary-condition checks on sampled trajectories, not proofs.
#pragma once

#include "opsim/iteration.hpp"

namespace opsim {

struct BoundCheck {
  bool holds = true;
  double worst_violation = 0.0;  // max over k of measured - allowed
  int worst_index = -1;
};

/// KM residual bound for a non-expansive T with fixed point xbar:
///   ||x_k - T(x_k)|| <= sqrt(alpha/(1-alpha)) ||x_0 - xbar|| / sqrt(k+1).
BoundCheck check_km_residual_bound(const IterationTrace& trace, double alpha, const Vec& xbar,
                                   double slack = 1e-9);

/// Picard contraction bound: ||x_k - xbar|| <= zeta^k ||x_0 - xbar||.
/// Requires the trace to carry distances to the reference point.
BoundCheck check_picard_distance_bound(const IterationTrace& trace, double zeta,
                                       double slack = 1e-9);

/// Distance to a fixed point is non-increasing along KM traces of a
/// non-expansive operator (squared distance is a Lyapunov function).
BoundCheck check_lyapunov_monotone(const IterationTrace& trace, double slack = 1e-12);

}  // namespace opsim
