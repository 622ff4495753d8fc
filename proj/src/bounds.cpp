#include "opsim/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace opsim {

namespace {

void record(BoundCheck& check, double violation, int k, double slack) {
  if (violation > check.worst_violation) {
    check.worst_violation = violation;
    check.worst_index = k;
  }
  if (violation > slack) check.holds = false;
}

}  // namespace

BoundCheck check_km_residual_bound(const IterationTrace& trace, double alpha, const Vec& xbar,
                                   double slack) {
  if (trace.iterates.empty()) throw std::invalid_argument("empty trace");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  const double d0 = (trace.iterates.front() - xbar).norm();
  const double c = std::sqrt(alpha / (1.0 - alpha)) * d0;
  BoundCheck check;
  for (std::size_t k = 0; k < trace.residuals.size(); ++k)
    record(check, trace.residuals[k] - c / std::sqrt(double(k) + 1.0), int(k), slack);
  return check;
}

BoundCheck check_picard_distance_bound(const IterationTrace& trace, double zeta, double slack) {
  if (!trace.distances) throw std::invalid_argument("trace has no reference distances");
  if (!(zeta >= 0.0 && zeta < 1.0)) throw std::invalid_argument("zeta must be in [0,1)");
  const auto& d = *trace.distances;
  BoundCheck check;
  double allowed = d.empty() ? 0.0 : d.front();
  for (std::size_t k = 0; k < d.size(); ++k) {
    record(check, d[k] - allowed, int(k), slack);
    allowed *= zeta;
  }
  return check;
}

BoundCheck check_lyapunov_monotone(const IterationTrace& trace, double slack) {
  if (!trace.distances) throw std::invalid_argument("trace has no reference distances");
  const auto& d = *trace.distances;
  BoundCheck check;
  for (std::size_t k = 1; k < d.size(); ++k) record(check, d[k] - d[k - 1], int(k), slack);
  return check;
}

}  // namespace opsim
