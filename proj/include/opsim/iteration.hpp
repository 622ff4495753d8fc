// Fixed-point iterations and their traces.
#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "opsim/operator.hpp"

namespace opsim {

/// Record of a fixed-point run: iterates x_k, residuals ||x_k - T(x_k)||,
/// and distances ||x_k - xbar|| when a reference fixed point was supplied.
struct IterationTrace {
  std::vector<Vec> iterates;
  std::vector<double> residuals;
  std::optional<std::vector<double>> distances;

  int steps() const { return static_cast<int>(iterates.size()) - 1; }
  const Vec& last() const { return iterates.back(); }

  /// CSV with columns k,residual,distance_to_fix (last column empty when no
  /// reference point was supplied).
  void write_csv(std::ostream& os) const;
};

struct IterateOptions {
  int max_iter = 1000;
  double tol = 1e-10;
  std::optional<Vec> reference;  // known fixed point, for distance tracking
};

/// Krasnosel'skii-Mann iteration x_{k+1} = (1-alpha) x_k + alpha T(x_k).
/// Stops at max_iter or when the fixed-point residual drops to tol.
IterationTrace km_iterate(const Operator& T, const Vec& x0, double alpha,
                          const IterateOptions& opts);

/// Banach-Picard iteration x_{k+1} = T(x_k) for contractive maps.
IterationTrace picard_iterate(const Operator& T, const Vec& x0, const IterateOptions& opts);

}  // namespace opsim
