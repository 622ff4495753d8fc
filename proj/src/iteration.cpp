#include "opsim/iteration.hpp"

#include <cstdio>
#include <stdexcept>

#include "opsim/errors.hpp"
#include "opsim/format.hpp"

namespace opsim {

namespace {

void check_in_bounds(const Vec& x) {
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() > divergence_limit())
    throw DivergenceError("iteration diverged");
}

// Shared driver: next_point computes x_{k+1} from (x_k, T(x_k)).
template <typename NextFn>
IterationTrace iterate_impl(const Operator& T, const Vec& x0, const IterateOptions& opts,
                            NextFn next_point) {
  if (x0.size() != T.dim()) throw std::invalid_argument("iterate: dimension mismatch");
  if (opts.max_iter < 1) throw std::invalid_argument("iterate: max_iter must be positive");
  if (opts.tol < 0.0) throw std::invalid_argument("iterate: tol must be non-negative");
  if (opts.reference && opts.reference->size() != T.dim())
    throw std::invalid_argument("iterate: reference dimension mismatch");

  IterationTrace trace;
  if (opts.reference) trace.distances.emplace();
  Vec x = x0;
  check_in_bounds(x);
  for (int k = 0;; ++k) {
    const Vec tx = T(x);
    const double residual = (x - tx).norm();
    trace.iterates.push_back(x);
    trace.residuals.push_back(residual);
    if (opts.reference) trace.distances->push_back((x - *opts.reference).norm());
    if (residual <= opts.tol || k == opts.max_iter) break;
    x = next_point(x, tx);
    check_in_bounds(x);
  }
  return trace;
}

}  // namespace

void IterationTrace::write_csv(std::ostream& os) const {
  os << "k,residual,distance_to_fix\n";
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    os << k << ',' << fmt_double(residuals[k]) << ',';
    if (distances) os << fmt_double((*distances)[k]);
    os << '\n';
  }
}

IterationTrace km_iterate(const Operator& T, const Vec& x0, double alpha,
                          const IterateOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("km_iterate: alpha must be in (0,1)");
  return iterate_impl(T, x0, opts, [alpha](const Vec& x, const Vec& tx) -> Vec {
    return (1.0 - alpha) * x + alpha * tx;
  });
}

IterationTrace picard_iterate(const Operator& T, const Vec& x0, const IterateOptions& opts) {
  return iterate_impl(T, x0, opts, [](const Vec&, const Vec& tx) -> Vec { return tx; });
}

}  // namespace opsim
