// Operator abstraction: maps on R^n with optional certified regularity
// (non-expansive / averaged / contractive / Lipschitz), plus the relaxation
// and composition combinators and sampling-based certificate checks.
//
// Certificates are claims carried by construction rules; the sampling checks
// can falsify them but never prove them.
#pragma once

#include <functional>
#include <utility>

#include "opsim/random.hpp"

namespace opsim {

struct OperatorProperty {
  enum class Kind { unknown, nonexpansive, averaged, contractive, lipschitz };

  Kind kind = Kind::unknown;
  double constant = 0.0;  // averaged: alpha in (0,1); contractive: zeta in [0,1); lipschitz: zeta >= 0

  static OperatorProperty unknown() { return {}; }
  static OperatorProperty nonexpansive() { return {Kind::nonexpansive, 1.0}; }
  static OperatorProperty averaged(double alpha);
  static OperatorProperty contractive(double zeta);
  static OperatorProperty lipschitz(double zeta);

  bool is(Kind k) const { return kind == k; }

  /// Best certified Lipschitz bound, or +inf when nothing is certified.
  double lipschitz_bound() const;
};

class Operator {
 public:
  using EvalFn = std::function<Vec(const Vec&)>;

  Operator(int dim, EvalFn eval, OperatorProperty property = {});

  int dim() const { return dim_; }
  const OperatorProperty& property() const { return property_; }

  /// Evaluate; throws std::invalid_argument on dimension mismatch and
  /// DivergenceError if the image is non-finite.
  Vec operator()(const Vec& x) const;

  /// Same operator with a replacement certificate.
  Operator with_property(OperatorProperty p) const { return Operator(dim_, eval_, p); }

 private:
  int dim_;
  EvalFn eval_;
  OperatorProperty property_;
};

Operator identity_op(int dim);

/// x -> A x; no certificate is attached (callers tag what they know).
Operator linear_op(Mat A, OperatorProperty property = {});

/// x -> A x + b.
Operator affine_op(Mat A, Vec b, OperatorProperty property = {});

/// (1-alpha) I + alpha T, alpha in (0,1). Certificates propagate:
/// non-expansive -> averaged(alpha), averaged(beta) -> averaged(alpha*beta),
/// Lipschitz-type zeta -> (1-alpha) + alpha*zeta.
Operator relax(const Operator& T, double alpha);

/// x -> outer(inner(x)). Lipschitz-type constants multiply; the composition
/// of averaged operators is averaged with the standard combined constant.
Operator compose(const Operator& outer, const Operator& inner);

/// Distribution over vector pairs used by the sampling checks.
using PairSampler = std::function<std::pair<Vec, Vec>(Rng&)>;

/// Independent N(0, scale^2) coordinates for both points.
PairSampler gaussian_pair_sampler(int dim, double scale = 1.0);

/// One gaussian anchor plus a point at distance `radius` in a uniformly random
/// direction; resolves the extremal directions of homogeneous maps much faster
/// than two independent gaussians.
PairSampler directional_pair_sampler(int dim, double radius = 1.0);

/// max ||T(x)-T(y)|| / ||x-y|| over sampled pairs — a lower bound on the true
/// constant. Coincident pairs are skipped; throws SolveError if all coincide.
double estimate_lipschitz(const Operator& T, const PairSampler& sampler, int n_samples,
                          std::uint64_t seed);

struct AveragedCheck {
  bool holds = false;
  double worst_violation = 0.0;  // max over samples of lhs - rhs (<= slack when holds)
};

/// Sampling check of the averagedness inequality
///   ||Tx-Ty||^2 <= ||x-y||^2 - (1-a)/a ||(I-T)x-(I-T)y||^2
/// with 1e-10 slack.
AveragedCheck check_averaged(const Operator& T, double alpha, const PairSampler& sampler,
                             int n_samples, std::uint64_t seed);

}  // namespace opsim
