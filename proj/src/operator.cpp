#include "opsim/operator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "opsim/errors.hpp"

namespace opsim {

OperatorProperty OperatorProperty::averaged(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("averaged: alpha must be in (0,1)");
  return {Kind::averaged, alpha};
}

OperatorProperty OperatorProperty::contractive(double zeta) {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw std::invalid_argument("contractive: zeta must be in [0,1)");
  return {Kind::contractive, zeta};
}

OperatorProperty OperatorProperty::lipschitz(double zeta) {
  if (!(zeta >= 0.0)) throw std::invalid_argument("lipschitz: zeta must be >= 0");
  return {Kind::lipschitz, zeta};
}

double OperatorProperty::lipschitz_bound() const {
  switch (kind) {
    case Kind::nonexpansive:
    case Kind::averaged:
      return 1.0;
    case Kind::contractive:
    case Kind::lipschitz:
      return constant;
    case Kind::unknown:
      return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

Operator::Operator(int dim, EvalFn eval, OperatorProperty property)
    : dim_(dim), eval_(std::move(eval)), property_(property) {
  if (dim_ <= 0) throw std::invalid_argument("Operator: dim must be positive");
  if (!eval_) throw std::invalid_argument("Operator: eval must be callable");
}

Vec Operator::operator()(const Vec& x) const {
  if (x.size() != dim_) throw std::invalid_argument("Operator: dimension mismatch");
  Vec y = eval_(x);
  if (y.size() != dim_) throw std::invalid_argument("Operator: eval changed dimension");
  if (!y.allFinite()) throw DivergenceError("Operator produced a non-finite value");
  return y;
}

Operator identity_op(int dim) {
  return Operator(dim, [](const Vec& x) { return x; }, OperatorProperty::nonexpansive());
}

Operator linear_op(Mat A, OperatorProperty property) {
  if (A.rows() != A.cols()) throw std::invalid_argument("linear_op: matrix must be square");
  const int n = static_cast<int>(A.rows());
  return Operator(n, [A = std::move(A)](const Vec& x) -> Vec { return A * x; }, property);
}

Operator affine_op(Mat A, Vec b, OperatorProperty property) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw std::invalid_argument("affine_op: incompatible shapes");
  const int n = static_cast<int>(A.rows());
  return Operator(
      n, [A = std::move(A), b = std::move(b)](const Vec& x) -> Vec { return A * x + b; }, property);
}

namespace {

OperatorProperty relax_property(const OperatorProperty& p, double alpha) {
  using Kind = OperatorProperty::Kind;
  switch (p.kind) {
    case Kind::nonexpansive:
      return OperatorProperty::averaged(alpha);
    case Kind::averaged:
      return OperatorProperty::averaged(alpha * p.constant);
    case Kind::contractive:
      return OperatorProperty::contractive((1.0 - alpha) + alpha * p.constant);
    case Kind::lipschitz: {
      const double zeta = (1.0 - alpha) + alpha * p.constant;
      return zeta < 1.0 ? OperatorProperty::contractive(zeta) : OperatorProperty::lipschitz(zeta);
    }
    case Kind::unknown:
      return OperatorProperty::unknown();
  }
  return OperatorProperty::unknown();
}

OperatorProperty compose_property(const OperatorProperty& a, const OperatorProperty& b) {
  using Kind = OperatorProperty::Kind;
  if (a.kind == Kind::unknown || b.kind == Kind::unknown) return OperatorProperty::unknown();
  // Composition of averaged operators is averaged with the combined constant.
  if (a.kind == Kind::averaged && b.kind == Kind::averaged) {
    const double a1 = a.constant, a2 = b.constant;
    return OperatorProperty::averaged((a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2));
  }
  const double zeta = a.lipschitz_bound() * b.lipschitz_bound();
  if (zeta < 1.0) return OperatorProperty::contractive(zeta);
  if (zeta == 1.0) return OperatorProperty::nonexpansive();
  return OperatorProperty::lipschitz(zeta);
}

}  // namespace

Operator relax(const Operator& T, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("relax: alpha must be in (0,1)");
  return Operator(
      T.dim(),
      [T, alpha](const Vec& x) -> Vec { return (1.0 - alpha) * x + alpha * T(x); },
      relax_property(T.property(), alpha));
}

Operator compose(const Operator& outer, const Operator& inner) {
  if (outer.dim() != inner.dim()) throw std::invalid_argument("compose: dimension mismatch");
  return Operator(
      outer.dim(), [outer, inner](const Vec& x) -> Vec { return outer(inner(x)); },
      compose_property(outer.property(), inner.property()));
}

PairSampler gaussian_pair_sampler(int dim, double scale) {
  return [dim, scale](Rng& rng) {
    return std::make_pair(Vec(scale * rng.gaussian_vector(dim)),
                          Vec(scale * rng.gaussian_vector(dim)));
  };
}

PairSampler directional_pair_sampler(int dim, double radius) {
  return [dim, radius](Rng& rng) {
    Vec x = rng.gaussian_vector(dim);
    Vec y = x + radius * rng.unit_sphere(dim);
    return std::make_pair(std::move(x), std::move(y));
  };
}

double estimate_lipschitz(const Operator& T, const PairSampler& sampler, int n_samples,
                          std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("estimate_lipschitz: n_samples must be >= 1");
  Rng rng(seed);
  double best = 0.0;
  int used = 0;
  for (int s = 0; s < n_samples; ++s) {
    auto [x, y] = sampler(rng);
    const double d = (x - y).norm();
    if (d < 1e-14 * (1.0 + x.norm())) continue;  // coincident pair
    best = std::max(best, (T(x) - T(y)).norm() / d);
    ++used;
  }
  if (used == 0) throw SolveError("estimate_lipschitz: all sampled pairs coincide");
  return best;
}

AveragedCheck check_averaged(const Operator& T, double alpha, const PairSampler& sampler,
                             int n_samples, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("check_averaged: alpha must be in (0,1)");
  constexpr double kSlack = 1e-10;
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    auto [x, y] = sampler(rng);
    const Vec tx = T(x), ty = T(y);
    const double lhs = (tx - ty).squaredNorm();
    const double rhs =
        (x - y).squaredNorm() - (1.0 - alpha) / alpha * ((x - tx) - (y - ty)).squaredNorm();
    worst = std::max(worst, lhs - rhs);
  }
  return {worst <= kSlack, worst};
}

}  // namespace opsim
