#include "opsim/cost.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "opsim/errors.hpp"

namespace opsim {

namespace {

// Minimize f(x) + ||x - y||^2 / (2 rho) by fixed-step gradient descent. The
// objective is (1/rho)-strongly convex, so with declared smoothness the step
// 2/(L + mu) gives a linear rate.
Vec prox_by_inner_descent(const CostFunction& f, const Vec& y, double rho) {
  constexpr double kTol = 1e-10;
  constexpr int kMaxSteps = 100000;
  const double mu = 1.0 / rho + f.strong_convexity().value_or(0.0);
  const double lip = f.smoothness().value_or(0.0) + 1.0 / rho;
  const double step = 2.0 / (lip + mu);
  Vec x = y;
  for (int it = 0; it < kMaxSteps; ++it) {
    const Vec g = f.gradient(x) + (x - y) / rho;
    if (g.norm() <= kTol) return x;
    x -= step * g;
    if (!x.allFinite()) throw SolveError("prox inner solver diverged on " + f.name());
  }
  throw SolveError("prox inner solver did not converge on " + f.name());
}

}  // namespace

CostFunction::CostFunction(Parts parts) : parts_(std::move(parts)) {
  if (parts_.dim <= 0) throw std::invalid_argument("CostFunction: dim must be positive");
  if (!parts_.value) throw std::invalid_argument("CostFunction: value must be callable");
  if (parts_.smoothness && *parts_.smoothness < 0.0)
    throw std::invalid_argument("CostFunction: smoothness must be non-negative");
  if (parts_.strong_convexity && *parts_.strong_convexity < 0.0)
    throw std::invalid_argument("CostFunction: strong_convexity must be non-negative");
}

double CostFunction::value(const Vec& x) const {
  if (x.size() != dim()) throw std::invalid_argument("CostFunction::value: dimension mismatch");
  return parts_.value(x);
}

Vec CostFunction::gradient(const Vec& x) const {
  if (!parts_.gradient)
    throw std::invalid_argument("CostFunction '" + name() + "' has no gradient");
  if (x.size() != dim()) throw std::invalid_argument("CostFunction::gradient: dimension mismatch");
  return parts_.gradient(x);
}

Vec CostFunction::prox(const Vec& y, double rho) const {
  if (!(rho > 0.0)) throw std::invalid_argument("prox: rho must be positive");
  if (y.size() != dim()) throw std::invalid_argument("prox: dimension mismatch");
  if (parts_.prox) return parts_.prox(y, rho);
  if (!parts_.gradient)
    throw std::invalid_argument("CostFunction '" + name() +
                                "' has neither a closed-form prox nor a gradient");
  return prox_by_inner_descent(*this, y, rho);
}

CompositeProblem::CompositeProblem(CostFunction f_in, CostFunction g_in)
    : f(std::move(f_in)), g(std::move(g_in)) {
  if (f.dim() != g.dim()) throw std::invalid_argument("CompositeProblem: dims disagree");
}

Operator gradient_step_op(const CostFunction& f, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("gradient_step_op: rho must be positive");
  if (!f.has_gradient())
    throw std::invalid_argument("gradient_step_op: '" + f.name() + "' has no gradient");

  OperatorProperty prop = OperatorProperty::unknown();
  if (f.smoothness()) {
    const double smooth = *f.smoothness();
    if (smooth > 0.0 && rho >= 2.0 / smooth)
      std::cerr << "warning: gradient_step_op on '" << f.name() << "': rho = " << rho
                << " is outside (0, 2/smoothness); no certificate attached\n";
    if (smooth == 0.0) {
      prop = OperatorProperty::nonexpansive();  // constant gradient: a translation
    } else if (rho < 2.0 / smooth) {
      const double sc = f.strong_convexity().value_or(0.0);
      if (sc > 0.0) {
        prop = OperatorProperty::contractive(
            std::max(std::abs(1.0 - rho * sc), std::abs(1.0 - rho * smooth)));
      } else {
        prop = OperatorProperty::averaged(rho * smooth / 2.0);
      }
    }
  }
  return Operator(
      f.dim(), [f, rho](const Vec& x) -> Vec { return x - rho * f.gradient(x); }, prop);
}

Operator prox_op(const CostFunction& f, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("prox_op: rho must be positive");
  const double sc = f.strong_convexity().value_or(0.0);
  OperatorProperty prop = sc > 0.0 ? OperatorProperty::contractive(1.0 / (1.0 + rho * sc))
                                   : OperatorProperty::averaged(0.5);
  return Operator(f.dim(), [f, rho](const Vec& y) -> Vec { return f.prox(y, rho); }, prop);
}

Operator refl_op(const CostFunction& f, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("refl_op: rho must be positive");
  const double sc = f.strong_convexity().value_or(0.0);
  OperatorProperty prop = OperatorProperty::nonexpansive();
  if (sc > 0.0 && f.smoothness() && *f.smoothness() > 0.0) {
    const double smooth = *f.smoothness();
    prop = OperatorProperty::contractive(std::max((rho * smooth - 1.0) / (rho * smooth + 1.0),
                                                  (1.0 - rho * sc) / (1.0 + rho * sc)));
  }
  return Operator(
      f.dim(), [f, rho](const Vec& y) -> Vec { return 2.0 * f.prox(y, rho) - y; }, prop);
}

Operator prox_grad_op(const CompositeProblem& p, double rho) {
  if (!p.f.smoothness())
    throw std::invalid_argument("prox_grad_op: smooth part has no declared smoothness");
  const double smooth = *p.f.smoothness();
  if (smooth > 0.0 && !(rho < 2.0 / smooth))
    throw std::invalid_argument("prox_grad_op: rho must lie in (0, 2/smoothness)");
  return compose(prox_op(p.g, rho), gradient_step_op(p.f, rho));
}

PeacemanRachford::PeacemanRachford(const CompositeProblem& p, double rho, double alpha)
    : op_(identity_op(p.dim())), f_(p.f), rho_(rho) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("peaceman_rachford_op: alpha must be in (0,1]");
  const Operator prs = compose(refl_op(p.g, rho), refl_op(p.f, rho));
  if (alpha == 1.0) {
    if (!prs.property().is(OperatorProperty::Kind::contractive))
      throw std::invalid_argument(
          "peaceman_rachford_op: alpha = 1 needs a contractiveness certificate");
    op_ = prs;
  } else {
    op_ = relax(prs, alpha);
  }
}

Vec PeacemanRachford::recover_primal(const Vec& z) const { return f_.prox(z, rho_); }

PeacemanRachford peaceman_rachford_op(const CompositeProblem& p, double rho, double alpha) {
  return PeacemanRachford(p, rho, alpha);
}

}  // namespace opsim
