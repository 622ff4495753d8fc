// Cost-function abstraction (value / gradient / prox with declared curvature
// constants) and the concrete first-order operators built from it: gradient
// step, proximal, reflective, proximal-gradient, Peaceman-Rachford.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "opsim/operator.hpp"

namespace opsim {

class CostFunction {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;
  using ProxFn = std::function<Vec(const Vec&, double)>;  // (y, rho) -> argmin f + ||.-y||^2/(2 rho)

  struct Parts {
    int dim = 0;
    std::string name;
    ValueFn value;
    GradientFn gradient;              // null when f is non-smooth
    ProxFn prox;                      // null -> generic inner solver (needs gradient)
    std::optional<double> smoothness;        // Lipschitz constant of the gradient
    std::optional<double> strong_convexity;  // 0 means merely convex
  };

  explicit CostFunction(Parts parts);

  int dim() const { return parts_.dim; }
  const std::string& name() const { return parts_.name; }

  double value(const Vec& x) const;

  bool has_gradient() const { return static_cast<bool>(parts_.gradient); }
  Vec gradient(const Vec& x) const;

  bool has_closed_form_prox() const { return static_cast<bool>(parts_.prox); }

  /// prox_{rho f}(y). Falls back to an inner gradient solve (tolerance 1e-10,
  /// at most 1e5 steps) when no closed form is attached; throws SolveError on
  /// non-convergence and std::invalid_argument when that path has no gradient.
  Vec prox(const Vec& y, double rho) const;

  std::optional<double> smoothness() const { return parts_.smoothness; }
  std::optional<double> strong_convexity() const { return parts_.strong_convexity; }

 private:
  Parts parts_;
};

struct CompositeProblem {
  CostFunction f;  // smooth part
  CostFunction g;  // possibly non-smooth part

  CompositeProblem(CostFunction f_in, CostFunction g_in);
  int dim() const { return f.dim(); }
};

/// x -> x - rho grad f(x). Averaged(rho*lambda/2) when rho < 2/smoothness;
/// additionally contractive with max(|1-rho*sc|, |1-rho*smooth|) when f is
/// strongly convex.
Operator gradient_step_op(const CostFunction& f, double rho);

/// y -> prox_{rho f}(y); averaged(1/2), contractive 1/(1+rho*sc) under strong
/// convexity.
Operator prox_op(const CostFunction& f, double rho);

/// y -> 2 prox_{rho f}(y) - y; non-expansive, contractive when both curvature
/// constants are declared.
Operator refl_op(const CostFunction& f, double rho);

/// prox_{rho g} o (I - rho grad f), rho in (0, 2/smoothness(f)).
Operator prox_grad_op(const CompositeProblem& p, double rho);

/// Relaxed Peaceman-Rachford operator on the auxiliary variable z, with the
/// accessor recovering the primal point x = prox_{rho f}(z).
class PeacemanRachford {
 public:
  PeacemanRachford(const CompositeProblem& p, double rho, double alpha);

  const Operator& op() const { return op_; }
  Vec recover_primal(const Vec& z) const;
  double rho() const { return rho_; }

 private:
  Operator op_;
  CostFunction f_;
  double rho_;
};

PeacemanRachford peaceman_rachford_op(const CompositeProblem& p, double rho, double alpha);

}  // namespace opsim
