#include <doctest.h>

#include "opsim/algorithms.hpp"
#include "opsim/catalog.hpp"
#include "opsim/cost.hpp"
#include "opsim/errors.hpp"
#include "opsim/iteration.hpp"
#include "oracles.hpp"

using namespace opsim;

namespace {

Vec scalar(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

CostFunction halfline_indicator() {
  // indicator of {x <= 0}; prox is the one-sided projection
  CostFunction::Parts parts;
  parts.dim = 1;
  parts.name = "halfline";
  parts.value = [](const Vec& x) {
    return x[0] <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  parts.prox = [](const Vec& y, double) -> Vec { return scalar(std::min(y[0], 0.0)); };
  return CostFunction(parts);
}

double huber_value_piecewise(double t, double delta) {
  return std::abs(t) <= delta ? 0.5 * t * t : delta * (std::abs(t) - 0.5 * delta);
}

}  // namespace

TEST_CASE("gradient_step_op: exact one-step minimization of a scalar quadratic") {
  const double lambda = 3.0;
  Operator t = gradient_step_op(make_scalar_quadratic(lambda, 0.0), 1.0 / lambda);
  Rng rng(1);
  for (int s = 0; s < 20; ++s) CHECK(t(scalar(rng.uniform(-5, 5)))[0] == doctest::Approx(0.0));
}

TEST_CASE("gradient_step_op: huber fixed point is the minimizer") {
  CostFunction h = make_huber(1, 1.0);
  Operator t = gradient_step_op(h, 1.0);
  CHECK(t(scalar(0.0))[0] == doctest::Approx(0.0));
  auto trace = km_iterate(t, scalar(3.0), 0.5, {.max_iter = 2000, .tol = 1e-12});
  CHECK(trace.last()[0] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("gradient_step_op: contraction factor matches the eigenvalue formula") {
  Mat q = Mat::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = 4.0;
  Operator t = gradient_step_op(make_quadratic(q, Vec::Zero(2)), 0.4);
  REQUIRE(t.property().is(OperatorProperty::Kind::contractive));
  CHECK(t.property().constant == doctest::Approx(0.6));
  const double est = estimate_lipschitz(t, directional_pair_sampler(2), 20000, 21);
  CHECK(est == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("gradient_step_op rejects costs without a gradient") {
  CHECK_THROWS_AS(gradient_step_op(make_consensus_indicator(2, 1), 0.5), std::invalid_argument);
}

TEST_CASE("prox_op: closed form, minimizer fixed point, consensus projection") {
  CostFunction quad = make_scalar_quadratic(1.0, 0.0);
  CHECK(quad.prox(scalar(2.0), 1.0)[0] == doctest::Approx(1.0));
  CHECK(oracles::prox_by_backtracking(quad, scalar(2.0), 1.0)[0] == doctest::Approx(1.0).epsilon(1e-8));

  // prox of the minimizer returns the minimizer
  CostFunction shifted = make_scalar_quadratic(2.0, 1.5);
  CHECK(shifted.prox(scalar(1.5), 0.7)[0] == doctest::Approx(1.5));
  CostFunction h = make_huber(1, 1.0);
  CHECK(h.prox(scalar(0.0), 2.0)[0] == doctest::Approx(0.0));

  CostFunction cons = make_consensus_indicator(2, 1);
  Vec y(2);
  y << 1.0, 3.0;
  const Vec p = cons.prox(y, 1.0);
  CHECK(p[0] == doctest::Approx(2.0));
  CHECK(p[1] == doctest::Approx(2.0));
}

TEST_CASE("refl_op: zero cost gives the identity, quadratic and projection reflect") {
  Operator refl_zero = refl_op(make_zero(3), 1.0);
  Rng rng(2);
  for (int s = 0; s < 20; ++s) {
    const Vec x = rng.gaussian_vector(3);
    CHECK((refl_zero(x) - x).norm() == 0.0);
  }

  Operator refl_quad = refl_op(make_scalar_quadratic(1.0, 0.0), 1.0);
  CHECK(refl_quad(scalar(2.0))[0] == doctest::Approx(0.0));

  Operator refl_cons = refl_op(make_consensus_indicator(2, 1), 1.0);
  Vec y(2);
  y << 1.0, 3.0;
  const Vec r = refl_cons(y);
  CHECK(r[0] == doctest::Approx(3.0));
  CHECK(r[1] == doctest::Approx(1.0));
}

TEST_CASE("prox_grad_op: zero g reduces to the gradient step") {
  Mat q(2, 2);
  q << 2.0, 0.3, 0.3, 1.0;
  CostFunction f = make_quadratic(q, Vec::Constant(2, 0.5));
  CompositeProblem comp(f, make_zero(2));
  Operator pg = prox_grad_op(comp, 0.4);
  Operator gs = gradient_step_op(f, 0.4);
  Rng rng(3);
  for (int s = 0; s < 100; ++s) {
    const Vec x = rng.gaussian_vector(2);
    CHECK((pg(x) - gs(x)).norm() <= 1e-14 * (1.0 + x.norm()));
  }
}

TEST_CASE("prox_grad_op: constrained quadratic lands on the boundary") {
  CompositeProblem comp(make_scalar_quadratic(1.0, 2.0), halfline_indicator());
  Operator pg = prox_grad_op(comp, 0.5);
  auto trace = km_iterate(pg, scalar(-1.0), 0.5, {.max_iter = 3000, .tol = 1e-13});
  CHECK(trace.last()[0] == doctest::Approx(0.0).epsilon(1e-9));  // minimizer of f over {x <= 0}
  CHECK((pg(scalar(0.0)) - scalar(0.0)).norm() <= 1e-12);
}

TEST_CASE("prox_grad_op on stacked costs + consensus indicator is the exact projection step") {
  const int n_agents = 4;
  Rng rng(4);
  Vec centers(n_agents);
  for (int i = 0; i < n_agents; ++i) centers[i] = rng.uniform(-3, 3);

  // stacked smooth part sum_i 1/2 (x_i - a_i)^2 as one quadratic over R^4
  CostFunction f = make_quadratic(Mat::Identity(n_agents, n_agents), centers);
  CompositeProblem comp(f, make_consensus_indicator(n_agents, 1));
  const double rho = 0.3;
  Operator pg = prox_grad_op(comp, rho);

  std::vector<CostFunction> costs;
  for (int i = 0; i < n_agents; ++i) costs.push_back(make_scalar_quadratic(1.0, centers[i]));
  ConsensusProblem problem(costs, metropolis_weights(Graph::complete(n_agents)));

  for (int s = 0; s < 50; ++s) {
    const Vec x = rng.gaussian_vector(n_agents);
    CHECK((pg(x) - exact_projected_gradient_step(problem, x, rho)).norm() <=
          1e-12 * (1.0 + x.norm()));
  }
}

TEST_CASE("peaceman-rachford: symmetric pair collapses to the origin") {
  CompositeProblem comp(make_scalar_quadratic(1.0, 0.0), make_scalar_quadratic(1.0, 0.0));
  PeacemanRachford prs = peaceman_rachford_op(comp, 1.0, 0.5);
  Rng rng(5);
  for (int s = 0; s < 20; ++s) {
    const double z = rng.uniform(-4, 4);
    // refl_f(z) = 0 for f = x^2/2 at rho = 1, so the relaxed map halves z
    CHECK(prs.op()(scalar(z))[0] == doctest::Approx(0.5 * z));
  }
  CHECK(prs.recover_primal(scalar(0.0))[0] == doctest::Approx(0.0));
}

TEST_CASE("peaceman-rachford: km run recovers the composite minimizer") {
  CompositeProblem comp(make_scalar_quadratic(1.0, 1.0), make_scalar_quadratic(1.0, 3.0));
  PeacemanRachford prs = peaceman_rachford_op(comp, 1.0, 0.5);
  auto trace = km_iterate(prs.op(), scalar(0.0), 0.5, {.max_iter = 5000, .tol = 1e-13});
  CHECK(prs.recover_primal(trace.last())[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("peaceman-rachford: unrelaxed needs and honors a contraction certificate") {
  // f strongly convex and smooth -> refl_f certified contractive
  CompositeProblem good(make_scalar_quadratic(2.0, 0.0), make_huber(1, 1.0));
  PeacemanRachford prs = peaceman_rachford_op(good, 1.0, 1.0);
  REQUIRE(prs.op().property().is(OperatorProperty::Kind::contractive));
  const double zeta = prs.op().property().constant;
  CHECK(zeta == doctest::Approx(1.0 / 3.0));  // max((2-1)/(2+1), (1-2)/(1+2))
  const double est = estimate_lipschitz(prs.op(), directional_pair_sampler(1), 5000, 6);
  CHECK(est <= zeta + 1e-9);

  // huber is not strongly convex: no certificate, alpha = 1 must be rejected
  CompositeProblem bad(make_huber(1, 1.0), make_scalar_quadratic(1.0, 0.0));
  CHECK_THROWS_AS(peaceman_rachford_op(bad, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("catalog: huber values and prox match the piecewise definition") {
  CostFunction h = make_huber(1, 1.0);
  CHECK(h.value(scalar(0.5)) == doctest::Approx(0.125));
  CHECK(h.value(scalar(2.0)) == doctest::Approx(1.5));
  Rng rng(7);
  for (int s = 0; s < 200; ++s) {
    const double t = rng.uniform(-4, 4);
    CHECK(h.value(scalar(t)) == doctest::Approx(huber_value_piecewise(t, 1.0)));
  }
  CHECK_THROWS_AS(make_huber(1, -1.0), std::invalid_argument);
}

TEST_CASE("catalog: analytic gradients match central finite differences") {
  Rng rng(8);
  std::vector<CostFunction> costs;
  Mat q(3, 3);
  q << 2, .2, 0, .2, 1, .1, 0, .1, 3;
  costs.push_back(make_quadratic(q, rng.gaussian_vector(3)));
  Mat a(5, 3);
  for (int r = 0; r < 5; ++r) a.row(r) = rng.gaussian_vector(3).transpose();
  costs.push_back(make_least_squares(a, rng.gaussian_vector(5)));
  costs.push_back(make_huber(3, 1.0, rng.gaussian_vector(3)));
  Mat data(6, 3);
  Vec labels(6);
  for (int r = 0; r < 6; ++r) {
    data.row(r) = rng.gaussian_vector(3).transpose();
    labels[r] = rng.bernoulli(0.5) ? 1.0 : -1.0;
  }
  costs.push_back(make_logistic_erm(data, labels, 0.05));

  for (const auto& cost : costs) {
    for (int s = 0; s < 20; ++s) {
      // keep huber samples away from its curvature kinks
      Vec x = 0.3 * rng.gaussian_vector(cost.dim());
      const Vec analytic = cost.gradient(x);
      const Vec numeric = oracles::central_difference_gradient(
          [&](const Vec& p) { return cost.value(p); }, x);
      CHECK((analytic - numeric).norm() <= 1e-5 * (1.0 + analytic.norm()));
    }
  }
}

TEST_CASE("catalog: logistic single-datapoint gradient agrees with finite differences") {
  Mat data(1, 2);
  data << 0.7, -1.1;
  Vec label(1);
  label[0] = 1.0;
  CostFunction f = make_logistic_erm(data, label, 0.0);
  Rng rng(9);
  for (int s = 0; s < 30; ++s) {
    const Vec x = rng.gaussian_vector(2);
    const Vec numeric =
        oracles::central_difference_gradient([&](const Vec& p) { return f.value(p); }, x);
    CHECK((f.gradient(x) - numeric).norm() <= 1e-6 * (1.0 + numeric.norm()));
  }
}

TEST_CASE("catalog: construction rejects bad inputs") {
  Mat notpsd(2, 2);
  notpsd << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(make_quadratic(notpsd, Vec::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(make_logistic_erm(Mat(0, 2), Vec(0), 0.0), std::invalid_argument);
  Mat data(1, 2);
  data << 1.0, 2.0;
  Vec badlabel(1);
  badlabel[0] = 0.5;
  CHECK_THROWS_AS(make_logistic_erm(data, badlabel, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CompositeProblem(make_zero(2), make_zero(3)), std::invalid_argument);
}

TEST_CASE("prox stationarity: gradient of the prox objective vanishes at the output") {
  Rng rng(10);
  Mat q(2, 2);
  q << 1.5, .4, .4, 2.5;
  std::vector<CostFunction> costs{make_quadratic(q, rng.gaussian_vector(2)),
                                  make_huber(2, 1.0, rng.gaussian_vector(2))};
  Mat data(5, 2);
  Vec labels(5);
  for (int r = 0; r < 5; ++r) {
    data.row(r) = rng.gaussian_vector(2).transpose();
    labels[r] = rng.bernoulli(0.5) ? 1.0 : -1.0;
  }
  costs.push_back(make_logistic_erm(data, labels, 0.1));  // inner-solver prox

  for (const auto& cost : costs) {
    for (int s = 0; s < 25; ++s) {
      const Vec y = 2.0 * rng.gaussian_vector(2);
      const double rho = rng.uniform(0.1, 5.0);
      const Vec p = cost.prox(y, rho);
      CHECK((cost.gradient(p) + (p - y) / rho).norm() <= 1e-9 * (1.0 + y.norm()));
    }
  }
}

TEST_CASE("prox oracle equivalence on 100 random (y, rho) per catalog cost") {
  Rng rng(11);
  Mat q(3, 3);
  q << 2, .1, 0, .1, 1, 0, 0, 0, 0.5;
  CostFunction quad = make_quadratic(q, rng.gaussian_vector(3));
  CostFunction hub = make_huber(3, 1.0, rng.gaussian_vector(3));
  CostFunction cons = make_consensus_indicator(3, 2);

  for (int s = 0; s < 100; ++s) {
    const double rho = rng.uniform(0.1, 10.0);
    {
      const Vec y = 3.0 * rng.gaussian_vector(3);
      CHECK((quad.prox(y, rho) - oracles::prox_by_backtracking(quad, y, rho)).norm() <= 1e-6);
      CHECK((hub.prox(y, rho) - oracles::prox_by_backtracking(hub, y, rho)).norm() <= 1e-6);
    }
    {
      const Vec y = 3.0 * rng.gaussian_vector(6);
      CHECK((cons.prox(y, rho) - oracles::project_consensus_by_search(y, 3, 2)).norm() <= 1e-6);
    }
  }
}

TEST_CASE("firm non-expansiveness of prox across the catalog") {
  Rng rng(12);
  Mat q(2, 2);
  q << 3, .5, .5, 1;
  std::vector<CostFunction> costs{make_quadratic(q, rng.gaussian_vector(2)),
                                  make_huber(2, 0.7, rng.gaussian_vector(2)),
                                  make_consensus_indicator(2, 1), make_zero(2)};
  int seed = 40;
  for (const auto& cost : costs) {
    const auto result =
        check_averaged(prox_op(cost, 0.8), 0.5, gaussian_pair_sampler(cost.dim(), 2.0), 1000,
                       ++seed);
    CHECK(result.holds);
  }
}

TEST_CASE("minimizers are fixed points of gradient step, prox, and refl") {
  Rng rng(13);
  Mat q(2, 2);
  q << 2, .3, .3, 1;
  const Vec center = rng.gaussian_vector(2);
  struct Case {
    CostFunction cost;
    Vec minimizer;
  };
  std::vector<Case> cases;
  cases.push_back({make_quadratic(q, center), center});
  cases.push_back({make_huber(2, 1.0, center), center});
  cases.push_back({make_zero(2), rng.gaussian_vector(2)});  // every point minimizes

  for (const auto& c : cases) {
    if (c.cost.has_gradient()) {
      const double rho = 1.0 / std::max(*c.cost.smoothness(), 1.0);
      CHECK((gradient_step_op(c.cost, rho)(c.minimizer) - c.minimizer).norm() <= 1e-10);
    }
    CHECK((prox_op(c.cost, 0.9)(c.minimizer) - c.minimizer).norm() <= 1e-10);
    CHECK((refl_op(c.cost, 0.9)(c.minimizer) - c.minimizer).norm() <= 1e-10);
  }
}

TEST_CASE("splitting fixed points solve the composite problem") {
  // smooth composite: quadratic + huber, both differentiable
  Mat q(2, 2);
  q << 2, .2, .2, 1.2;
  Rng rng(14);
  CostFunction f = make_quadratic(q, rng.gaussian_vector(2));
  CostFunction g = make_huber(2, 1.0, rng.gaussian_vector(2));
  CompositeProblem comp(f, g);

  const double rho = 0.4;
  auto residual = [&](const Vec& x) { return (f.gradient(x) + g.gradient(x)).norm(); };

  auto pg_trace = km_iterate(prox_grad_op(comp, rho), Vec::Zero(2), 0.5,
                             {.max_iter = 20000, .tol = 1e-12});
  CHECK(residual(pg_trace.last()) <= 1e-6);

  PeacemanRachford prs = peaceman_rachford_op(comp, rho, 0.5);
  auto prs_trace = km_iterate(prs.op(), Vec::Zero(2), 0.5, {.max_iter = 20000, .tol = 1e-12});
  CHECK(residual(prs.recover_primal(prs_trace.last())) <= 1e-6);
}

TEST_CASE("generic prox inner solver reports its failure modes") {
  CHECK_THROWS_AS(make_consensus_indicator(2, 1).gradient(Vec::Zero(2)), std::invalid_argument);
  // a cost with neither prox nor gradient cannot be proxed
  CostFunction::Parts parts;
  parts.dim = 1;
  parts.name = "opaque";
  parts.value = [](const Vec&) { return 0.0; };
  CHECK_THROWS_AS(CostFunction(parts).prox(scalar(1.0), 1.0), std::invalid_argument);
}
