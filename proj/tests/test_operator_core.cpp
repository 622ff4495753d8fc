#include <Eigen/Eigenvalues>
#include <doctest.h>
#include <sstream>

#include "opsim/bounds.hpp"
#include "opsim/catalog.hpp"
#include "opsim/cost.hpp"
#include "opsim/errors.hpp"
#include "opsim/iteration.hpp"
#include "oracles.hpp"

using namespace opsim;

namespace {

Operator rotation90() {
  Mat r(2, 2);
  r << 0.0, -1.0, 1.0, 0.0;
  return linear_op(r, OperatorProperty::nonexpansive());
}

Operator negation(int dim) {
  return Operator(dim, [](const Vec& x) -> Vec { return -x; }, OperatorProperty::nonexpansive());
}

Vec scalar(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

}  // namespace

TEST_CASE("km: negation from 5 cancels in one relaxed step") {
  auto trace = km_iterate(negation(1), scalar(5.0), 0.5, {.max_iter = 10, .tol = 1e-12});
  REQUIRE(trace.steps() >= 1);
  CHECK(trace.iterates[1][0] == doctest::Approx(0.0).epsilon(0).scale(1));
  CHECK(trace.residuals[1] == doctest::Approx(0.0));
}

TEST_CASE("km: identity is stationary") {
  auto trace = km_iterate(identity_op(3), Vec::Constant(3, 1.5), 0.25, {.max_iter = 5, .tol = 0.0});
  for (const auto& x : trace.iterates) CHECK((x - Vec::Constant(3, 1.5)).norm() == 0.0);
  for (double r : trace.residuals) CHECK(r == 0.0);
}

TEST_CASE("km: rotation obeys the residual envelope for 1000 steps") {
  Vec x0(2);
  x0 << 1.0, 0.0;
  const Vec fix = Vec::Zero(2);
  auto trace = km_iterate(rotation90(), x0, 0.5, {.max_iter = 1000, .tol = 0.0});
  const auto check = check_km_residual_bound(trace, 0.5, fix, 1e-9);
  CHECK(check.holds);
}

TEST_CASE("picard: 0.5x meets its geometric envelope with equality") {
  Operator half(1, [](const Vec& x) -> Vec { return 0.5 * x; }, OperatorProperty::contractive(0.5));
  auto trace =
      picard_iterate(half, scalar(1.0), {.max_iter = 50, .tol = 0.0, .reference = scalar(0.0)});
  REQUIRE(trace.distances.has_value());
  for (std::size_t k = 0; k < trace.distances->size(); ++k)
    CHECK((*trace.distances)[k] == doctest::Approx(std::pow(0.5, double(k))).epsilon(1e-12));
  CHECK(check_picard_distance_bound(trace, 0.5, 1e-9).holds);
}

TEST_CASE("picard: starting at the fixed point stays there") {
  Operator t(1, [](const Vec& x) -> Vec { return 0.5 * x + Vec::Constant(1, 1.0); },
             OperatorProperty::contractive(0.5));
  auto trace = picard_iterate(t, scalar(2.0), {.max_iter = 20, .tol = 0.0});
  for (const auto& x : trace.iterates) CHECK(x[0] == doctest::Approx(2.0));
}

TEST_CASE("picard: random linear map contracts at its spectral norm") {
  Rng rng(31);
  Mat a(5, 5);
  for (int r = 0; r < 5; ++r) a.row(r) = rng.gaussian_vector(5).transpose();
  a *= 0.9 / oracles::spectral_norm(a);
  const Vec b = rng.gaussian_vector(5);
  const Vec fix = (Mat::Identity(5, 5) - a).lu().solve(b);
  Operator t = affine_op(a, b, OperatorProperty::contractive(0.9));
  auto trace =
      picard_iterate(t, rng.gaussian_vector(5), {.max_iter = 200, .tol = 0.0, .reference = fix});
  const auto& d = *trace.distances;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    if (d[k] < 1e-13) break;
    CHECK(d[k + 1] / d[k] <= 0.9 + 1e-9);
  }
  CHECK(check_picard_distance_bound(trace, 0.9, 1e-9).holds);
}

TEST_CASE("iteration traces recompute their residuals") {
  Operator t = rotation90();
  Vec x0(2);
  x0 << 0.3, -1.2;
  auto trace = km_iterate(t, x0, 0.25, {.max_iter = 100, .tol = 0.0});
  for (std::size_t k = 0; k < trace.iterates.size(); ++k)
    CHECK(std::abs(trace.residuals[k] - (trace.iterates[k] - t(trace.iterates[k])).norm()) <= 1e-12);
}

TEST_CASE("iteration errors: dimension mismatch and divergence") {
  CHECK_THROWS_AS(km_iterate(rotation90(), Vec::Zero(3), 0.5, {}), std::invalid_argument);
  Operator doubling(1, [](const Vec& x) -> Vec { return 2.0 * x; });
  CHECK_THROWS_AS(picard_iterate(doubling, scalar(1.0), {.max_iter = 100, .tol = 0.0}),
                  DivergenceError);
}

TEST_CASE("relax: negation at 1/2 is the zero map, identity is untouched") {
  Operator zero = relax(negation(3), 0.5);
  Operator same = relax(identity_op(3), 0.7);
  Rng rng(5);
  for (int s = 0; s < 50; ++s) {
    const Vec x = rng.gaussian_vector(3);
    CHECK(zero(x).norm() <= 1e-15 * x.norm());
    CHECK((same(x) - x).norm() == 0.0);
  }
  CHECK(zero.property().is(OperatorProperty::Kind::averaged));
  CHECK(zero.property().constant == doctest::Approx(0.5));
}

TEST_CASE("relax: quarter-relaxed rotation has spectrum in the shifted disk") {
  Mat relaxed(2, 2);
  relaxed << 0.75, -0.25, 0.25, 0.75;  // (3/4) I + (1/4) rotation
  Eigen::EigenSolver<Mat> eig(relaxed);
  for (int i = 0; i < 2; ++i) {
    const std::complex<double> lambda = eig.eigenvalues()[i];
    CHECK(std::abs(lambda - std::complex<double>(0.75, 0.0)) <= 0.25 + 1e-12);
  }
  // and the operator built by relax() agrees with that matrix
  Operator op = relax(rotation90(), 0.25);
  Rng rng(8);
  for (int s = 0; s < 20; ++s) {
    const Vec x = rng.gaussian_vector(2);
    CHECK((op(x) - relaxed * x).norm() <= 1e-14 * (1.0 + x.norm()));
  }
}

TEST_CASE("relax preserves fixed points") {
  Rng rng(17);
  for (int s = 0; s < 200; ++s) {
    // affine contraction with a known fixed point
    Mat a(3, 3);
    for (int r = 0; r < 3; ++r) a.row(r) = rng.gaussian_vector(3).transpose();
    a *= rng.uniform(0.1, 0.95) / oracles::spectral_norm(a, 300, 17 + s);
    const Vec fix = rng.gaussian_vector(3);
    Operator t = affine_op(a, fix - a * fix, OperatorProperty::contractive(0.95));
    Operator r = relax(t, rng.uniform(0.05, 0.95));
    CHECK((r(fix) - fix).norm() <= 1e-12 * (1.0 + fix.norm()));
  }
}

TEST_CASE("compose: identity is neutral, constants multiply") {
  Operator t = rotation90();
  Operator c = compose(identity_op(2), t);
  Rng rng(3);
  for (int s = 0; s < 100; ++s) {
    const Vec x = rng.gaussian_vector(2);
    CHECK((c(x) - t(x)).norm() == 0.0);
  }

  Operator half = linear_op(0.5 * Mat::Identity(2, 2), OperatorProperty::contractive(0.5));
  Operator quarter = compose(half, half);
  CHECK(quarter.property().is(OperatorProperty::Kind::contractive));
  CHECK(quarter.property().constant == doctest::Approx(0.25));

  CHECK_THROWS_AS(compose(identity_op(2), identity_op(3)), std::invalid_argument);
}

TEST_CASE("compose: reflections reproduce the splitting composition formula") {
  // scalar quadratics f = p/2 (x-a)^2, g = q/2 (x-b)^2
  const double p = 2.0, a = 1.0, q = 0.5, b = -2.0, rho = 0.7;
  CostFunction f = make_scalar_quadratic(p, a);
  CostFunction g = make_scalar_quadratic(q, b);
  Operator composed = compose(refl_op(g, rho), refl_op(f, rho));
  auto direct = [&](double z) {
    // refl for a scalar quadratic: 2 (rho p a + z)/(1 + rho p) - z
    const double rf = 2.0 * (rho * p * a + z) / (1.0 + rho * p) - z;
    return 2.0 * (rho * q * b + rf) / (1.0 + rho * q) - rf;
  };
  Rng rng(9);
  for (int s = 0; s < 100; ++s) {
    const double z = rng.uniform(-10.0, 10.0);
    CHECK(composed(scalar(z))[0] == doctest::Approx(direct(z)).epsilon(1e-12));
  }
}

TEST_CASE("estimate_lipschitz: exact on homogeneous maps, resolves diagonals") {
  Operator half = linear_op(0.5 * Mat::Identity(3, 3));
  CHECK(estimate_lipschitz(half, gaussian_pair_sampler(3), 100, 1) == doctest::Approx(0.5));
  CHECK(estimate_lipschitz(identity_op(3), gaussian_pair_sampler(3), 100, 2) ==
        doctest::Approx(1.0));

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 0.2;
  d(1, 1) = 0.9;
  const double est = estimate_lipschitz(linear_op(d), directional_pair_sampler(2), 10000, 3);
  CHECK(est <= 0.9 + 1e-12);
  CHECK(est >= 0.9 - 1e-3);

  auto coincident = [](Rng& rng) {
    const Vec x = rng.gaussian_vector(2);
    return std::make_pair(x, x);
  };
  CHECK_THROWS_AS(estimate_lipschitz(identity_op(2), coincident, 10, 4), SolveError);
}

TEST_CASE("check_averaged: construction passes, pure negation fails") {
  CHECK(check_averaged(relax(negation(1), 0.25), 0.25, gaussian_pair_sampler(1), 500, 11).holds);

  const auto neg = check_averaged(negation(1), 0.5, gaussian_pair_sampler(1), 500, 12);
  CHECK_FALSE(neg.holds);
  // direct evaluation of the inequality at x = 1, y = -1:
  // lhs = 4, rhs = 4 - 1 * 16 = -12, violation 16
  Operator t = negation(1);
  const Vec x = scalar(1.0), y = scalar(-1.0);
  const double lhs = (t(x) - t(y)).squaredNorm();
  const double rhs = (x - y).squaredNorm() - ((x - t(x)) - (y - t(y))).squaredNorm();
  CHECK(lhs - rhs == doctest::Approx(16.0));
  CHECK(neg.worst_violation > 1.0);

  CostFunction quad = make_scalar_quadratic(1.0, 0.0);
  CHECK(check_averaged(prox_op(quad, 1.0), 0.5, gaussian_pair_sampler(1), 500, 13).holds);
}

TEST_CASE("lyapunov: distance to a fixed point never increases along km") {
  Rng rng(23);
  for (int s = 0; s < 10; ++s) {
    Operator t = s % 2 == 0 ? rotation90() : negation(2);
    auto trace = km_iterate(t, rng.gaussian_vector(2), 0.5,
                            {.max_iter = 300, .tol = 0.0, .reference = Vec(Vec::Zero(2))});
    CHECK(check_lyapunov_monotone(trace, 1e-12).holds);
  }
}

TEST_CASE("trace csv uses k,residual,distance_to_fix with optional last column") {
  Operator half(1, [](const Vec& x) -> Vec { return 0.5 * x; }, OperatorProperty::contractive(0.5));
  auto trace =
      picard_iterate(half, scalar(1.0), {.max_iter = 2, .tol = 0.0, .reference = scalar(0.0)});
  std::ostringstream out;
  trace.write_csv(out);
  CHECK(out.str() == "k,residual,distance_to_fix\n0,0.5,1\n1,0.25,0.5\n2,0.125,0.25\n");

  auto bare = picard_iterate(half, scalar(1.0), {.max_iter = 1, .tol = 0.0});
  std::ostringstream out2;
  bare.write_csv(out2);
  CHECK(out2.str() == "k,residual,distance_to_fix\n0,0.5,\n1,0.25,\n");
}
