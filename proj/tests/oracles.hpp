// Test-side oracles, independent of the library implementation paths they
// check: spectral norms by power iteration, central finite differences, a
// standalone prox minimizer, and log-decay slope fits.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "opsim/cost.hpp"
#include "opsim/random.hpp"

namespace oracles {

using opsim::Mat;
using opsim::Vec;

// Largest singular value of A via power iteration on A^T A.
inline double spectral_norm(const Mat& a, int iters = 500, std::uint64_t seed = 1234) {
  opsim::Rng rng(seed);
  Vec v = rng.unit_sphere(static_cast<int>(a.cols()));
  double sigma2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec w = a.transpose() * (a * v);
    sigma2 = w.norm();
    if (sigma2 == 0.0) return 0.0;
    v = w / sigma2;
  }
  return std::sqrt(sigma2);
}

inline Vec central_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                                       double step = 1e-6) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi[i] += step;
    lo[i] -= step;
    g[i] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

// Minimize f(x) + ||x - y||^2 / (2 rho) by gradient descent with Armijo
// backtracking; a deliberately different route from the library's fixed-step
// inner solver.
inline Vec prox_by_backtracking(const opsim::CostFunction& f, const Vec& y, double rho,
                                double tol = 1e-9, int max_iter = 200000) {
  auto objective = [&](const Vec& x) { return f.value(x) + (x - y).squaredNorm() / (2.0 * rho); };
  Vec x = y;
  double fx = objective(x);
  for (int it = 0; it < max_iter; ++it) {
    const Vec g = f.gradient(x) + (x - y) / rho;
    if (g.norm() <= tol) return x;
    double t = 1.0;
    const double slope = -0.5 * g.squaredNorm();
    while (t > 1e-18 && objective(x - t * g) > fx + t * slope) t *= 0.5;
    x -= t * g;
    fx = objective(x);
  }
  return x;
}

// Projection onto the consensus set by per-component golden-section search on
// the distance objective (avoids the mean formula on purpose).
inline Vec project_consensus_by_search(const Vec& y, int n_agents, int block_dim) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  Vec c(block_dim);
  for (int d = 0; d < block_dim; ++d) {
    double lo = y[d], hi = y[d];
    for (int i = 0; i < n_agents; ++i) {
      lo = std::min(lo, y[i * block_dim + d]);
      hi = std::max(hi, y[i * block_dim + d]);
    }
    lo -= 1.0;
    hi += 1.0;
    auto cost = [&](double v) {
      double s = 0.0;
      for (int i = 0; i < n_agents; ++i) {
        const double diff = v - y[i * block_dim + d];
        s += diff * diff;
      }
      return s;
    };
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = cost(x1), f2 = cost(x2);
    for (int it = 0; it < 200; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = cost(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = cost(x2);
      }
    }
    c[d] = 0.5 * (a + b);
  }
  Vec out(y.size());
  for (int i = 0; i < n_agents; ++i) out.segment(i * block_dim, block_dim) = c;
  return out;
}

// Least-squares slope of values against 0..n-1.
inline double slope_fit(const std::vector<double>& ys) {
  const double n = double(ys.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    sx += double(i);
    sy += ys[i];
    sxx += double(i) * double(i);
    sxy += double(i) * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Random orthogonal matrix via QR of a gaussian sample.
inline Mat random_orthogonal(int dim, opsim::Rng& rng) {
  Mat g(dim, dim);
  for (int r = 0; r < dim; ++r) g.row(r) = rng.gaussian_vector(dim).transpose();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  return q;
}

}  // namespace oracles
