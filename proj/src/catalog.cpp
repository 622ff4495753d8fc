#include "opsim/catalog.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "opsim/errors.hpp"

namespace opsim {

namespace {

double softplus(double u) {
  // log(1 + exp(u)) without overflow.
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

double huber_piece(double t, double delta) {
  const double a = std::abs(t);
  return a <= delta ? 0.5 * t * t : delta * (a - 0.5 * delta);
}

double huber_slope(double t, double delta) { return std::clamp(t, -delta, delta); }

// prox of the scalar Huber piece: shrink inside the quadratic zone, constant
// pull of rho*delta outside it.
double huber_prox(double y, double delta, double rho) {
  if (std::abs(y) <= delta * (1.0 + rho)) return y / (1.0 + rho);
  return y - rho * delta * (y > 0.0 ? 1.0 : -1.0);
}

}  // namespace

CostFunction make_quadratic(const Mat& Q, const Vec& center) {
  if (Q.rows() != Q.cols() || Q.rows() != center.size())
    throw std::invalid_argument("make_quadratic: incompatible shapes");
  if (!Q.isApprox(Q.transpose(), 1e-12)) throw std::invalid_argument("make_quadratic: Q not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(Q);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-10 * std::max(1.0, hi)) throw std::invalid_argument("make_quadratic: Q not PSD");

  const int n = static_cast<int>(Q.rows());
  CostFunction::Parts parts;
  parts.dim = n;
  parts.name = "quadratic";
  parts.value = [Q, center](const Vec& x) { return 0.5 * (x - center).dot(Q * (x - center)); };
  parts.gradient = [Q, center](const Vec& x) -> Vec { return Q * (x - center); };
  parts.prox = [Q, center, n](const Vec& y, double rho) -> Vec {
    // (rho Q + I) p = rho Q a + y
    Mat lhs = rho * Q + Mat::Identity(n, n);
    return lhs.ldlt().solve(rho * (Q * center) + y);
  };
  parts.smoothness = hi;
  parts.strong_convexity = std::max(lo, 0.0);
  return CostFunction(std::move(parts));
}

CostFunction make_scalar_quadratic(double curvature, double center) {
  Mat Q(1, 1);
  Q(0, 0) = curvature;
  Vec a(1);
  a[0] = center;
  return make_quadratic(Q, a);
}

CostFunction make_least_squares(const Mat& A, const Vec& b) {
  if (A.rows() != b.size()) throw std::invalid_argument("make_least_squares: incompatible shapes");
  if (A.rows() == 0) throw std::invalid_argument("make_least_squares: empty dataset");
  const int n = static_cast<int>(A.cols());
  const Mat gram = A.transpose() * A;
  const Vec atb = A.transpose() * b;
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram);

  CostFunction::Parts parts;
  parts.dim = n;
  parts.name = "least_squares";
  parts.value = [A, b](const Vec& x) { return 0.5 * (A * x - b).squaredNorm(); };
  parts.gradient = [gram, atb](const Vec& x) -> Vec { return gram * x - atb; };
  parts.prox = [gram, atb, n](const Vec& y, double rho) -> Vec {
    Mat lhs = rho * gram + Mat::Identity(n, n);
    return lhs.ldlt().solve(rho * atb + y);
  };
  parts.smoothness = eig.eigenvalues().maxCoeff();
  parts.strong_convexity = std::max(eig.eigenvalues().minCoeff(), 0.0);
  return CostFunction(std::move(parts));
}

CostFunction make_huber(int dim, double delta, const Vec& center) {
  if (dim <= 0) throw std::invalid_argument("make_huber: dim must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("make_huber: delta must be positive");
  Vec a = center.size() == 0 ? Vec(Vec::Zero(dim)) : center;
  if (a.size() != dim) throw std::invalid_argument("make_huber: center dimension mismatch");

  CostFunction::Parts parts;
  parts.dim = dim;
  parts.name = "huber";
  parts.value = [a, delta](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += huber_piece(x[i] - a[i], delta);
    return s;
  };
  parts.gradient = [a, delta](const Vec& x) -> Vec {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) g[i] = huber_slope(x[i] - a[i], delta);
    return g;
  };
  parts.prox = [a, delta](const Vec& y, double rho) -> Vec {
    Vec p(y.size());
    for (int i = 0; i < y.size(); ++i) p[i] = a[i] + huber_prox(y[i] - a[i], delta, rho);
    return p;
  };
  parts.smoothness = 1.0;
  parts.strong_convexity = 0.0;
  return CostFunction(std::move(parts));
}

CostFunction make_logistic_erm(const Mat& data, const Vec& labels, double reg) {
  const auto m = data.rows();
  if (m == 0) throw std::invalid_argument("make_logistic_erm: empty dataset");
  if (labels.size() != m) throw std::invalid_argument("make_logistic_erm: label count mismatch");
  if (!data.allFinite() || !labels.allFinite())
    throw std::invalid_argument("make_logistic_erm: non-finite data");
  for (Eigen::Index h = 0; h < m; ++h)
    if (labels[h] != 1.0 && labels[h] != -1.0)
      throw std::invalid_argument("make_logistic_erm: labels must be +-1");
  if (reg < 0.0) throw std::invalid_argument("make_logistic_erm: reg must be non-negative");

  const int n = static_cast<int>(data.cols());
  Eigen::SelfAdjointEigenSolver<Mat> eig(Mat(data.transpose() * data));

  CostFunction::Parts parts;
  parts.dim = n;
  parts.name = "logistic_erm";
  parts.value = [data, labels, reg, m](const Vec& x) {
    double s = 0.0;
    for (Eigen::Index h = 0; h < m; ++h) s += softplus(-labels[h] * data.row(h).dot(x));
    return s / double(m) + 0.5 * reg * x.squaredNorm();
  };
  parts.gradient = [data, labels, reg, m, n](const Vec& x) -> Vec {
    Vec g = Vec::Zero(n);
    for (Eigen::Index h = 0; h < m; ++h) {
      const double t = -labels[h] * data.row(h).dot(x);
      const double sigma = 1.0 / (1.0 + std::exp(-t));  // d softplus(t)/dt
      g -= sigma * labels[h] * data.row(h).transpose();
    }
    return g / double(m) + reg * x;
  };
  parts.smoothness = eig.eigenvalues().maxCoeff() / (4.0 * double(m)) + reg;
  parts.strong_convexity = reg;
  return CostFunction(std::move(parts));
}

CostFunction make_consensus_indicator(int n_agents, int block_dim) {
  if (n_agents <= 0 || block_dim <= 0)
    throw std::invalid_argument("make_consensus_indicator: sizes must be positive");
  const int dim = n_agents * block_dim;

  auto block_mean = [n_agents, block_dim](const Vec& x) -> Vec {
    Vec mean = Vec::Zero(block_dim);
    for (int i = 0; i < n_agents; ++i) mean += x.segment(i * block_dim, block_dim);
    return mean / double(n_agents);
  };

  CostFunction::Parts parts;
  parts.dim = dim;
  parts.name = "consensus_indicator";
  parts.value = [n_agents, block_dim, block_mean](const Vec& x) {
    const Vec mean = block_mean(x);
    for (int i = 0; i < n_agents; ++i) {
      const double dev = (x.segment(i * block_dim, block_dim) - mean).norm();
      if (dev > 1e-9 * (1.0 + x.norm())) return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  };
  parts.prox = [n_agents, block_dim, block_mean](const Vec& y, double) -> Vec {
    const Vec mean = block_mean(y);
    Vec p(y.size());
    for (int i = 0; i < n_agents; ++i) p.segment(i * block_dim, block_dim) = mean;
    return p;
  };
  return CostFunction(std::move(parts));
}

CostFunction make_zero(int dim) {
  CostFunction::Parts parts;
  parts.dim = dim;
  parts.name = "zero";
  parts.value = [](const Vec&) { return 0.0; };
  parts.gradient = [dim](const Vec&) -> Vec { return Vec::Zero(dim); };
  parts.prox = [](const Vec& y, double) -> Vec { return y; };
  parts.smoothness = 0.0;
  parts.strong_convexity = 0.0;
  return CostFunction(std::move(parts));
}

LabeledMatrix load_labeled_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged row in data file: " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2)
    throw std::runtime_error("data file needs at least one row and two columns: " + path);
  const auto m = rows.size();
  const auto cols = rows.front().size();
  LabeledMatrix out;
  out.data.resize(Eigen::Index(m), Eigen::Index(cols - 1));
  out.labels.resize(Eigen::Index(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) out.data(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    out.labels[Eigen::Index(i)] = rows[i][cols - 1];
  }
  return out;
}

}  // namespace opsim
