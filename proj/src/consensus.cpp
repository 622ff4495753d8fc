#include "opsim/consensus.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace opsim {

namespace {
constexpr double kStochasticTol = 1e-12;
constexpr double kSpectralTol = 1e-10;
}  // namespace

ConsensusMatrix make_consensus_matrix(Graph graph, Mat W) {
  const int n = graph.n_agents();
  if (W.rows() != n || W.cols() != n)
    throw std::invalid_argument("consensus matrix: size does not match graph");

  // Sparsity must conform to the graph; weights are non-negative.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (W(i, j) < 0.0) throw std::invalid_argument("consensus matrix: negative weight");
      if (i != j && W(i, j) > 0.0) {
        const auto& nb = graph.neighbors(i);
        if (!std::binary_search(nb.begin(), nb.end(), j))
          throw std::invalid_argument("consensus matrix: weight on a non-edge");
      }
    }
  }

  ConsensusMatrix cm{std::move(graph), std::move(W)};
  cm.row_stochastic = ((cm.W.rowwise().sum().array() - 1.0).abs() <= kStochasticTol).all();
  cm.column_stochastic = ((cm.W.colwise().sum().array() - 1.0).abs() <= kStochasticTol).all();
  cm.symmetric = cm.W.isApprox(cm.W.transpose(), 1e-12);
  if (cm.symmetric) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(cm.W, Eigen::EigenvaluesOnly);
    cm.eigenvalues = eig.eigenvalues();  // ascending
  }
  return cm;
}

ConsensusMatrix metropolis_weights(const Graph& g) {
  const int n = g.n_agents();
  Mat W = Mat::Zero(n, n);
  for (auto [i, j] : g.edges()) {
    const double w = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
    W(i, j) = w;
    W(j, i) = w;
  }
  for (int i = 0; i < n; ++i) W(i, i) = 1.0 - W.row(i).sum();
  return make_consensus_matrix(g, std::move(W));
}

ConsensusMatrix lazy_metropolis_weights(const Graph& g) {
  ConsensusMatrix mh = metropolis_weights(g);
  Mat W = 0.5 * (mh.W + Mat::Identity(g.n_agents(), g.n_agents()));
  return make_consensus_matrix(g, std::move(W));
}

double certify_spectrum(const ConsensusMatrix& cm) {
  if (!cm.symmetric) throw std::invalid_argument("certify_spectrum: W must be symmetric");
  const double lo = cm.eigenvalues.minCoeff();
  const double hi = cm.eigenvalues.maxCoeff();
  if (std::abs(hi - 1.0) > kSpectralTol)
    throw std::invalid_argument("certify_spectrum: largest eigenvalue is not 1");
  if (lo <= -1.0 + kSpectralTol)
    throw std::invalid_argument("certify_spectrum: eigenvalue at -1 (periodic component)");
  const double alpha = 0.5 * (1.0 - lo);
  if (alpha <= kSpectralTol)
    throw std::invalid_argument("certify_spectrum: degenerate spectrum (W is the identity)");
  // All eigenvalues must sit inside the disk of center 1-alpha, radius alpha;
  // for a symmetric matrix that is the interval [1-2 alpha, 1].
  for (int i = 0; i < cm.eigenvalues.size(); ++i) {
    const double dist = std::abs(cm.eigenvalues[i] - (1.0 - alpha));
    if (dist > alpha + kSpectralTol)
      throw std::invalid_argument("certify_spectrum: eigenvalue outside the averaged disk");
  }
  return alpha;
}

Vec consensus_step(const ConsensusMatrix& cm, const Vec& x, int block_dim) {
  const int n = cm.n_agents();
  if (block_dim <= 0 || x.size() != Eigen::Index(n) * block_dim)
    throw std::invalid_argument("consensus_step: dimension mismatch");
  Vec out(x.size());
  for (int i = 0; i < n; ++i) {
    Vec acc = cm.W(i, i) * x.segment(Eigen::Index(i) * block_dim, block_dim);
    for (int j : cm.graph.neighbors(i))
      acc += cm.W(i, j) * x.segment(Eigen::Index(j) * block_dim, block_dim);
    out.segment(Eigen::Index(i) * block_dim, block_dim) = acc;
  }
  return out;
}

Operator consensus_operator(const ConsensusMatrix& cm, int block_dim) {
  OperatorProperty prop = OperatorProperty::unknown();
  if (cm.symmetric) {
    const double lo = cm.eigenvalues.minCoeff();
    const double hi = cm.eigenvalues.maxCoeff();
    if (std::abs(hi - 1.0) <= kSpectralTol && lo > -1.0 + kSpectralTol && lo < 1.0 - kSpectralTol)
      prop = OperatorProperty::averaged(0.5 * (1.0 - lo));
  }
  return Operator(
      cm.n_agents() * block_dim,
      [cm, block_dim](const Vec& x) { return consensus_step(cm, x, block_dim); }, prop);
}

TrackingState make_tracking_state(const Vec& y0) { return {y0, y0}; }

void dynamic_consensus_step(const ConsensusMatrix& cm, TrackingState& state, const Vec& y_new,
                            int block_dim) {
  if (y_new.size() != state.x.size() || state.y_prev.size() != state.x.size())
    throw std::invalid_argument("dynamic_consensus_step: dimension mismatch");
  state.x = consensus_step(cm, state.x, block_dim) + y_new - state.y_prev;
  state.y_prev = y_new;
}

}  // namespace opsim
