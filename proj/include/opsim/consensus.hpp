// Consensus weight matrices: Metropolis-Hastings synthesis, spectral
// certification, static and dynamic average consensus steps.
#pragma once

#include "opsim/graph.hpp"
#include "opsim/operator.hpp"

namespace opsim {

/// Consensus weights over a graph, with certified structure flags and the
/// eigenvalue list (ascending) for symmetric matrices.
struct ConsensusMatrix {
  Graph graph;
  Mat W;
  bool row_stochastic = false;
  bool column_stochastic = false;
  bool symmetric = false;
  Vec eigenvalues;  // ascending; empty when not symmetric

  int n_agents() const { return graph.n_agents(); }
};

/// Validates sparsity/stochasticity and fills the certificate flags; throws
/// std::invalid_argument when the matrix does not conform to the graph.
ConsensusMatrix make_consensus_matrix(Graph graph, Mat W);

/// Metropolis-Hastings weights: w_ij = 1/(1 + max(deg_i, deg_j)) on edges,
/// diagonal filling to row sum one. Symmetric and doubly stochastic.
ConsensusMatrix metropolis_weights(const Graph& g);

/// Lazy variant (W + I)/2; forces the spectrum into [0, 1].
ConsensusMatrix lazy_metropolis_weights(const Graph& g);

/// Averagedness constant alpha = (1 - lambda_min)/2 of a symmetric consensus
/// matrix; asserts the spectrum lies in the disk of center 1-alpha, radius
/// alpha. Throws when lambda_min <= -1 (periodic component) or the matrix is
/// the identity (degenerate alpha = 0).
double certify_spectrum(const ConsensusMatrix& cm);

/// One consensus round (W (x) I_block) x, evaluated block-wise so that each
/// agent reads only its own and neighbor blocks.
Vec consensus_step(const ConsensusMatrix& cm, const Vec& x, int block_dim);

/// The consensus map as a certified operator on stacked vectors.
Operator consensus_operator(const ConsensusMatrix& cm, int block_dim);

/// State of dynamic average consensus: tracker x plus the previous signal.
struct TrackingState {
  Vec x;
  Vec y_prev;
};

/// Start tracking at the signal: x = y0, y_prev = y0 (the first step reduces
/// to plain consensus).
TrackingState make_tracking_state(const Vec& y0);

/// x <- (W (x) I) x + y_new - y_prev; y_prev <- y_new.
void dynamic_consensus_step(const ConsensusMatrix& cm, TrackingState& state, const Vec& y_new,
                            int block_dim);

}  // namespace opsim
