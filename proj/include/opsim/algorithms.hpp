// The distributed algorithms as synchronous step functions on stacked states:
// exact projected gradient (centralized oracle), DGD and Adapt-Then-Combine,
// gradient tracking in both its dynamic-consensus and primal-dual forms, and
// the distributed / Lagrangian ADMM pair.
#pragma once

#include <cstdint>

#include "opsim/problem.hpp"

namespace opsim {

class StepSizeSchedule {
 public:
  static StepSizeSchedule constant(double rho);
  /// rho_k = rho0 / (k+1)^gamma with gamma in (0.5, 1]; square-summable but
  /// not summable.
  static StepSizeSchedule diminishing(double rho0, double gamma);

  double at(int k) const;
  bool is_constant() const { return gamma_ == 0.0; }
  double base() const { return rho0_; }

 private:
  StepSizeSchedule(double rho0, double gamma) : rho0_(rho0), gamma_(gamma) {}
  double rho0_;
  double gamma_;  // 0 for constant schedules
};

/// Per-directed-edge block vectors, stored per sender: slot (i,j) exists for
/// every j in N_i. Flattening order is deterministic (i ascending, then j).
class EdgeField {
 public:
  EdgeField(const Graph& g, int block_dim);

  int block_dim() const { return block_; }
  int n_slots() const { return static_cast<int>(data_.size()); }
  Eigen::Index flat_dim() const { return Eigen::Index(n_slots()) * block_; }

  Vec& at(int from, int to) { return data_[slot(from, to)]; }
  const Vec& at(int from, int to) const { return data_[slot(from, to)]; }

  Vec flatten() const;

 private:
  int slot(int from, int to) const;

  int block_;
  std::vector<int> offset_;             // first slot of each agent
  std::vector<std::vector<int>> ranks_;  // neighbor lists (sorted), mirrors Graph
  std::vector<Vec> data_;
};

// --- gradient-based methods ------------------------------------------------

/// Centralized oracle: every block becomes the network-wide average of the
/// agents' gradient steps. Not message-constrained.
Vec exact_projected_gradient_step(const ConsensusProblem& p, const Vec& x, double rho);

/// Adapt-Then-Combine: (W (x) I)(x - rho grad f(x)).
Vec atc_step(const ConsensusProblem& p, const Vec& x, double rho);

/// DGD: (W (x) I) x - rho grad f(x).
Vec dgd_step(const ConsensusProblem& p, const Vec& x, double rho);

/// Gradient-tracking state: stacked x plus the previous gradient-step signal.
struct GTState {
  Vec x;
  Vec y_prev;
};

/// Start gradient tracking at x0 with y_prev = (W (x) I) x0, which makes the
/// first transition a pure gradient step and matches the primal-dual form
/// started at zero duals.
GTState init_gradient_tracking(const ConsensusProblem& p, const Vec& x0);

/// One gradient-tracking step: y = x - rho grad f(x), then consensus on x plus
/// the signal increment y - y_prev.
void gradient_tracking_step(const ConsensusProblem& p, GTState& s, double rho);

/// Primal-dual form of gradient tracking.
struct PrimalDualGTState {
  Vec x;
  Vec w;  // duals, same stacked shape as x
};

/// Symmetric PSD square root of I - W; eigenvalues of I - W in [-1e-10, 0) are
/// clamped to zero, anything lower is an error.
Mat sqrt_laplacian_factor(const ConsensusMatrix& cm);

/// Incremental primal-dual step:
///   x <- x - rho (grad f(x) + (S (x) I) w),  w <- w + (1/rho) (S (x) I) x_new
/// with S the square root factor.
void primal_dual_gt_step(const ConsensusProblem& p, const Mat& sqrt_factor, PrimalDualGTState& s,
                         double rho);

// --- ADMM ------------------------------------------------------------------

/// Distributed ADMM state: per-agent primals and one auxiliary vector per
/// directed edge (z_{ij} stored at agent i for each neighbor j).
struct ADMMState {
  Vec x;
  EdgeField z;
};

ADMMState init_admm(const ConsensusProblem& p, const Vec& x0);

/// One relaxed ADMM step: per-agent prox update of x from the local z, then
/// the per-edge update driven by the neighbor message z_{ji} - 2 rho x_j_new.
void admm_step(const ConsensusProblem& p, ADMMState& s, double rho, double alpha);

/// Lagrangian (augmented) ADMM over the edge-constrained reformulation, used
/// as the reference route for the alpha = 1/2 equivalence.
struct LagrangianADMMState {
  Vec x;
  EdgeField y;  // edge copies, replicated per direction
  EdgeField w;  // duals of x_i = y_ij
};

LagrangianADMMState init_lagrangian_admm(const ConsensusProblem& p, const Vec& x0);

/// Alternating minimization in x and y, then a linear dual update.
void lagrangian_admm_step(const ConsensusProblem& p, LagrangianADMMState& s, double rho);

}  // namespace opsim
