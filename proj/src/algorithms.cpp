#include "opsim/algorithms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace opsim {

StepSizeSchedule StepSizeSchedule::constant(double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("schedule: rho must be positive");
  return StepSizeSchedule(rho, 0.0);
}

StepSizeSchedule StepSizeSchedule::diminishing(double rho0, double gamma) {
  if (!(rho0 > 0.0)) throw std::invalid_argument("schedule: rho0 must be positive");
  if (!(gamma > 0.5 && gamma <= 1.0))
    throw std::invalid_argument("schedule: gamma must be in (0.5, 1]");
  return StepSizeSchedule(rho0, gamma);
}

double StepSizeSchedule::at(int k) const {
  return gamma_ == 0.0 ? rho0_ : rho0_ / std::pow(double(k) + 1.0, gamma_);
}

EdgeField::EdgeField(const Graph& g, int block_dim) : block_(block_dim), offset_(g.n_agents()) {
  int slots = 0;
  ranks_.reserve(g.n_agents());
  for (int i = 0; i < g.n_agents(); ++i) {
    offset_[i] = slots;
    ranks_.push_back(g.neighbors(i));
    slots += g.degree(i);
  }
  data_.assign(slots, Vec::Zero(block_));
}

int EdgeField::slot(int from, int to) const {
  const auto& nb = ranks_.at(from);
  const auto it = std::lower_bound(nb.begin(), nb.end(), to);
  if (it == nb.end() || *it != to) throw std::invalid_argument("EdgeField: not an edge");
  return offset_[from] + static_cast<int>(it - nb.begin());
}

Vec EdgeField::flatten() const {
  Vec out(flat_dim());
  for (int s = 0; s < n_slots(); ++s) out.segment(Eigen::Index(s) * block_, block_) = data_[s];
  return out;
}

namespace {

Eigen::Index blk(int i, int n) { return Eigen::Index(i) * n; }

}  // namespace

Vec exact_projected_gradient_step(const ConsensusProblem& p, const Vec& x, double rho) {
  const int n = p.block_dim();
  if (x.size() != p.stacked_dim())
    throw std::invalid_argument("exact_projected_gradient_step: dimension mismatch");
  Vec mean = Vec::Zero(n);
  for (int i = 0; i < p.n_agents(); ++i) {
    const Vec xi = x.segment(blk(i, n), n);
    mean += xi - rho * p.cost(i).gradient(xi);
  }
  mean /= double(p.n_agents());
  return p.stack(mean);
}

Vec atc_step(const ConsensusProblem& p, const Vec& x, double rho) {
  const int n = p.block_dim();
  if (x.size() != p.stacked_dim()) throw std::invalid_argument("atc_step: dimension mismatch");
  Vec adapted(x.size());
  for (int i = 0; i < p.n_agents(); ++i) {
    const Vec xi = x.segment(blk(i, n), n);
    adapted.segment(blk(i, n), n) = xi - rho * p.cost(i).gradient(xi);
  }
  return consensus_step(p.network(), adapted, n);
}

Vec dgd_step(const ConsensusProblem& p, const Vec& x, double rho) {
  const int n = p.block_dim();
  if (x.size() != p.stacked_dim()) throw std::invalid_argument("dgd_step: dimension mismatch");
  return consensus_step(p.network(), x, n) - rho * p.stacked_gradient(x);
}

GTState init_gradient_tracking(const ConsensusProblem& p, const Vec& x0) {
  if (x0.size() != p.stacked_dim())
    throw std::invalid_argument("init_gradient_tracking: dimension mismatch");
  return {x0, consensus_step(p.network(), x0, p.block_dim())};
}

void gradient_tracking_step(const ConsensusProblem& p, GTState& s, double rho) {
  const int n = p.block_dim();
  if (s.x.size() != p.stacked_dim() || s.y_prev.size() != p.stacked_dim())
    throw std::invalid_argument("gradient_tracking_step: dimension mismatch");
  const Vec y = s.x - rho * p.stacked_gradient(s.x);
  s.x = consensus_step(p.network(), s.x, n) + y - s.y_prev;
  s.y_prev = y;
}

Mat sqrt_laplacian_factor(const ConsensusMatrix& cm) {
  if (!cm.symmetric) throw std::invalid_argument("sqrt_laplacian_factor: W must be symmetric");
  const int n = cm.n_agents();
  Eigen::SelfAdjointEigenSolver<Mat> eig(Mat(Mat::Identity(n, n) - cm.W));
  Vec d = eig.eigenvalues();
  for (int i = 0; i < n; ++i) {
    if (d[i] < -1e-10)
      throw std::invalid_argument("sqrt_laplacian_factor: I - W has a negative eigenvalue");
    d[i] = std::sqrt(std::max(d[i], 0.0));
  }
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

namespace {

// (S (x) I_n) v for an agent-level matrix S.
Vec kron_apply(const Mat& S, const Vec& v, int block) {
  const int N = static_cast<int>(S.rows());
  Vec out = Vec::Zero(v.size());
  for (int i = 0; i < N; ++i) {
    Vec acc = Vec::Zero(block);
    for (int j = 0; j < N; ++j)
      if (S(i, j) != 0.0) acc += S(i, j) * v.segment(blk(j, block), block);
    out.segment(blk(i, block), block) = acc;
  }
  return out;
}

}  // namespace

void primal_dual_gt_step(const ConsensusProblem& p, const Mat& sqrt_factor, PrimalDualGTState& s,
                         double rho) {
  const int n = p.block_dim();
  if (s.x.size() != p.stacked_dim() || s.w.size() != p.stacked_dim())
    throw std::invalid_argument("primal_dual_gt_step: dimension mismatch");
  s.x -= rho * (p.stacked_gradient(s.x) + kron_apply(sqrt_factor, s.w, n));
  s.w += kron_apply(sqrt_factor, s.x, n) / rho;
}

ADMMState init_admm(const ConsensusProblem& p, const Vec& x0) {
  if (x0.size() != p.stacked_dim()) throw std::invalid_argument("init_admm: dimension mismatch");
  if (p.graph().n_edges() == 0) throw std::invalid_argument("init_admm: graph has no edges");
  return {x0, EdgeField(p.graph(), p.block_dim())};
}

void admm_step(const ConsensusProblem& p, ADMMState& s, double rho, double alpha) {
  if (!(rho > 0.0)) throw std::invalid_argument("admm_step: rho must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("admm_step: alpha must be in (0,1)");
  const int n = p.block_dim();
  const Graph& g = p.graph();

  // Primal pass: x_i from the agent's own auxiliaries.
  for (int i = 0; i < p.n_agents(); ++i) {
    const double scale = 1.0 / (rho * g.degree(i));
    Vec v = Vec::Zero(n);
    for (int j : g.neighbors(i)) v += s.z.at(i, j);
    s.x.segment(blk(i, n), n) = p.cost(i).prox(scale * v, scale);
  }

  // Edge pass: z_{ij} absorbs the message z_{ji} - 2 rho x_j_new from j.
  EdgeField z_new = s.z;
  for (int i = 0; i < p.n_agents(); ++i)
    for (int j : g.neighbors(i))
      z_new.at(i, j) = (1.0 - alpha) * s.z.at(i, j) -
                       alpha * (s.z.at(j, i) - 2.0 * rho * s.x.segment(blk(j, n), n));
  s.z = std::move(z_new);
}

LagrangianADMMState init_lagrangian_admm(const ConsensusProblem& p, const Vec& x0) {
  if (x0.size() != p.stacked_dim())
    throw std::invalid_argument("init_lagrangian_admm: dimension mismatch");
  if (p.graph().n_edges() == 0)
    throw std::invalid_argument("init_lagrangian_admm: graph has no edges");
  return {x0, EdgeField(p.graph(), p.block_dim()), EdgeField(p.graph(), p.block_dim())};
}

void lagrangian_admm_step(const ConsensusProblem& p, LagrangianADMMState& s, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("lagrangian_admm_step: rho must be positive");
  const int n = p.block_dim();
  const Graph& g = p.graph();

  // x-minimization: agent i sees the |N_i| augmented penalties on x_i = y_ij.
  for (int i = 0; i < p.n_agents(); ++i) {
    const double scale = 1.0 / (rho * g.degree(i));
    Vec v = Vec::Zero(n);
    for (int j : g.neighbors(i)) v += s.y.at(i, j) - s.w.at(i, j) / rho;
    s.x.segment(blk(i, n), n) = p.cost(i).prox(v / double(g.degree(i)), scale);
  }

  // y-minimization: per undirected edge, both copies agree on the minimizer.
  for (auto [i, j] : g.edges()) {
    const Vec xi = s.x.segment(blk(i, n), n);
    const Vec xj = s.x.segment(blk(j, n), n);
    const Vec u = 0.5 * (xi + xj) + (s.w.at(i, j) + s.w.at(j, i)) / (2.0 * rho);
    s.y.at(i, j) = u;
    s.y.at(j, i) = u;
  }

  // Dual ascent on the residual of A x = y.
  for (int i = 0; i < p.n_agents(); ++i)
    for (int j : g.neighbors(i))
      s.w.at(i, j) += rho * (s.x.segment(blk(i, n), n) - s.y.at(i, j));
}

}  // namespace opsim
