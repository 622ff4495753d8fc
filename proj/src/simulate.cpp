#include "opsim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "opsim/errors.hpp"
#include "opsim/format.hpp"
#include "opsim/random.hpp"

namespace opsim {

void ImperfectionConfig::validate() const {
  if (!(p_act > 0.0 && p_act <= 1.0))
    throw std::invalid_argument("imperfections: p_act must be in (0,1]");
  if (!(p_loss >= 0.0 && p_loss < 1.0))
    throw std::invalid_argument("imperfections: p_loss must be in [0,1)");
  if (quant_step && !(*quant_step > 0.0))
    throw std::invalid_argument("imperfections: quantizer step must be positive");
}

Vec quantize(const Vec& v, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("quantize: delta must be positive");
  Vec out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = delta * std::rint(v[i] / delta);
  return out;
}

void write_telemetry_csv(const std::vector<TelemetryRecord>& records, std::ostream& os) {
  os << "k,optimality_error,consensus_error,fp_residual,messages_sent,messages_dropped,"
        "grad_evals,prox_evals\n";
  for (const auto& r : records) {
    os << r.k << ',';
    if (r.optimality_error) os << fmt_double(*r.optimality_error);
    os << ',' << fmt_double(r.consensus_error) << ',' << fmt_double(r.fp_residual) << ','
       << r.messages_sent << ',' << r.messages_dropped << ',' << r.grad_evals << ','
       << r.prox_evals << '\n';
  }
}

Vec AgentSystem::primal(int agent) const {
  return stacked_primal().segment(Eigen::Index(agent) * block_dim(), block_dim());
}

void AgentSystem::synchronous_round() {
  if (!uses_mailboxes()) {
    oracle_round(std::vector<char>(n_agents(), 1));
    advance_round();
    return;
  }
  const Graph& g = problem_->graph();
  // Snapshot of every payload before any update (synchronous semantics).
  EdgeField pre(g, payload_snapshot_dim());
  for (int i = 0; i < n_agents(); ++i)
    for (int j : g.neighbors(i)) pre.at(i, j) = outgoing_payload(i, j);
  for (int i = 0; i < n_agents(); ++i) {
    const Inbox inbox = [&pre, i](int from) -> const Vec& { return pre.at(from, i); };
    phase_a(i, inbox);
  }
  if (has_phase_c()) {
    EdgeField mid(g, payload_snapshot_dim());
    for (int i = 0; i < n_agents(); ++i)
      for (int j : g.neighbors(i)) mid.at(i, j) = outgoing_payload(i, j);
    for (int i = 0; i < n_agents(); ++i) {
      const Inbox inbox = [&mid, i](int from) -> const Vec& { return mid.at(from, i); };
      phase_c(i, inbox);
    }
  }
  advance_round();
}

int AgentSystem::payload_snapshot_dim() const {
  const Graph& g = problem_->graph();
  for (int i = 0; i < n_agents(); ++i)
    if (g.degree(i) > 0) return static_cast<int>(outgoing_payload(i, g.neighbors(i).front()).size());
  return block_dim();
}

// --- concrete systems --------------------------------------------------------

namespace {

Eigen::Index blk(int i, int n) { return Eigen::Index(i) * n; }

void check_state(const Vec& v) {
  if (!v.allFinite() || v.cwiseAbs().maxCoeff() > divergence_limit())
    throw DivergenceError("simulation diverged");
}

// Adapt-Then-Combine. Message: the sender's adapted value x - rho grad f(x),
// evaluated with the step size of the round it will be consumed in.
class AtcSystem final : public AgentSystem {
 public:
  AtcSystem(const ConsensusProblem& p, StepSizeSchedule sched, const Vec& x0)
      : AgentSystem(p), sched_(sched), x_(x0), adapted_(p.stacked_dim()) {
    refresh_adapted_all();
  }

  Vec outgoing_payload(int from, int /*to*/) const override {
    return adapted_.segment(blk(from, block_dim()), block_dim());
  }

  void phase_a(int i, const Inbox& inbox) override {
    const int n = block_dim();
    const Mat& W = problem_->network().W;
    Vec acc = W(i, i) * adapted_.segment(blk(i, n), n);
    for (int j : problem_->graph().neighbors(i)) acc += W(i, j) * inbox(j);
    x_.segment(blk(i, n), n) = acc;
    refresh_adapted(i);
  }

  Vec stacked_primal() const override { return x_; }
  Vec full_state() const override { return x_; }
  std::unique_ptr<AgentSystem> clone() const override { return std::make_unique<AtcSystem>(*this); }

 private:
  void refresh_adapted(int i) {
    const int n = block_dim();
    const Vec xi = x_.segment(blk(i, n), n);
    adapted_.segment(blk(i, n), n) = xi - sched_.at(round_index() + 1) * problem_->cost(i).gradient(xi);
    count_grad();
  }
  void refresh_adapted_all() {
    const int n = block_dim();
    for (int i = 0; i < n_agents(); ++i) {
      const Vec xi = x_.segment(blk(i, n), n);
      adapted_.segment(blk(i, n), n) = xi - sched_.at(round_index()) * problem_->cost(i).gradient(xi);
      count_grad();
    }
  }

  StepSizeSchedule sched_;
  Vec x_;
  Vec adapted_;
};

// DGD. Message: the sender's state.
class DgdSystem final : public AgentSystem {
 public:
  DgdSystem(const ConsensusProblem& p, StepSizeSchedule sched, const Vec& x0)
      : AgentSystem(p), sched_(sched), x_(x0) {}

  Vec outgoing_payload(int from, int /*to*/) const override {
    return x_.segment(blk(from, block_dim()), block_dim());
  }

  void phase_a(int i, const Inbox& inbox) override {
    const int n = block_dim();
    const Mat& W = problem_->network().W;
    const Vec xi = x_.segment(blk(i, n), n);
    Vec acc = W(i, i) * xi;
    for (int j : problem_->graph().neighbors(i)) acc += W(i, j) * inbox(j);
    x_.segment(blk(i, n), n) = acc - sched_.at(round_index()) * problem_->cost(i).gradient(xi);
    count_grad();
  }

  Vec stacked_primal() const override { return x_; }
  Vec full_state() const override { return x_; }
  std::unique_ptr<AgentSystem> clone() const override { return std::make_unique<DgdSystem>(*this); }

 private:
  StepSizeSchedule sched_;
  Vec x_;
};

// Gradient tracking. Message: the sender's state; the tracker difference is
// agent-local.
class GradientTrackingSystem final : public AgentSystem {
 public:
  GradientTrackingSystem(const ConsensusProblem& p, double rho, const Vec& x0)
      : AgentSystem(p), rho_(rho), state_(init_gradient_tracking(p, x0)) {}

  Vec outgoing_payload(int from, int /*to*/) const override {
    return state_.x.segment(blk(from, block_dim()), block_dim());
  }

  void phase_a(int i, const Inbox& inbox) override {
    const int n = block_dim();
    const Mat& W = problem_->network().W;
    const Vec xi = state_.x.segment(blk(i, n), n);
    const Vec yi = xi - rho_ * problem_->cost(i).gradient(xi);
    count_grad();
    Vec acc = W(i, i) * xi;
    for (int j : problem_->graph().neighbors(i)) acc += W(i, j) * inbox(j);
    state_.x.segment(blk(i, n), n) = acc + yi - state_.y_prev.segment(blk(i, n), n);
    state_.y_prev.segment(blk(i, n), n) = yi;
  }

  Vec stacked_primal() const override { return state_.x; }
  Vec full_state() const override {
    Vec out(2 * state_.x.size());
    out << state_.x, state_.y_prev;
    return out;
  }
  std::unique_ptr<AgentSystem> clone() const override {
    return std::make_unique<GradientTrackingSystem>(*this);
  }

 private:
  double rho_;
  GTState state_;
};

// Distributed ADMM. Message from j to i: z_{ji} - 2 rho x_j_new, consumed by
// the z-update in phase C.
class AdmmSystem final : public AgentSystem {
 public:
  AdmmSystem(const ConsensusProblem& p, double rho, double alpha, const Vec& x0)
      : AgentSystem(p), rho_(rho), alpha_(alpha), state_(init_admm(p, x0)) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("admm: alpha must be in (0,1)");
  }

  Vec outgoing_payload(int from, int to) const override {
    return state_.z.at(from, to) - 2.0 * rho_ * state_.x.segment(blk(from, block_dim()), block_dim());
  }

  void phase_a(int i, const Inbox& /*inbox*/) override {
    const int n = block_dim();
    const Graph& g = problem_->graph();
    const double scale = 1.0 / (rho_ * g.degree(i));
    Vec v = Vec::Zero(n);
    for (int j : g.neighbors(i)) v += state_.z.at(i, j);
    state_.x.segment(blk(i, n), n) = problem_->cost(i).prox(scale * v, scale);
    count_prox();
  }

  bool has_phase_c() const override { return true; }
  void phase_c(int i, const Inbox& inbox) override {
    for (int j : problem_->graph().neighbors(i))
      state_.z.at(i, j) = (1.0 - alpha_) * state_.z.at(i, j) - alpha_ * inbox(j);
  }

  Vec stacked_primal() const override { return state_.x; }
  Vec full_state() const override {
    Vec out(state_.x.size() + state_.z.flat_dim());
    out << state_.x, state_.z.flatten();
    return out;
  }
  std::unique_ptr<AgentSystem> clone() const override { return std::make_unique<AdmmSystem>(*this); }

 private:
  double rho_;
  double alpha_;
  ADMMState state_;
};

// Lagrangian ADMM. Message from j to i: the sender's new primal stacked with
// its dual for the shared edge, so both endpoints reconstruct the same y.
class LagrangianAdmmSystem final : public AgentSystem {
 public:
  LagrangianAdmmSystem(const ConsensusProblem& p, double rho, const Vec& x0)
      : AgentSystem(p), rho_(rho), state_(init_lagrangian_admm(p, x0)) {}

  Vec outgoing_payload(int from, int to) const override {
    const int n = block_dim();
    Vec payload(2 * n);
    payload << state_.x.segment(blk(from, n), n), state_.w.at(from, to);
    return payload;
  }

  void phase_a(int i, const Inbox& /*inbox*/) override {
    const int n = block_dim();
    const Graph& g = problem_->graph();
    const double scale = 1.0 / (rho_ * g.degree(i));
    Vec v = Vec::Zero(n);
    for (int j : g.neighbors(i)) v += state_.y.at(i, j) - state_.w.at(i, j) / rho_;
    state_.x.segment(blk(i, n), n) = problem_->cost(i).prox(v / double(g.degree(i)), scale);
    count_prox();
  }

  bool has_phase_c() const override { return true; }
  void phase_c(int i, const Inbox& inbox) override {
    const int n = block_dim();
    const Vec xi = state_.x.segment(blk(i, n), n);
    for (int j : problem_->graph().neighbors(i)) {
      const Vec& msg = inbox(j);
      const Vec xj = msg.head(n);
      const Vec wj = msg.tail(n);
      state_.y.at(i, j) = 0.5 * (xi + xj) + (state_.w.at(i, j) + wj) / (2.0 * rho_);
      state_.w.at(i, j) += rho_ * (xi - state_.y.at(i, j));
    }
  }

  Vec stacked_primal() const override { return state_.x; }
  Vec full_state() const override {
    Vec out(state_.x.size() + state_.y.flat_dim() + state_.w.flat_dim());
    out << state_.x, state_.y.flatten(), state_.w.flatten();
    return out;
  }
  std::unique_ptr<AgentSystem> clone() const override {
    return std::make_unique<LagrangianAdmmSystem>(*this);
  }

 private:
  double rho_;
  LagrangianADMMState state_;
};

// Centralized projected-gradient oracle: active agents recompute the global
// average of gradient steps from true state.
class ExactPgSystem final : public AgentSystem {
 public:
  ExactPgSystem(const ConsensusProblem& p, StepSizeSchedule sched, const Vec& x0)
      : AgentSystem(p), sched_(sched), x_(x0) {}

  bool uses_mailboxes() const override { return false; }
  Vec outgoing_payload(int, int) const override { return Vec(); }
  void phase_a(int, const Inbox&) override {}

  void oracle_round(const std::vector<char>& active) override {
    const int n = block_dim();
    const double rho = sched_.at(round_index());
    Vec mean = Vec::Zero(n);
    bool any = false;
    for (int i = 0; i < n_agents(); ++i) any = any || active[i];
    if (!any) return;
    for (int j = 0; j < n_agents(); ++j) {
      const Vec xj = x_.segment(blk(j, n), n);
      mean += xj - rho * problem_->cost(j).gradient(xj);
      count_grad();
    }
    mean /= double(n_agents());
    for (int i = 0; i < n_agents(); ++i)
      if (active[i]) x_.segment(blk(i, n), n) = mean;
  }

  Vec stacked_primal() const override { return x_; }
  Vec full_state() const override { return x_; }
  std::unique_ptr<AgentSystem> clone() const override {
    return std::make_unique<ExactPgSystem>(*this);
  }

 private:
  StepSizeSchedule sched_;
  Vec x_;
};

// Primal-dual gradient tracking; the square-root factor is dense, so blocks
// are updated from true state (oracle mode).
class PrimalDualGtSystem final : public AgentSystem {
 public:
  PrimalDualGtSystem(const ConsensusProblem& p, double rho, const Vec& x0)
      : AgentSystem(p),
        rho_(rho),
        sqrt_factor_(sqrt_laplacian_factor(p.network())),
        state_{x0, Vec::Zero(p.stacked_dim())} {}

  bool uses_mailboxes() const override { return false; }
  Vec outgoing_payload(int, int) const override { return Vec(); }
  void phase_a(int, const Inbox&) override {}

  void oracle_round(const std::vector<char>& active) override {
    const int n = block_dim();
    const Vec x_snapshot = state_.x;
    const Vec w_snapshot = state_.w;
    for (int i = 0; i < n_agents(); ++i) {
      if (!active[i]) continue;
      Vec sw = Vec::Zero(n);
      for (int j = 0; j < n_agents(); ++j)
        sw += sqrt_factor_(i, j) * w_snapshot.segment(blk(j, n), n);
      const Vec xi = x_snapshot.segment(blk(i, n), n);
      state_.x.segment(blk(i, n), n) = xi - rho_ * (problem_->cost(i).gradient(xi) + sw);
      count_grad();
    }
    const Vec x_new = state_.x;
    for (int i = 0; i < n_agents(); ++i) {
      if (!active[i]) continue;
      Vec sx = Vec::Zero(n);
      for (int j = 0; j < n_agents(); ++j)
        sx += sqrt_factor_(i, j) * x_new.segment(blk(j, n), n);
      state_.w.segment(blk(i, n), n) += sx / rho_;
    }
  }

  Vec stacked_primal() const override { return state_.x; }
  Vec full_state() const override {
    Vec out(2 * state_.x.size());
    out << state_.x, state_.w;
    return out;
  }
  std::unique_ptr<AgentSystem> clone() const override {
    return std::make_unique<PrimalDualGtSystem>(*this);
  }

 private:
  double rho_;
  Mat sqrt_factor_;
  PrimalDualGTState state_;
};

}  // namespace

bool is_oracle_algorithm(AlgorithmKind kind) {
  return kind == AlgorithmKind::exact_pg || kind == AlgorithmKind::gt_primal_dual;
}

std::unique_ptr<AgentSystem> make_agent_system(const ConsensusProblem& p,
                                               const AlgorithmParams& params, const Vec& x0) {
  const bool constant = params.schedule.is_constant();
  switch (params.kind) {
    case AlgorithmKind::exact_pg:
      return std::make_unique<ExactPgSystem>(p, params.schedule, x0);
    case AlgorithmKind::atc:
      return std::make_unique<AtcSystem>(p, params.schedule, x0);
    case AlgorithmKind::dgd:
      return std::make_unique<DgdSystem>(p, params.schedule, x0);
    case AlgorithmKind::gradient_tracking:
      if (!constant)
        throw std::invalid_argument("gradient_tracking requires a constant step size");
      return std::make_unique<GradientTrackingSystem>(p, params.schedule.base(), x0);
    case AlgorithmKind::gt_primal_dual:
      if (!constant) throw std::invalid_argument("gt_primal_dual requires a constant step size");
      return std::make_unique<PrimalDualGtSystem>(p, params.schedule.base(), x0);
    case AlgorithmKind::admm:
      if (!constant) throw std::invalid_argument("admm requires a constant penalty");
      return std::make_unique<AdmmSystem>(p, params.schedule.base(), params.admm_alpha, x0);
    case AlgorithmKind::lagrangian_admm:
      if (!constant) throw std::invalid_argument("lagrangian_admm requires a constant penalty");
      return std::make_unique<LagrangianAdmmSystem>(p, params.schedule.base(), x0);
  }
  throw std::invalid_argument("unknown algorithm kind");
}

namespace {

struct MailboxEntry {
  Vec payload;
  long long staleness = 0;
};

double consensus_error_of(const Vec& stacked, int n_agents, int block) {
  Vec mean = Vec::Zero(block);
  for (int i = 0; i < n_agents; ++i) mean += stacked.segment(blk(i, block), block);
  mean /= double(n_agents);
  double worst = 0.0;
  for (int i = 0; i < n_agents; ++i)
    worst = std::max(worst, (stacked.segment(blk(i, block), block) - mean).norm());
  return worst;
}

double optimality_error_of(const Vec& stacked, const Vec& x_star, int n_agents, int block) {
  double worst = 0.0;
  for (int i = 0; i < n_agents; ++i)
    worst = std::max(worst, (stacked.segment(blk(i, block), block) - x_star).norm());
  return worst;
}

double fp_residual_of(const AgentSystem& system) {
  auto probe = system.clone();
  probe->disable_counters();
  const Vec before = probe->full_state();
  probe->synchronous_round();
  return (probe->full_state() - before).norm();
}

}  // namespace

SimulationResult run_simulation(AgentSystem& system, const SimulationConfig& config) {
  config.imperfections.validate();
  if (config.max_iter < 1) throw std::invalid_argument("run_simulation: max_iter must be positive");
  if (config.tol < 0.0) throw std::invalid_argument("run_simulation: tol must be non-negative");

  const ConsensusProblem& p = system.problem();
  const Graph& g = p.graph();
  const int N = system.n_agents();
  const auto& imp = config.imperfections;
  Rng rng(imp.seed);

  SimulationResult result;
  long long sent = 0, dropped = 0;

  // i.i.d. Bernoulli activation, re-sampled until the active set is non-empty.
  const auto sample_active = [&rng, &imp, N]() {
    std::vector<char> active(N, 0);
    bool any = false;
    while (!any)
      for (int i = 0; i < N; ++i) {
        active[i] = rng.bernoulli(imp.p_act) ? 1 : 0;
        any = any || active[i] != 0;
      }
    return active;
  };

  const auto record = [&](int k) {
    TelemetryRecord r;
    r.k = k;
    const Vec primal = system.stacked_primal();
    check_state(system.full_state());
    if (config.record_states) result.state_history.push_back(system.full_state());
    if (p.reference())
      r.optimality_error = optimality_error_of(primal, *p.reference(), N, system.block_dim());
    r.consensus_error = consensus_error_of(primal, N, system.block_dim());
    r.fp_residual = fp_residual_of(system);
    r.messages_sent = sent;
    r.messages_dropped = dropped;
    r.grad_evals = system.grad_evals();
    r.prox_evals = system.prox_evals();
    result.telemetry.push_back(r);
    return r.fp_residual;
  };

  record(0);

  if (!system.uses_mailboxes()) {
    for (int k = 1; k <= config.max_iter; ++k) {
      system.oracle_round(sample_active());
      system.advance_round();
      result.rounds = k;
      if (record(k) <= config.tol) {
        result.converged = true;
        break;
      }
    }
    return result;
  }

  // Mailboxes hold the last delivered payload per directed edge, seeded from
  // the initial state (an exact, drop-free exchange).
  std::vector<std::vector<MailboxEntry>> mailbox(N);  // mailbox[to] indexed by in-neighbor rank
  for (int i = 0; i < N; ++i) {
    mailbox[i].resize(g.degree(i));
    const auto& nb = g.neighbors(i);
    for (std::size_t r = 0; r < nb.size(); ++r)
      mailbox[i][r].payload = system.outgoing_payload(nb[r], i);
  }
  const auto inbox_for = [&](int to) {
    return Inbox([&mailbox, &g, to](int from) -> const Vec& {
      const auto& nb = g.neighbors(to);
      const auto it = std::lower_bound(nb.begin(), nb.end(), from);
      return mailbox[to][static_cast<std::size_t>(it - nb.begin())].payload;
    });
  };

  for (int k = 1; k <= config.max_iter; ++k) {
    const std::vector<char> active = sample_active();

    for (int i = 0; i < N; ++i)
      if (active[i]) system.phase_a(i, inbox_for(i));

    for (int i = 0; i < N; ++i) {
      if (!active[i]) continue;
      const auto& nb = g.neighbors(i);
      for (int j : nb) {
        ++sent;
        const auto& to_nb = g.neighbors(j);
        const auto rank =
            static_cast<std::size_t>(std::lower_bound(to_nb.begin(), to_nb.end(), i) - to_nb.begin());
        MailboxEntry& entry = mailbox[j][rank];
        if (imp.p_loss > 0.0 && rng.bernoulli(imp.p_loss)) {
          ++dropped;
          ++entry.staleness;
        } else {
          Vec payload = system.outgoing_payload(i, j);
          entry.payload = imp.quant_step ? quantize(payload, *imp.quant_step) : std::move(payload);
          entry.staleness = 0;
        }
      }
    }

    if (system.has_phase_c())
      for (int i = 0; i < N; ++i)
        if (active[i]) system.phase_c(i, inbox_for(i));

    system.advance_round();
    result.rounds = k;
    if (record(k) <= config.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

// --- inexact operators -------------------------------------------------------

ErrorModel ErrorModel::bounded(double eps) {
  if (eps < 0.0) throw std::invalid_argument("ErrorModel: eps must be non-negative");
  return {Kind::bounded, eps, 0.0};
}

ErrorModel ErrorModel::summable(double eps0, double rate) {
  if (eps0 < 0.0) throw std::invalid_argument("ErrorModel: eps0 must be non-negative");
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("ErrorModel: rate must be in (0,1)");
  return {Kind::summable, eps0, rate};
}

double ErrorModel::magnitude(int k) const {
  return kind == Kind::bounded ? eps0 : eps0 * std::pow(rate, k);
}

InexactOperator::InexactOperator(Operator base, ErrorModel model, std::uint64_t seed)
    : base_(std::move(base)), model_(model), seed_(seed) {}

Vec InexactOperator::eval(const Vec& x, int k) const {
  Vec out = base_(x);
  const double mag = model_.magnitude(k);
  if (mag > 0.0) {
    Rng rng(derive_seed(seed_, static_cast<std::uint64_t>(k)));
    out += mag * rng.unit_sphere(base_.dim());
  }
  return out;
}

IterationTrace inexact_picard_iterate(const InexactOperator& T, const Vec& x0,
                                      const IterateOptions& opts) {
  if (x0.size() != T.dim()) throw std::invalid_argument("inexact_picard_iterate: dimension mismatch");
  IterationTrace trace;
  if (opts.reference) trace.distances.emplace();
  Vec x = x0;
  for (int k = 0;; ++k) {
    const Vec tx = T.eval(x, k);
    const double residual = (x - tx).norm();
    trace.iterates.push_back(x);
    trace.residuals.push_back(residual);
    if (opts.reference) trace.distances->push_back((x - *opts.reference).norm());
    if (residual <= opts.tol || k == opts.max_iter) break;
    x = tx;
    check_state(x);
  }
  return trace;
}

}  // namespace opsim
