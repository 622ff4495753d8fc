// Round-based execution engine. Wraps an algorithm's per-agent updates with
// the network imperfection models: Bernoulli agent activation, per-link packet
// loss with hold-last-value mailboxes, and uniform message quantization.
// Deterministic for a fixed seed.
#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "opsim/algorithms.hpp"
#include "opsim/iteration.hpp"

namespace opsim {

struct ImperfectionConfig {
  double p_act = 1.0;                 // per-agent activation probability, (0,1]
  double p_loss = 0.0;                // per-directed-edge drop probability, [0,1)
  std::optional<double> quant_step;   // uniform quantizer step, > 0
  std::uint64_t seed = 0;

  void validate() const;
};

/// Componentwise rounding to the nearest multiple of delta, ties to even.
Vec quantize(const Vec& v, double delta);

struct TelemetryRecord {
  int k = 0;
  std::optional<double> optimality_error;  // max_i ||x_i - x*||; empty without a reference
  double consensus_error = 0.0;            // max_i ||x_i - mean_j x_j||
  double fp_residual = 0.0;                // residual of one synchronous step on the full state
  long long messages_sent = 0;             // cumulative
  long long messages_dropped = 0;
  long long grad_evals = 0;
  long long prox_evals = 0;
};

/// Exact columns: k,optimality_error,consensus_error,fp_residual,
/// messages_sent,messages_dropped,grad_evals,prox_evals.
void write_telemetry_csv(const std::vector<TelemetryRecord>& records, std::ostream& os);

/// Latest delivered payload from a given sender.
using Inbox = std::function<const Vec&(int from)>;

/// A distributed algorithm decomposed into per-agent updates and messages.
/// Mailbox algorithms run in (up to) three phases per round: phase A computes
/// with the current mailboxes, then messages are emitted, then phase C (when
/// present) consumes the fresh deliveries. Oracle algorithms read true state
/// directly and only honor activation.
class AgentSystem {
 public:
  explicit AgentSystem(const ConsensusProblem& problem) : problem_(&problem) {}
  virtual ~AgentSystem() = default;

  const ConsensusProblem& problem() const { return *problem_; }
  int n_agents() const { return problem_->n_agents(); }
  int block_dim() const { return problem_->block_dim(); }

  virtual bool uses_mailboxes() const { return true; }
  virtual Vec outgoing_payload(int from, int to) const = 0;
  virtual void phase_a(int agent, const Inbox& inbox) = 0;
  virtual bool has_phase_c() const { return false; }
  virtual void phase_c(int /*agent*/, const Inbox& /*inbox*/) {}
  /// Direct update for oracle algorithms (uses_mailboxes() == false).
  virtual void oracle_round(const std::vector<char>& /*active*/) {}

  Vec primal(int agent) const;
  virtual Vec stacked_primal() const = 0;
  /// Full algorithm state (primal plus auxiliaries) for residuals/divergence.
  virtual Vec full_state() const = 0;
  virtual std::unique_ptr<AgentSystem> clone() const = 0;

  /// One exact synchronous step (all agents, true values); shared by the
  /// residual monitor and by imperfection-free execution semantics.
  void synchronous_round();

  int round_index() const { return round_; }
  long long grad_evals() const { return counters_.grad; }
  long long prox_evals() const { return counters_.prox; }
  void disable_counters() { counters_.enabled = false; }

  void advance_round() { ++round_; }

 protected:
  struct Counters {
    long long grad = 0;
    long long prox = 0;
    bool enabled = true;
  };
  void count_grad(long long k = 1) { counters_.grad += counters_.enabled ? k : 0; }
  void count_prox(long long k = 1) { counters_.prox += counters_.enabled ? k : 0; }

  const ConsensusProblem* problem_;
  int round_ = 0;

 private:
  int payload_snapshot_dim() const;

  Counters counters_;
};

enum class AlgorithmKind {
  exact_pg,
  atc,
  dgd,
  gradient_tracking,
  gt_primal_dual,
  admm,
  lagrangian_admm,
};

/// Whether the algorithm reads true state instead of exchanging messages
/// (exact_pg centralizes; gt_primal_dual applies a dense square-root factor).
bool is_oracle_algorithm(AlgorithmKind kind);

struct AlgorithmParams {
  AlgorithmKind kind = AlgorithmKind::atc;
  StepSizeSchedule schedule = StepSizeSchedule::constant(1.0);
  double admm_alpha = 0.5;
};

std::unique_ptr<AgentSystem> make_agent_system(const ConsensusProblem& p,
                                               const AlgorithmParams& params, const Vec& x0);

struct SimulationConfig {
  ImperfectionConfig imperfections;
  int max_iter = 10000;
  double tol = 1e-10;
  bool record_states = false;  // keep the full state per round (envelope checks)
};

struct SimulationResult {
  std::vector<TelemetryRecord> telemetry;
  std::vector<Vec> state_history;  // full states, one per telemetry row, when recorded
  bool converged = false;
  int rounds = 0;
};

/// Runs the system for up to max_iter rounds, recording one telemetry row per
/// round (plus the initial state at k = 0); stops early once the fixed-point
/// residual of the full state reaches tol. Throws DivergenceError when a
/// coordinate leaves the trusted region.
SimulationResult run_simulation(AgentSystem& system, const SimulationConfig& config);

// --- inexact operators -------------------------------------------------------

/// Additive evaluation-error models: constant bound or geometrically summable.
struct ErrorModel {
  enum class Kind { bounded, summable };
  Kind kind = Kind::bounded;
  double eps0 = 0.0;
  double rate = 0.0;  // summable: magnitude eps0 * rate^k

  static ErrorModel bounded(double eps);
  static ErrorModel summable(double eps0, double rate);
  double magnitude(int k) const;
};

/// T plus a seeded error of the configured magnitude: x -> T(x) + e_k with
/// ||e_k|| equal to the model magnitude at round k.
class InexactOperator {
 public:
  InexactOperator(Operator base, ErrorModel model, std::uint64_t seed);
  int dim() const { return base_.dim(); }
  Vec eval(const Vec& x, int k) const;

 private:
  Operator base_;
  ErrorModel model_;
  std::uint64_t seed_;
};

/// Picard iteration of an inexact operator (round index drives the errors).
IterationTrace inexact_picard_iterate(const InexactOperator& T, const Vec& x0,
                                      const IterateOptions& opts);

}  // namespace opsim
