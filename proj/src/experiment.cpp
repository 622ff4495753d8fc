#include "opsim/experiment.hpp"

#include <fstream>
#include <iostream>
#include <json.hpp>

#include "opsim/catalog.hpp"
#include "opsim/errors.hpp"
#include "opsim/format.hpp"
#include "opsim/random.hpp"
#include "opsim/reference.hpp"

namespace opsim {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::vector<std::string> kKnownKeys = {
    "problem.kind", "problem.n",      "problem.seed",   "problem.centers", "problem.curvatures",
    "problem.delta", "problem.reg",   "problem.data",   "graph.kind",      "graph.n",
    "graph.p",      "graph.seed",     "graph.file",     "graph.lazy",      "algo.kind",
    "algo.rho",     "algo.alpha",     "algo.schedule",  "algo.rho0",       "algo.gamma",
    "sim.p_act",    "sim.p_loss",     "sim.quantizer",  "sim.delta",       "sim.seed",
    "sim.max_iter", "sim.tol",        "out.dir",
};

Graph build_graph(const Config& cfg, Config& echo) {
  const std::string kind = cfg.get_string("graph.kind", "path");
  echo.set("graph.kind", kind);
  if (kind == "file") {
    const std::string path = cfg.get_string("graph.file");
    echo.set("graph.file", path);
    try {
      Graph g = Graph::load_edge_list(path);
      echo.set("graph.n", std::to_string(g.n_agents()));
      return g;
    } catch (const std::exception& e) {
      throw ConfigError("graph.file", e.what());
    }
  }
  const long n = cfg.get_int("graph.n", 3);
  if (n < 1) throw ConfigError("graph.n", "must be at least 1");
  echo.set("graph.n", std::to_string(n));
  try {
    if (kind == "ring") return Graph::ring(int(n));
    if (kind == "path") return Graph::path(int(n));
    if (kind == "complete") return Graph::complete(int(n));
    if (kind == "random") {
      const double p = cfg.get_double("graph.p", 0.4);
      const std::uint64_t seed = cfg.get_seed("graph.seed", 0);
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("graph.p", "must be in (0,1]");
      echo.set("graph.p", fmt_double(p));
      echo.set("graph.seed", std::to_string(seed));
      return Graph::random_gnp(int(n), p, seed);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("graph.n", e.what());
  }
  throw ConfigError("graph.kind", "must be ring|path|complete|random|file");
}

std::vector<CostFunction> build_costs(const Config& cfg, int n_agents, Config& echo) {
  const std::string kind = cfg.get_string("problem.kind", "quadratic");
  echo.set("problem.kind", kind);
  const std::uint64_t seed = cfg.get_seed("problem.seed", 0);
  Rng rng(seed);
  std::vector<CostFunction> costs;

  if (kind == "quadratic" || kind == "huber") {
    const long n = cfg.get_int("problem.n", 1);
    if (n < 1) throw ConfigError("problem.n", "must be at least 1");
    echo.set("problem.n", std::to_string(n));
    const double delta = cfg.get_double("problem.delta", 1.0);
    if (kind == "huber") {
      if (!(delta > 0.0)) throw ConfigError("problem.delta", "must be positive");
      echo.set("problem.delta", fmt_double(delta));
    }
    if (cfg.has("problem.centers")) {
      if (n != 1) throw ConfigError("problem.centers", "explicit centers require problem.n = 1");
      const auto centers = cfg.get_double_list("problem.centers");
      if (int(centers.size()) != n_agents)
        throw ConfigError("problem.centers", "need one center per agent");
      echo.set("problem.centers", cfg.get_string("problem.centers"));
      std::vector<double> curv(n_agents, 1.0);
      if (cfg.has("problem.curvatures")) {
        const auto list = cfg.get_double_list("problem.curvatures");
        if (int(list.size()) != n_agents)
          throw ConfigError("problem.curvatures", "need one curvature per agent");
        for (double c : list)
          if (!(c > 0.0)) throw ConfigError("problem.curvatures", "must be positive");
        curv = list;
        echo.set("problem.curvatures", cfg.get_string("problem.curvatures"));
      }
      for (int i = 0; i < n_agents; ++i) {
        Vec a(1);
        a[0] = centers[i];
        if (kind == "quadratic") {
          costs.push_back(make_scalar_quadratic(curv[i], centers[i]));
        } else {
          costs.push_back(make_huber(1, delta, a));
        }
      }
      return costs;
    }
    // Seeded generation.
    echo.set("problem.seed", std::to_string(seed));
    for (int i = 0; i < n_agents; ++i) {
      const Vec center = 2.0 * rng.gaussian_vector(int(n));
      if (kind == "quadratic") {
        Mat b(n, n);
        for (int r = 0; r < n; ++r) b.row(r) = rng.gaussian_vector(int(n)).transpose();
        Mat q = b * b.transpose() / double(n) + 0.5 * Mat::Identity(n, n);
        costs.push_back(make_quadratic(q, center));
      } else {
        costs.push_back(make_huber(int(n), delta, center));
      }
    }
    return costs;
  }

  if (kind == "least_squares") {
    const long n = cfg.get_int("problem.n", 2);
    if (n < 1) throw ConfigError("problem.n", "must be at least 1");
    echo.set("problem.n", std::to_string(n));
    echo.set("problem.seed", std::to_string(seed));
    const long rows = n + 2;
    for (int i = 0; i < n_agents; ++i) {
      Mat a(rows, n);
      for (int r = 0; r < rows; ++r) a.row(r) = rng.gaussian_vector(int(n)).transpose();
      costs.push_back(make_least_squares(a / std::sqrt(double(rows)), rng.gaussian_vector(int(rows))));
    }
    return costs;
  }

  if (kind == "logistic") {
    const std::string path = cfg.get_string("problem.data");
    echo.set("problem.data", path);
    const double reg = cfg.get_double("problem.reg", 0.0);
    if (reg < 0.0) throw ConfigError("problem.reg", "must be non-negative");
    echo.set("problem.reg", fmt_double(reg));
    LabeledMatrix data;
    try {
      data = load_labeled_matrix(path);
    } catch (const std::exception& e) {
      throw ConfigError("problem.data", e.what());
    }
    echo.set("problem.n", std::to_string(data.data.cols()));
    // Round-robin row split.
    for (int i = 0; i < n_agents; ++i) {
      std::vector<Eigen::Index> mine;
      for (Eigen::Index r = i; r < data.data.rows(); r += n_agents) mine.push_back(r);
      if (mine.empty())
        throw ConfigError("problem.data", "agent " + std::to_string(i) + " received no datapoints");
      Mat shard(mine.size(), data.data.cols());
      Vec labels(mine.size());
      for (std::size_t r = 0; r < mine.size(); ++r) {
        shard.row(Eigen::Index(r)) = data.data.row(mine[r]);
        labels[Eigen::Index(r)] = data.labels[mine[r]];
      }
      try {
        costs.push_back(make_logistic_erm(shard, labels, reg));
      } catch (const std::exception& e) {
        throw ConfigError("problem.data", e.what());
      }
    }
    return costs;
  }

  throw ConfigError("problem.kind", "must be quadratic|huber|least_squares|logistic");
}

AlgorithmKind parse_algorithm(const std::string& name) {
  if (name == "exact_pg") return AlgorithmKind::exact_pg;
  if (name == "atc") return AlgorithmKind::atc;
  if (name == "dgd") return AlgorithmKind::dgd;
  if (name == "gradient_tracking") return AlgorithmKind::gradient_tracking;
  if (name == "gt_primal_dual") return AlgorithmKind::gt_primal_dual;
  if (name == "admm") return AlgorithmKind::admm;
  if (name == "lagrangian_admm") return AlgorithmKind::lagrangian_admm;
  throw ConfigError("algo.kind",
                    "must be atc|dgd|gradient_tracking|gt_primal_dual|admm|exact_pg|"
                    "lagrangian_admm");
}

bool is_admm_family(AlgorithmKind kind) {
  return kind == AlgorithmKind::admm || kind == AlgorithmKind::lagrangian_admm;
}

}  // namespace

BuiltExperiment build_experiment(const Config& cfg) {
  cfg.require_known_keys(kKnownKeys);
  Config echo;

  Graph graph = build_graph(cfg, echo);
  std::vector<CostFunction> costs = build_costs(cfg, graph.n_agents(), echo);

  const bool lazy = cfg.get_bool("graph.lazy", false);
  echo.set("graph.lazy", lazy ? "true" : "false");
  ConsensusMatrix weights = lazy ? lazy_metropolis_weights(graph) : metropolis_weights(graph);
  ConsensusProblem problem(std::move(costs), std::move(weights));

  const std::string algo_name = cfg.get_string("algo.kind", "atc");
  echo.set("algo.kind", algo_name);
  const AlgorithmKind kind = parse_algorithm(algo_name);

  double default_rho = 1.0;
  if (!is_admm_family(kind)) {
    const double smooth = problem.max_smoothness();
    default_rho = smooth > 0.0 ? 1.0 / smooth : 1.0;
  }
  const double rho = cfg.get_double("algo.rho", default_rho);
  if (!(rho > 0.0)) throw ConfigError("algo.rho", "must be positive");
  echo.set("algo.rho", fmt_double(rho));

  AlgorithmParams params;
  params.kind = kind;
  params.schedule = StepSizeSchedule::constant(rho);

  const std::string schedule = cfg.get_string("algo.schedule", "constant");
  echo.set("algo.schedule", schedule);
  if (schedule == "diminishing") {
    if (kind != AlgorithmKind::atc && kind != AlgorithmKind::dgd)
      throw ConfigError("algo.schedule", "diminishing schedules apply to atc and dgd only");
    const double rho0 = cfg.get_double("algo.rho0", rho);
    const double gamma = cfg.get_double("algo.gamma", 1.0);
    if (!(rho0 > 0.0)) throw ConfigError("algo.rho0", "must be positive");
    if (!(gamma > 0.5 && gamma <= 1.0)) throw ConfigError("algo.gamma", "must be in (0.5, 1]");
    params.schedule = StepSizeSchedule::diminishing(rho0, gamma);
    echo.set("algo.rho0", fmt_double(rho0));
    echo.set("algo.gamma", fmt_double(gamma));
  } else if (schedule != "constant") {
    throw ConfigError("algo.schedule", "must be constant|diminishing");
  }

  if (is_admm_family(kind)) {
    const double alpha = cfg.get_double("algo.alpha", 0.5);
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("algo.alpha", "must be in (0,1)");
    params.admm_alpha = alpha;
    echo.set("algo.alpha", fmt_double(alpha));
  }

  SimulationConfig sim;
  sim.imperfections.p_act = cfg.get_double("sim.p_act", 1.0);
  if (!(sim.imperfections.p_act > 0.0 && sim.imperfections.p_act <= 1.0))
    throw ConfigError("sim.p_act", "must be in (0,1]");
  sim.imperfections.p_loss = cfg.get_double("sim.p_loss", 0.0);
  if (!(sim.imperfections.p_loss >= 0.0 && sim.imperfections.p_loss < 1.0))
    throw ConfigError("sim.p_loss", "must be in [0,1)");
  const std::string quantizer = cfg.get_string("sim.quantizer", "none");
  echo.set("sim.quantizer", quantizer);
  if (quantizer == "uniform") {
    const double delta = cfg.get_double("sim.delta");
    if (!(delta > 0.0)) throw ConfigError("sim.delta", "must be positive");
    sim.imperfections.quant_step = delta;
    echo.set("sim.delta", fmt_double(delta));
  } else if (quantizer != "none") {
    throw ConfigError("sim.quantizer", "must be none|uniform");
  }
  sim.imperfections.seed = cfg.get_seed("sim.seed", 0);
  sim.max_iter = int(cfg.get_int("sim.max_iter", 10000));
  if (sim.max_iter < 1) throw ConfigError("sim.max_iter", "must be positive");
  sim.tol = cfg.get_double("sim.tol", 1e-10);
  if (!(sim.tol >= 0.0)) throw ConfigError("sim.tol", "must be non-negative");
  echo.set("sim.p_act", fmt_double(sim.imperfections.p_act));
  echo.set("sim.p_loss", fmt_double(sim.imperfections.p_loss));
  echo.set("sim.seed", std::to_string(sim.imperfections.seed));
  echo.set("sim.max_iter", std::to_string(sim.max_iter));
  echo.set("sim.tol", fmt_double(sim.tol));

  if (is_oracle_algorithm(kind)) {
    if (sim.imperfections.p_loss > 0.0)
      throw ConfigError("sim.p_loss", "not supported for oracle algorithm " + algo_name);
    if (sim.imperfections.quant_step)
      throw ConfigError("sim.quantizer", "not supported for oracle algorithm " + algo_name);
  }

  return {std::move(problem), params, sim, std::move(echo)};
}

namespace {

struct ReportLine {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Applicable convergence-theory checks for one finished run; needs the
// recorded state history where envelope bounds are involved.
std::vector<ReportLine> bound_checks(const BuiltExperiment& built, const SimulationResult& res,
                                     const ReferenceSolution& ref) {
  std::vector<ReportLine> lines;
  const auto& tel = res.telemetry;
  const auto& imp = built.sim.imperfections;
  const bool synchronous = imp.p_act == 1.0 && imp.p_loss == 0.0 && !imp.quant_step;
  const AlgorithmKind kind = built.params.kind;

  {  // counters never decrease
    bool ok = true;
    for (std::size_t i = 1; i < tel.size(); ++i)
      ok = ok && tel[i].messages_sent >= tel[i - 1].messages_sent &&
           tel[i].messages_dropped >= tel[i - 1].messages_dropped &&
           tel[i].grad_evals >= tel[i - 1].grad_evals && tel[i].prox_evals >= tel[i - 1].prox_evals;
    lines.push_back({"monotone_counters", ok, ""});
  }

  lines.push_back({"fixed_point_residual_le_tol", res.converged,
                   "final residual " + fmt_double(tel.back().fp_residual)});

  const double final_err = tel.back().optimality_error.value_or(-1.0);
  const double initial_err = tel.front().optimality_error.value_or(-1.0);

  if (synchronous) {
    const bool exact_family = kind == AlgorithmKind::exact_pg ||
                              kind == AlgorithmKind::gradient_tracking ||
                              kind == AlgorithmKind::gt_primal_dual || is_admm_family(kind);
    if (exact_family)
      lines.push_back({"exact_convergence_to_reference", final_err >= 0.0 && final_err <= 1e-5,
                       "max_i ||x_i - x*|| = " + fmt_double(final_err)});
    if ((kind == AlgorithmKind::atc || kind == AlgorithmKind::dgd) &&
        built.params.schedule.is_constant()) {
      const Graph& g = built.problem.graph();
      const bool complete = g.n_edges() == g.n_agents() * (g.n_agents() - 1) / 2;
      if (!complete)
        lines.push_back({"constant_step_bias", res.converged && final_err > 1e-12,
                         "converged to a biased point at distance " + fmt_double(final_err)});
    }
    if ((kind == AlgorithmKind::atc || kind == AlgorithmKind::dgd) &&
        !built.params.schedule.is_constant())
      lines.push_back({"diminishing_step_progress", final_err >= 0.0 && final_err <= 1e-3,
                       "max_i ||x_i - x*|| = " + fmt_double(final_err)});
  } else {
    if (is_admm_family(kind))
      lines.push_back({"robust_convergence_to_reference", final_err >= 0.0 && final_err <= 1e-5,
                       "max_i ||x_i - x*|| = " + fmt_double(final_err)});
    if (kind == AlgorithmKind::gradient_tracking && imp.p_loss > 0.0)
      lines.push_back({"tracking_fragility_under_loss", final_err > 1e-3,
                       "max_i ||x_i - x*|| = " + fmt_double(final_err)});
    if (kind == AlgorithmKind::atc || kind == AlgorithmKind::dgd)
      lines.push_back({"stable_biased_neighborhood",
                       final_err >= 0.0 && final_err <= 0.5 * initial_err,
                       "error " + fmt_double(final_err) + " from " + fmt_double(initial_err)});
  }

  if (imp.p_loss > 0.0 && tel.back().messages_sent >= 10000) {
    const double rate =
        double(tel.back().messages_dropped) / double(tel.back().messages_sent);
    lines.push_back({"drop_rate_matches_p_loss", std::abs(rate - imp.p_loss) <= 0.02,
                     "measured " + fmt_double(rate)});
  }

  // Envelope checks against the recorded trajectory; the converged final
  // state stands in for the fixed point (slack absorbs its tol-level error).
  const auto& hist = res.state_history;
  constexpr double kEnvelopeSlack = 1e-6;
  if (synchronous && res.converged && hist.size() >= 3) {
    if (kind == AlgorithmKind::admm) {
      // The auxiliary dynamics is the relaxed iteration of a non-expansive
      // map, so its residuals obey the sub-linear envelope.
      const double alpha = built.params.admm_alpha;
      const Eigen::Index zdim = hist.front().size() - built.problem.stacked_dim();
      const auto zpart = [&](const Vec& s) { return Vec(s.tail(zdim)); };
      const double d0 = (zpart(hist.front()) - zpart(hist.back())).norm();
      const double c = std::sqrt(alpha / (1.0 - alpha)) * d0;
      bool ok = true;
      double worst = 0.0;
      for (std::size_t k = 0; k + 1 < hist.size(); ++k) {
        const double residual = (zpart(hist[k + 1]) - zpart(hist[k])).norm() / alpha;
        const double excess = residual - c / std::sqrt(double(k) + 1.0);
        worst = std::max(worst, excess);
        ok = ok && excess <= kEnvelopeSlack;
      }
      lines.push_back({"km_residual_envelope", ok, "worst excess " + fmt_double(worst)});
    }
    if (kind == AlgorithmKind::atc && built.params.schedule.is_constant()) {
      // With uniformly strongly convex costs the adapt step is contractive and
      // the combine step non-expansive, giving a geometric envelope.
      double zeta = 0.0;
      bool certified = true;
      const double rho = built.params.schedule.base();
      for (const auto& c : built.problem.costs()) {
        const double sc = c.strong_convexity().value_or(0.0);
        const double smooth = c.smoothness().value_or(0.0);
        if (sc <= 0.0 || smooth <= 0.0 || rho >= 2.0 / smooth) {
          certified = false;
          break;
        }
        zeta = std::max(zeta, std::max(std::abs(1.0 - rho * sc), std::abs(1.0 - rho * smooth)));
      }
      if (certified) {
        bool ok = true;
        double worst = 0.0;
        double allowed = (hist.front() - hist.back()).norm();
        for (std::size_t k = 0; k < hist.size(); ++k) {
          const double excess = (hist[k] - hist.back()).norm() - allowed;
          worst = std::max(worst, excess);
          ok = ok && excess <= kEnvelopeSlack;
          allowed *= zeta;
        }
        lines.push_back({"contraction_envelope", ok,
                         "zeta = " + fmt_double(zeta) + ", worst excess " + fmt_double(worst)});
      }
    }
  }

  (void)ref;
  return lines;
}

void write_bound_report(const std::filesystem::path& path, const std::vector<ReportLine>& lines) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path.string());
  for (const auto& line : lines) {
    out << (line.pass ? "[PASS] " : "[FAIL] ") << line.name;
    if (!line.detail.empty()) out << ": " << line.detail;
    out << '\n';
  }
}

ordered_json vec_to_json(const Vec& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

ExperimentOutcome run_experiment(const Config& cfg, const std::filesystem::path& out_dir,
                                 bool quiet) {
  BuiltExperiment built = build_experiment(cfg);

  ReferenceSolution ref = solve_reference(built.problem);
  built.problem.set_reference(ref.x_star);

  auto system =
      make_agent_system(built.problem, built.params, Vec::Zero(built.problem.stacked_dim()));
  // Keep the full trajectory for envelope checks while the memory cost is small.
  built.sim.record_states =
      (long long)(built.sim.max_iter + 1) * system->full_state().size() <= 4000000;
  SimulationResult result = run_simulation(*system, built.sim);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::ios_base::failure("cannot create output directory " + out_dir.string());

  ExperimentOutcome outcome;
  outcome.telemetry_csv = out_dir / "telemetry.csv";
  outcome.summary_json = out_dir / "summary.json";
  outcome.bound_report = out_dir / "bound_report.txt";

  {
    std::ofstream csv(outcome.telemetry_csv, std::ios::binary);
    if (!csv) throw std::ios_base::failure("cannot write " + outcome.telemetry_csv.string());
    write_telemetry_csv(result.telemetry, csv);
  }

  const auto lines = bound_checks(built, result, ref);
  write_bound_report(outcome.bound_report, lines);
  outcome.bounds_ok = true;
  for (const auto& line : lines) outcome.bounds_ok = outcome.bounds_ok && line.pass;

  ordered_json summary;
  summary["config"] = ordered_json::object();
  for (const auto& [key, value] : built.effective.values()) summary["config"][key] = value;
  summary["reference"] = {{"method", ref.method},
                          {"residual", ref.residual},
                          {"x_star", vec_to_json(ref.x_star)}};
  const auto& last = result.telemetry.back();
  summary["result"] = {
      {"converged", result.converged},
      {"rounds", result.rounds},
      {"final_fp_residual", last.fp_residual},
      {"final_optimality_error",
       last.optimality_error ? ordered_json(*last.optimality_error) : ordered_json(nullptr)},
      {"final_consensus_error", last.consensus_error},
      {"messages_sent", last.messages_sent},
      {"messages_dropped", last.messages_dropped},
      {"grad_evals", last.grad_evals},
      {"prox_evals", last.prox_evals},
  };
  ordered_json agents = ordered_json::array();
  for (int i = 0; i < built.problem.n_agents(); ++i) agents.push_back(vec_to_json(system->primal(i)));
  summary["final_state"] = {{"agents", agents}};
  {
    std::ofstream js(outcome.summary_json, std::ios::binary);
    if (!js) throw std::ios_base::failure("cannot write " + outcome.summary_json.string());
    js << summary.dump(2) << '\n';
  }

  outcome.final_optimality_error = last.optimality_error.value_or(-1.0);
  outcome.result = std::move(result);

  if (!quiet) {
    std::cout << "run: " << (outcome.result.converged ? "converged" : "budget exhausted") << " after "
              << outcome.result.rounds << " rounds";
    if (outcome.final_optimality_error >= 0.0)
      std::cout << ", max_i ||x_i - x*|| = " << fmt_double(outcome.final_optimality_error);
    std::cout << "\nartifacts: " << out_dir.string() << '\n';
    for (const auto& line : lines)
      std::cout << (line.pass ? "[PASS] " : "[FAIL] ") << line.name
                << (line.detail.empty() ? "" : ": " + line.detail) << '\n';
  }
  return outcome;
}

bool run_sweep(const Config& cfg, const std::string& key, const std::vector<std::string>& values,
               const std::filesystem::path& out_dir, bool quiet) {
  if (values.empty()) throw ConfigError(key, "sweep needs at least one value");
  const std::uint64_t base_seed = cfg.get_seed("sim.seed", 0);

  std::vector<double> errors;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::ios_base::failure("cannot create output directory " + out_dir.string());

  std::ofstream report(out_dir / "sweep_report.txt");
  if (!report) throw std::ios_base::failure("cannot write sweep report");
  report << "sweep key: " << key << '\n';

  for (std::size_t i = 0; i < values.size(); ++i) {
    Config child = cfg;
    child.set(key, values[i]);
    child.set("sim.seed", std::to_string(derive_seed(base_seed, i)));
    const auto dir = out_dir / ("value_" + std::to_string(i));
    const auto outcome = run_experiment(child, dir, /*quiet=*/true);
    errors.push_back(outcome.final_optimality_error);
    report << key << " = " << values[i]
           << "  final_optimality_error = " << fmt_double(outcome.final_optimality_error)
           << (outcome.result.converged ? "  (converged)" : "  (budget exhausted)") << '\n';
    if (!quiet)
      std::cout << key << " = " << values[i]
                << " -> error " << fmt_double(outcome.final_optimality_error) << '\n';
  }

  bool decreasing = true;
  for (std::size_t i = 1; i < errors.size(); ++i)
    decreasing = decreasing && errors[i] < errors[i - 1];
  report << "asymptotic errors strictly decreasing: " << (decreasing ? "yes" : "no") << '\n';
  if (!quiet)
    std::cout << "asymptotic errors strictly decreasing: " << (decreasing ? "yes" : "no") << '\n';
  return decreasing;
}

bool run_certify(const Config& cfg, bool quiet) {
  BuiltExperiment built = build_experiment(cfg);
  const ConsensusProblem& p = built.problem;
  const std::uint64_t seed = built.sim.imperfections.seed;
  bool all_ok = true;

  const auto emit = [&](const std::string& name, bool ok, const std::string& detail) {
    all_ok = all_ok && ok;
    if (!quiet)
      std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << (detail.empty() ? "" : ": " + detail)
                << '\n';
  };

  const ConsensusMatrix& w = p.network();
  emit("weights_symmetric", w.symmetric, "");
  emit("weights_doubly_stochastic", w.row_stochastic && w.column_stochastic, "");
  try {
    const double alpha = certify_spectrum(w);
    emit("spectrum_certified", true,
         "lambda_min = " + fmt_double(w.eigenvalues.minCoeff()) + ", alpha = " + fmt_double(alpha));
    const auto avg = check_averaged(consensus_operator(w, p.block_dim()), alpha,
                                    gaussian_pair_sampler(p.stacked_dim()), 1000, seed);
    emit("consensus_operator_averaged", avg.holds,
         "worst violation " + fmt_double(avg.worst_violation));
  } catch (const std::exception& e) {
    emit("spectrum_certified", false, e.what());
  }

  for (int i = 0; i < p.n_agents(); ++i) {
    const auto& cost = p.cost(i);
    const std::string tag = "cost[" + std::to_string(i) + "]";
    if (cost.has_gradient() && cost.smoothness()) {
      const double smooth = *cost.smoothness();
      const double rho = smooth > 0.0 ? 1.0 / smooth : 1.0;
      const Operator grad_step = gradient_step_op(cost, rho);
      const double cert = grad_step.property().lipschitz_bound();
      const double estimate = estimate_lipschitz(grad_step, directional_pair_sampler(cost.dim()),
                                                 2000, derive_seed(seed, 100 + i));
      emit(tag + "_gradient_step_lipschitz", estimate <= cert + 1e-6,
           "estimate " + fmt_double(estimate) + " vs certificate " + fmt_double(cert));
    }
    const auto firm = check_averaged(prox_op(cost, 1.0), 0.5, gaussian_pair_sampler(cost.dim()),
                                     200, derive_seed(seed, 200 + i));
    emit(tag + "_prox_firmly_nonexpansive", firm.holds,
         "worst violation " + fmt_double(firm.worst_violation));
  }
  return all_ok;
}

}  // namespace opsim
