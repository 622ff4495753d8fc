// Experiment harness: builds problems/algorithms from a Config, runs them,
// and writes the artifacts (telemetry CSV, summary JSON, bound report).
#pragma once

#include <filesystem>
#include <string>

#include "opsim/config.hpp"
#include "opsim/simulate.hpp"

namespace opsim {

/// Exit codes shared with the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitDivergence = 3,
  kExitIoError = 4,
};

struct BuiltExperiment {
  ConsensusProblem problem;
  AlgorithmParams params;
  SimulationConfig sim;
  Config effective;  // every key with defaults resolved
};

/// Validates the config and materializes problem, network, algorithm and
/// simulation settings. Throws ConfigError with the offending key.
BuiltExperiment build_experiment(const Config& cfg);

struct ExperimentOutcome {
  SimulationResult result;
  bool bounds_ok = true;                 // all applicable bound checks passed
  double final_optimality_error = -1.0;  // -1 when no reference
  std::filesystem::path telemetry_csv;
  std::filesystem::path summary_json;
  std::filesystem::path bound_report;
};

/// Runs one experiment and writes telemetry.csv, summary.json and
/// bound_report.txt under out_dir.
ExperimentOutcome run_experiment(const Config& cfg, const std::filesystem::path& out_dir,
                                 bool quiet = false);

/// Runs the experiment once per value of `key`, each in its own subdirectory
/// with a deterministically derived child seed, and writes sweep_report.txt.
/// Returns true when the asymptotic optimality errors strictly decrease along
/// the given value order.
bool run_sweep(const Config& cfg, const std::string& key, const std::vector<std::string>& values,
               const std::filesystem::path& out_dir, bool quiet = false);

/// Operator property checks for the configured network and costs; returns
/// true when all certificates hold. Prints one line per check unless quiet.
bool run_certify(const Config& cfg, bool quiet = false);

}  // namespace opsim
