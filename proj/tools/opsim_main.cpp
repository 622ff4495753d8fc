// opsim command line: run / sweep / certify / presets.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "opsim/errors.hpp"
#include "opsim/experiment.hpp"

namespace {

namespace fs = std::filesystem;

opsim::Config load_config(const std::string& path, const std::vector<std::string>& overrides) {
  opsim::Config cfg = opsim::Config::parse_file(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw opsim::ConfigError(kv, "--set expects key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

fs::path resolve_out_dir(const opsim::Config& cfg, const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  return cfg.get_string("out.dir", "out");
}

std::vector<std::string> split_values(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(csv);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int list_presets(const std::string& dir_flag) {
  std::vector<fs::path> candidates;
  if (!dir_flag.empty()) {
    candidates.push_back(dir_flag);
  } else {
    candidates.push_back("presets");
    candidates.push_back("../presets");
  }
  for (const auto& dir : candidates) {
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".cfg") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      std::cout << file.string();
      std::ifstream in(file);
      std::string first;
      if (std::getline(in, first) && first.rfind("# ", 0) == 0)
        std::cout << "  -- " << first.substr(2);
      std::cout << '\n';
    }
    return opsim::kExitOk;
  }
  std::cerr << "no preset directory found (looked for ./presets)\n";
  return opsim::kExitIoError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator-splitting simulator for multi-agent optimization"};
  app.require_subcommand(1);

  std::string config_path, out_flag, sweep_key, sweep_values, preset_dir;
  std::vector<std::string> overrides;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "experiment config file");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_flag, "output directory");
    cmd->add_option("--set", overrides, "override a config key (key=value)");
    cmd->add_flag("--quiet", quiet, "suppress progress output");
  };

  auto* run_cmd = app.add_subcommand("run", "run one experiment and write artifacts");
  add_common(run_cmd, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "run the experiment once per value of one key");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--key", sweep_key, "config key to vary")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated value list")->required();

  auto* certify_cmd = app.add_subcommand("certify", "operator property checks only");
  add_common(certify_cmd, true);

  auto* presets_cmd = app.add_subcommand("presets", "list bundled example configs");
  presets_cmd->add_option("--dir", preset_dir, "preset directory (default ./presets)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets_cmd->parsed()) return list_presets(preset_dir);

    const opsim::Config cfg = load_config(config_path, overrides);
    if (run_cmd->parsed()) {
      opsim::run_experiment(cfg, resolve_out_dir(cfg, out_flag), quiet);
      return opsim::kExitOk;
    }
    if (sweep_cmd->parsed()) {
      const bool decreasing =
          opsim::run_sweep(cfg, sweep_key, split_values(sweep_values),
                           resolve_out_dir(cfg, out_flag), quiet);
      return decreasing ? opsim::kExitOk : opsim::kExitCheckFailed;
    }
    if (certify_cmd->parsed())
      return opsim::run_certify(cfg, quiet) ? opsim::kExitOk : opsim::kExitCheckFailed;
  } catch (const opsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return opsim::kExitConfigError;
  } catch (const opsim::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return opsim::kExitDivergence;
  } catch (const opsim::SolveError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return opsim::kExitDivergence;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return opsim::kExitIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return opsim::kExitIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return opsim::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return opsim::kExitIoError;
  }
  return opsim::kExitOk;
}
