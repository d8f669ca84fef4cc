// replaylab: run bandit A/B experiments under the naive and replay designs.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "replaylab/config.hpp"
#include "replaylab/harness.hpp"

namespace {

using namespace replaylab;

constexpr int kExitConfig = 2;
constexpr int kExitBatteryFailed = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::vector<std::size_t> horizons;
  std::optional<std::size_t> m_ci;
  std::optional<std::size_t> m_var;
};

// Config file < environment < command line.
void apply(ExperimentConfig& config, const Overrides& o) {
  apply_env_overrides(config);
  if (o.seed) config.master_seed = *o.seed;
  if (o.workers) config.workers = std::max<std::size_t>(*o.workers, 1);
  if (!o.horizons.empty()) config.horizons = o.horizons;
  if (o.m_ci) config.m_ci = *o.m_ci;
  if (o.m_var) config.m_var = *o.m_var;
  validate(config);
}

void emit(const CsvTable& table, const std::string& out) {
  if (out.empty() || out == "-") {
    write_csv(std::cout, table);
  } else {
    emit_csv(table, out);
  }
}

std::ostream& open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compare two bandit policies with naive and artificial-replay experiments"};
  app.require_subcommand(1);

  Overrides ov;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", ov.seed, "Master seed (overrides REPLAYLAB_SEED and the config)");
    sub->add_option("--workers", ov.workers, "Worker threads for replications");
    sub->add_option("--horizons", ov.horizons, "Horizons to evaluate (overrides the config)");
    sub->add_option("--m-ci", ov.m_ci, "Replications behind each confidence interval");
    sub->add_option("--m-var", ov.m_var, "Replications behind variances and interaction counts");
  };

  std::string config_path, out_path, trace_path;
  std::size_t trace_horizon = 10, trace_runs = 1;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Output CSV (default: stdout)");
  run->add_option("--trace", trace_path, "Also dump AR trajectories to this CSV");
  run->add_option("--trace-horizon", trace_horizon, "Horizon of the dumped trajectories")->check(CLI::PositiveNumber);
  run->add_option("--trace-runs", trace_runs, "Number of dumped runs")->check(CLI::PositiveNumber);
  add_common(run);

  bool print_config = false;
  std::vector<CLI::App*> presets;
  for (const char* name : {"example1", "example2", "example3"}) {
    auto* sub = app.add_subcommand(name, std::string("Built-in preset ") + name);
    sub->add_option("--out", out_path, "Output CSV (default: stdout)");
    sub->add_flag("--print-config", print_config, "Print the preset as JSON and exit");
    add_common(sub);
    presets.push_back(sub);
  }

  std::optional<std::size_t> eq_runs, eq_horizon;
  auto* equivalence = app.add_subcommand("equivalence", "Check AR against the shared-stack and naive designs");
  equivalence->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  equivalence->add_option("--runs", eq_runs, "Replications per design (default 10000)");
  equivalence->add_option("--horizon", eq_horizon, "Horizon (default: the config's first horizon)");
  equivalence->add_option("--out", out_path, "Output CSV (default: stdout)");
  add_common(equivalence);

  auto* bayes = app.add_subcommand("bayes", "Bayesian AR estimate over instances drawn from a prior");
  bayes->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  bayes->add_option("--out", out_path, "Output CSV (default: stdout)");
  add_common(bayes);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto config = load_config(config_path);
      apply(config, ov);
      emit(to_table(run_experiment(config)), out_path);
      if (!trace_path.empty()) {
        std::ofstream file;
        write_trace(open_or_stdout(trace_path, file), config, trace_horizon, trace_runs);
      }
      return 0;
    }
    for (auto* sub : presets) {
      if (!sub->parsed()) continue;
      auto config = preset(sub->get_name());
      apply(config, ov);
      if (print_config) {
        std::cout << to_json(config).dump(2) << '\n';
        return 0;
      }
      emit(to_table(run_experiment(config)), out_path);
      return 0;
    }
    if (equivalence->parsed()) {
      auto config = load_config(config_path);
      apply(config, ov);
      const auto reports =
          run_equivalence(config, eq_horizon.value_or(config.horizons.front()), eq_runs.value_or(10000));
      std::ofstream file;
      write_reports(open_or_stdout(out_path, file), reports);
      return all_pass(reports) ? 0 : kExitBatteryFailed;
    }
    if (bayes->parsed()) {
      auto config = load_config(config_path);
      apply(config, ov);
      emit(to_table(run_bayes(config)), out_path);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "replaylab: invalid config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "replaylab: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
