#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "replaylab/config.hpp"
#include "replaylab/csv.hpp"
#include "replaylab/designs.hpp"
#include "replaylab/equivtest.hpp"

namespace replaylab {

/// What purpose a batch of replications serves; each gets its own seeds.
enum class Purpose : std::uint64_t { Ci = 1, Variance = 2, Bayes = 3, Trace = 4 };

/// Base seed of the replications for one (design, purpose, horizon) cell.
std::uint64_t batch_seed(std::uint64_t master, Design design, Purpose purpose, std::size_t horizon) noexcept;

struct DesignStats {
  // From the M_ci batch.
  double mean = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  // From the M_var batch.
  double var = 0.0;
  double mean_interactions = 0.0;
  std::vector<double> var_pulls0_over_T;
  std::vector<double> var_pulls1_over_T;
  /// The M_var outcomes, kept only when requested.
  std::vector<RunOutcome> runs;
};

struct HorizonResult {
  std::size_t horizon = 0;
  std::map<Design, DesignStats> designs;
};

struct ExperimentResult {
  std::size_t arm_count = 0;
  std::vector<HorizonResult> rows;
};

ExperimentResult run_experiment(const ExperimentConfig& config, bool keep_runs = false);

/// One row per horizon with the fixed column set followed by
/// varT_pi0_<arm>, varT_pi1_<arm> (1-based arms). The pull-count variances
/// come from the naive design when it ran, else AR, else the shared stack.
/// Designs that did not run render as NaN.
CsvTable to_table(const ExperimentResult& result);

/// Writes the table to `path`; throws std::runtime_error when unwritable.
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

struct BayesRow {
  std::size_t horizon = 0;
  double mean = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  double var = 0.0;
  double mean_interactions = 0.0;
};

/// One AR replication per instance drawn from the config's prior, with the
/// instance sampled from the run's aux stream. Throws ConfigError when the
/// config has no bayes block.
std::vector<BayesRow> run_bayes(const ExperimentConfig& config);

/// Bayes AR replications for one horizon (exposed for tests).
std::vector<RunOutcome> replicate_bayes(const InstancePrior& prior, const PolicySpec& pi0, const PolicySpec& pi1,
                                        std::size_t horizon, std::size_t runs, std::uint64_t base_seed,
                                        std::size_t workers = 1);

CsvTable to_table(const std::vector<BayesRow>& rows);

/// The equivalence battery and symmetry test for a config at one horizon.
std::vector<TestReport> run_equivalence(const ExperimentConfig& config, std::size_t horizon, std::size_t runs);

/// CSV with columns test,statistic,p_value,pass.
void write_reports(std::ostream& os, const std::vector<TestReport>& reports);

/// Full trajectories of the first `runs` AR replications at `horizon`.
void write_trace(std::ostream& os, const ExperimentConfig& config, std::size_t horizon, std::size_t runs);

}  // namespace replaylab
