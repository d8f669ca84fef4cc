#include "replaylab/harness.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "replaylab/parallel.hpp"
#include "replaylab/rng.hpp"
#include "replaylab/stats.hpp"

namespace replaylab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kEquivalenceTag = 0xE0;

std::vector<double> pull_variance_over_T(const ReplicationSummary& s, bool control, std::size_t horizon) {
  const auto& samples = control ? s.pulls0 : s.pulls1;
  std::vector<double> out;
  for (const auto& arm : samples) out.push_back(moments(arm).variance.value_or(0.0) / static_cast<double>(horizon));
  return out;
}

DesignStats design_stats(const ExperimentConfig& c, Design d, std::size_t horizon, bool keep_runs) {
  DesignStats st;
  const auto ci_runs = replicate(d, c.policy0, c.policy1, c.instance, horizon, c.m_ci,
                                 batch_seed(c.master_seed, d, Purpose::Ci, horizon), c.workers);
  const auto ci_summary = summarize(ci_runs);
  const auto ci = confidence_interval(ci_summary, c.ci_alpha);
  st.mean = ci_summary.mean;
  st.lb = ci.lo;
  st.ub = ci.hi;

  auto var_runs = replicate(d, c.policy0, c.policy1, c.instance, horizon, c.m_var,
                            batch_seed(c.master_seed, d, Purpose::Variance, horizon), c.workers);
  const auto var_summary = summarize(var_runs);
  st.var = var_summary.sample_var.value_or(0.0);
  st.mean_interactions = moments(var_summary.n_env_samples).mean;
  st.var_pulls0_over_T = pull_variance_over_T(var_summary, true, horizon);
  st.var_pulls1_over_T = pull_variance_over_T(var_summary, false, horizon);
  if (keep_runs) st.runs = std::move(var_runs);
  return st;
}

}  // namespace

std::uint64_t batch_seed(std::uint64_t master, Design design, Purpose purpose, std::size_t horizon) noexcept {
  std::uint64_t s = combine_seed(master, static_cast<std::uint64_t>(design) + 1);
  s = combine_seed(s, static_cast<std::uint64_t>(purpose));
  return combine_seed(s, horizon);
}

ExperimentResult run_experiment(const ExperimentConfig& config, bool keep_runs) {
  validate(config);
  ExperimentResult result;
  result.arm_count = config.instance.arm_count();
  for (auto horizon : config.horizons) {
    HorizonResult row;
    row.horizon = horizon;
    for (auto d : config.designs) row.designs[d] = design_stats(config, d, horizon, keep_runs);
    result.rows.push_back(std::move(row));
  }
  return result;
}

CsvTable to_table(const ExperimentResult& result) {
  CsvTable t;
  t.header = {"horizon",  "baseline_mean", "baseline_lb", "baseline_ub", "AR_mean", "AR_lb", "AR_ub", "baseline_var",
              "AR_var", "baseline_num_interactions", "AR_num_interactions"};
  for (int policy = 0; policy < 2; ++policy) {
    for (std::size_t a = 1; a <= result.arm_count; ++a) {
      t.header.push_back("varT_pi" + std::to_string(policy) + "_" + std::to_string(a));
    }
  }
  for (const auto& row : result.rows) {
    auto find = [&](Design d) -> const DesignStats* {
      const auto it = row.designs.find(d);
      return it == row.designs.end() ? nullptr : &it->second;
    };
    const auto* naive = find(Design::Naive);
    const auto* ar = find(Design::ArtificialReplay);
    const auto* pulls = naive ? naive : ar ? ar : find(Design::SharedStack);
    auto get = [](const DesignStats* s, double DesignStats::*field) { return s ? s->*field : kNaN; };

    std::vector<double> r{static_cast<double>(row.horizon),
                          get(naive, &DesignStats::mean),
                          get(naive, &DesignStats::lb),
                          get(naive, &DesignStats::ub),
                          get(ar, &DesignStats::mean),
                          get(ar, &DesignStats::lb),
                          get(ar, &DesignStats::ub),
                          get(naive, &DesignStats::var),
                          get(ar, &DesignStats::var),
                          get(naive, &DesignStats::mean_interactions),
                          get(ar, &DesignStats::mean_interactions)};
    for (auto v : {&DesignStats::var_pulls0_over_T, &DesignStats::var_pulls1_over_T}) {
      for (std::size_t a = 0; a < result.arm_count; ++a) r.push_back(pulls ? (pulls->*v)[a] : kNaN);
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  if (table.rows.empty()) throw std::invalid_argument("emit_csv: no result rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, table);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<RunOutcome> replicate_bayes(const InstancePrior& prior, const PolicySpec& pi0, const PolicySpec& pi1,
                                        std::size_t horizon, std::size_t runs, std::uint64_t base_seed,
                                        std::size_t workers) {
  std::vector<RunOutcome> out(runs);
  parallel_for(runs, workers, [&](std::size_t m) {
    const auto seeds = RunSeeds::derive(base_seed, m);
    RunEngine aux(seeds.aux);
    const auto instance = sample_instance(prior, aux);
    out[m] = simulate(Design::ArtificialReplay, pi0, pi1, instance, horizon, seeds);
  });
  return out;
}

std::vector<BayesRow> run_bayes(const ExperimentConfig& config) {
  validate(config);
  if (!config.bayes) throw ConfigError("bayes", "missing; the bayes subcommand needs a prior");
  std::vector<BayesRow> rows;
  for (auto horizon : config.horizons) {
    const auto runs =
        replicate_bayes(config.bayes->prior, config.policy0, config.policy1, horizon, config.bayes->instances,
                        batch_seed(config.master_seed, Design::ArtificialReplay, Purpose::Bayes, horizon),
                        config.workers);
    const auto s = summarize(runs);
    const auto ci = confidence_interval(s, config.ci_alpha);
    rows.push_back({horizon, s.mean, ci.lo, ci.hi, s.sample_var.value_or(0.0), moments(s.n_env_samples).mean});
  }
  return rows;
}

CsvTable to_table(const std::vector<BayesRow>& rows) {
  CsvTable t;
  t.header = {"horizon", "bayes_AR_mean", "bayes_AR_lb", "bayes_AR_ub", "bayes_AR_var", "AR_num_interactions"};
  for (const auto& r : rows) {
    t.rows.push_back({static_cast<double>(r.horizon), r.mean, r.lb, r.ub, r.var, r.mean_interactions});
  }
  return t;
}

std::vector<TestReport> run_equivalence(const ExperimentConfig& config, std::size_t horizon, std::size_t runs) {
  validate(config);
  EquivalenceSetup setup{config.instance, config.policy0, config.policy1, horizon, runs,
                         combine_seed(config.master_seed, kEquivalenceTag), 0.01, config.workers};
  auto reports = check_equivalence(setup);
  reports.push_back(check_symmetry(setup));
  return reports;
}

void write_reports(std::ostream& os, const std::vector<TestReport>& reports) {
  os << "test,statistic,p_value,pass\n";
  for (const auto& r : reports) {
    os << r.name << ',' << format_number(r.statistic) << ',' << format_number(r.p_value) << ','
       << (r.pass ? "true" : "false") << '\n';
  }
}

void write_trace(std::ostream& os, const ExperimentConfig& config, std::size_t horizon, std::size_t runs) {
  validate(config);
  const auto base = batch_seed(config.master_seed, Design::ArtificialReplay, Purpose::Trace, horizon);
  write_trajectory_header(os);
  for (std::size_t m = 0; m < runs; ++m) {
    const auto rec = run_ar(config.policy0, config.policy1, config.instance, horizon, RunSeeds::derive(base, m));
    write_trajectory_rows(os, m + 1, rec.traj0, rec.traj1);
  }
}

}  // namespace replaylab
