#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "replaylab/harness.hpp"
#include "replaylab/stats.hpp"

using namespace replaylab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  auto c = preset("example2");
  c.horizons = {10, 50};
  c.m_ci = 10;
  c.m_var = 400;
  c.master_seed = 7;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("replaylab_test_" + std::to_string(std::rand()) + "_" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

/// Runs the CLI with stdout and stderr captured to files under `dir`.
int cli(const TempDir& dir, const std::string& args, std::string* out = nullptr, std::string* err = nullptr) {
  const auto o = dir.path / "stdout.txt";
  const auto e = dir.path / "stderr.txt";
  const std::string cmd = std::string(REPLAYLAB_CLI) + " " + args + " > " + o.string() + " 2> " + e.string();
  const int status = std::system(cmd.c_str());
  if (out) *out = slurp(o);
  if (err) *err = slurp(e);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("experiment table layout") {
  auto c = small_config();
  const auto result = run_experiment(c);
  const auto table = to_table(result);
  const std::vector<std::string> fixed{"horizon",  "baseline_mean", "baseline_lb", "baseline_ub",
                                       "AR_mean",  "AR_lb",         "AR_ub",       "baseline_var",
                                       "AR_var",   "baseline_num_interactions",    "AR_num_interactions"};
  REQUIRE(table.header.size() == fixed.size() + 4);
  for (std::size_t i = 0; i < fixed.size(); ++i) CHECK(table.header[i] == fixed[i]);
  CHECK(table.header[11] == "varT_pi0_1");
  CHECK(table.header[14] == "varT_pi1_2");
  REQUIRE(table.rows.size() == 2);
  for (const auto& row : table.rows) {
    const double T = row[0];
    CHECK(row[table.column("baseline_num_interactions")] == 2 * T);
    CHECK(row[table.column("AR_num_interactions")] >= T);
    CHECK(row[table.column("AR_num_interactions")] <= 2 * T);
    CHECK(row[table.column("baseline_lb")] <= row[table.column("baseline_mean")]);
    CHECK(row[table.column("AR_mean")] <= row[table.column("AR_ub")]);
  }
}

TEST_CASE("experiment statistics come from the documented batches") {
  auto c = small_config();
  c.designs = {Design::ArtificialReplay};
  const auto result = run_experiment(c, true);
  const auto& st = result.rows[1].designs.at(Design::ArtificialReplay);
  const auto var_runs =
      replicate(Design::ArtificialReplay, c.policy0, c.policy1, c.instance, 50, c.m_var,
                batch_seed(c.master_seed, Design::ArtificialReplay, Purpose::Variance, 50));
  const auto ci_runs = replicate(Design::ArtificialReplay, c.policy0, c.policy1, c.instance, 50, c.m_ci,
                                 batch_seed(c.master_seed, Design::ArtificialReplay, Purpose::Ci, 50));
  const auto vs = summarize(var_runs);
  const auto cs = summarize(ci_runs);
  CHECK(st.var == vs.sample_var.value());
  CHECK(st.mean == cs.mean);
  CHECK(st.lb == confidence_interval(cs, 0.01).lo);
  CHECK(st.mean_interactions == moments(vs.n_env_samples).mean);
  CHECK(st.var_pulls1_over_T[1] == doctest::Approx(moments(vs.pulls1[1]).variance.value() / 50.0));
  CHECK(st.runs.size() == c.m_var);

  // Naive columns are NaN when only AR ran; varT falls back to AR.
  const auto table = to_table(result);
  CHECK(std::isnan(table.rows[0][table.column("baseline_mean")]));
  CHECK(table.rows[1][table.column("varT_pi1_2")] == st.var_pulls1_over_T[1]);
}

TEST_CASE("naive-only runs use exactly 2T interactions") {
  auto c = small_config();
  c.designs = {Design::Naive};
  const auto table = to_table(run_experiment(c));
  for (const auto& row : table.rows) {
    CHECK(row[table.column("baseline_num_interactions")] == 2 * row[0]);
    CHECK(std::isnan(row[table.column("AR_mean")]));
  }
}

TEST_CASE("results are deterministic and worker-count independent") {
  auto c = small_config();
  std::ostringstream a, b, p;
  write_csv(a, to_table(run_experiment(c)));
  write_csv(b, to_table(run_experiment(c)));
  c.workers = 3;
  write_csv(p, to_table(run_experiment(c)));
  CHECK(a.str() == b.str());
  CHECK(a.str() == p.str());
  c.master_seed = 8;
  std::ostringstream d;
  write_csv(d, to_table(run_experiment(c)));
  CHECK(a.str() != d.str());
}

TEST_CASE("CSV round trip") {
  auto c = small_config();
  c.designs = {Design::ArtificialReplay};
  const auto table = to_table(run_experiment(c));
  TempDir dir;
  const auto path = dir.path / "out.csv";
  emit_csv(table, path);
  std::ifstream in(path);
  const auto back = read_csv(in);
  CHECK(back.header == table.header);
  REQUIRE(back.rows.size() == table.rows.size());
  for (std::size_t r = 0; r < back.rows.size(); ++r) {
    for (std::size_t k = 0; k < back.rows[r].size(); ++k) {
      const double x = table.rows[r][k], y = back.rows[r][k];
      if (std::isnan(x)) {
        CHECK(std::isnan(y));
      } else {
        CHECK(parse_number(format_number(x)) == y);
        CHECK(y == doctest::Approx(x).epsilon(1e-11));
      }
    }
  }
  // Decimal points never depend on the locale; no thousands separators.
  CHECK(format_number(1027.08) == "1027.08");
  CHECK(format_number(0.5) == "0.5");
  CHECK_THROWS_AS(emit_csv(table, dir.path / "missing" / "out.csv"), std::runtime_error);
  CHECK_THROWS_AS(emit_csv(CsvTable{table.header, {}}, path), std::invalid_argument);
}

TEST_CASE("Bayesian extension") {
  SUBCASE("a point-mass prior reproduces the fixed-instance estimate") {
    const auto inst = BanditInstance::bernoulli(std::vector<double>{0.7, 0.3});
    const auto bayes = replicate_bayes(DiscretePrior{{{1.0, inst}}}, Ucb1{2.0}, TsBernoulli{}, 100, 3000, 1);
    const auto fixed = replicate(Design::ArtificialReplay, Ucb1{2.0}, TsBernoulli{}, inst, 100, 3000, 2);
    const auto a = summarize(bayes), b = summarize(fixed);
    CHECK(std::abs(a.mean - b.mean) <= 4.0 * std::sqrt(*a.sample_var / 3000 + *b.sample_var / 3000));
  }
  SUBCASE("identical policies under a uniform prior estimate zero") {
    auto c = small_config();
    c.policy1 = c.policy0;
    c.horizons = {100};
    c.bayes = BayesBlock{UniformMeansPrior{true, 2, 0.0, 1.0, 1.0}, 1000};
    const auto rows = run_bayes(c);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].lb <= 0.0);
    CHECK(rows[0].ub >= 0.0);
  }
  SUBCASE("two equally weighted instances average their estimates") {
    const auto i1 = BanditInstance::bernoulli(std::vector<double>{0.7, 0.3});
    const auto i2 = BanditInstance::bernoulli(std::vector<double>{0.4, 0.6});
    const DiscretePrior prior{{{1.0, i1}, {1.0, i2}}};
    const auto mix = summarize(replicate_bayes(prior, Ucb1{2.0}, EpsGreedy{0.2}, 100, 6000, 3));
    const auto s1 = summarize(replicate(Design::ArtificialReplay, Ucb1{2.0}, EpsGreedy{0.2}, i1, 100, 6000, 4));
    const auto s2 = summarize(replicate(Design::ArtificialReplay, Ucb1{2.0}, EpsGreedy{0.2}, i2, 100, 6000, 5));
    const double target = 0.5 * (s1.mean + s2.mean);
    const double se = std::sqrt(*mix.sample_var / 6000 + 0.25 * (*s1.sample_var + *s2.sample_var) / 6000);
    CHECK(std::abs(mix.mean - target) <= 4.0 * se);
  }
  SUBCASE("missing prior is a config error") {
    CHECK_THROWS_AS(run_bayes(small_config()), ConfigError);
  }
}

TEST_CASE("equivalence report") {
  auto c = small_config();
  const auto reports = run_equivalence(c, 30, 1000);
  CHECK(reports.size() == 4 * 2 + 4 + 1);
  std::ostringstream os;
  write_reports(os, reports);
  CHECK(os.str().starts_with("test,statistic,p_value,pass\nar_vs_stack/pulls0/arm1,"));
}

TEST_CASE("command line") {
  TempDir dir;
  std::string out, err;

  SUBCASE("presets are reproducible byte for byte") {
    const std::string args = "example1 --seed 42 --horizons 10 100 --m-var 200";
    REQUIRE(cli(dir, args + " --out " + (dir.path / "a.csv").string()) == 0);
    REQUIRE(cli(dir, args + " --out " + (dir.path / "b.csv").string()) == 0);
    const auto a = slurp(dir.path / "a.csv");
    CHECK(a == slurp(dir.path / "b.csv"));
    CHECK(a.starts_with("horizon,baseline_mean,"));
    REQUIRE(cli(dir, "example1 --seed 43 --horizons 10 100 --m-var 200", &out) == 0);
    CHECK(out != a);
  }
  SUBCASE("printed preset configs run unchanged") {
    REQUIRE(cli(dir, "example3 --print-config", &out) == 0);
    const auto cfg = dir.path / "ex3.json";
    std::ofstream(cfg) << out;
    CHECK(config_from_json(nlohmann::json::parse(out)).instance.arm_count() == 5);
    CHECK(cli(dir, "run " + cfg.string() + " --horizons 10 --m-var 50", &out) == 0);
    CHECK(out.find("\n10,") != std::string::npos);
  }
  SUBCASE("invalid configs name the field") {
    const auto cfg = dir.path / "bad.json";
    std::ofstream(cfg) << R"({"instance":{"kind":"bernoulli","means":[0.5,0.4]},
      "policy0":{"kind":"ucb1"},"policy1":{"kind":"eps_greedy","eps":1.5}})";
    CHECK(cli(dir, "run " + cfg.string(), &out, &err) == 2);
    CHECK(err.find("policy1.eps") != std::string::npos);
    const auto broken = dir.path / "broken.json";
    std::ofstream(broken) << "{ not json";
    CHECK(cli(dir, "run " + broken.string(), &out, &err) == 2);
  }
  SUBCASE("missing files and unknown flags fail") {
    CHECK(cli(dir, "run " + (dir.path / "nope.json").string()) != 0);
    CHECK(cli(dir, "example2 --frobnicate") != 0);
    CHECK(cli(dir, "") != 0);
    CHECK(cli(dir, "example2 --horizons 10 --m-var 20 --out " + (dir.path / "no" / "x.csv").string()) == 1);
  }
  SUBCASE("seed precedence: flag over environment over file") {
    const auto cfg = dir.path / "cfg.json";
    std::ofstream(cfg) << R"({"instance":{"kind":"bernoulli","means":[0.5,0.4]},"master_seed":5,
      "policy0":{"kind":"ucb1"},"policy1":{"kind":"eps_greedy"},"horizons":[20],"M_var":50})";
    std::string file_seed, env_seed, flag_seed, explicit5, explicit6;
    cli(dir, "run " + cfg.string(), &file_seed);
    cli(dir, "run " + cfg.string() + " --seed 5", &explicit5);
    cli(dir, "run " + cfg.string() + " --seed 6", &explicit6);
    ::setenv("REPLAYLAB_SEED", "6", 1);
    cli(dir, "run " + cfg.string(), &env_seed);
    cli(dir, "run " + cfg.string() + " --seed 5", &flag_seed);
    ::unsetenv("REPLAYLAB_SEED");
    CHECK(file_seed == explicit5);
    CHECK(env_seed == explicit6);
    CHECK(flag_seed == explicit5);
    CHECK(file_seed != explicit6);
  }
  SUBCASE("trajectory trace") {
    const auto cfg = dir.path / "cfg.json";
    std::ofstream(cfg) << R"({"instance":{"kind":"bernoulli","means":[0.5,0.4]},
      "policy0":{"kind":"ucb1"},"policy1":{"kind":"eps_greedy"},"horizons":[20],"M_var":50})";
    const auto trace = dir.path / "trace.csv";
    REQUIRE(cli(dir, "run " + cfg.string() + " --trace " + trace.string() + " --trace-horizon 15 --trace-runs 2") ==
            0);
    std::istringstream is(slurp(trace));
    std::string line;
    std::getline(is, line);
    CHECK(line == "run,phase,t,arm,reward,source");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 2 * 2 * 15);
  }
  SUBCASE("equivalence and bayes subcommands") {
    const auto cfg = dir.path / "cfg.json";
    std::ofstream(cfg) << R"({"instance":{"kind":"bernoulli","means":[0.7,0.3]},
      "policy0":{"kind":"ucb1","alpha":2},"policy1":{"kind":"ts_bernoulli"},"horizons":[30],
      "bayes":{"prior":{"kind":"uniform_means","arms":2},"instances_M":200}})";
    REQUIRE(cli(dir, "equivalence " + cfg.string() + " --runs 1000", &out) == 0);
    CHECK(out.starts_with("test,statistic,p_value,pass\n"));
    CHECK(out.find("symmetry/theta") != std::string::npos);
    REQUIRE(cli(dir, "bayes " + cfg.string(), &out) == 0);
    CHECK(out.starts_with("horizon,bayes_AR_mean,bayes_AR_lb,bayes_AR_ub,bayes_AR_var,AR_num_interactions\n30,"));
  }
}
