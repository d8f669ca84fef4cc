#include <doctest.h>

#include <set>
#include <sstream>
#include <vector>

#include "replaylab/designs.hpp"
#include "replaylab/stats.hpp"

using namespace replaylab;

namespace {

const auto kExample1 = BanditInstance::bernoulli(std::vector<double>{0.9, 0.7, 0.5, 0.3, 0.1});

std::vector<double> rewards_of(const Trajectory& t) {
  std::vector<double> r;
  for (const auto& s : t.steps) r.push_back(s.reward);
  return r;
}

std::vector<ArmIndex> arms_of(const Trajectory& t) {
  std::vector<ArmIndex> a;
  for (const auto& s : t.steps) a.push_back(s.arm);
  return a;
}

/// The worked two-phase example on three fair-coin arms.
struct WorkedExample {
  Scripted pi0{{0, 1, 2, 0, 1, 2, 2, 2, 1, 2}};
  Scripted pi1{{0, 1, 2, 2, 0, 1, 0, 1, 2, 1}};
  std::vector<double> rewards0{1, 0, 1, 0, 0, 1, 1, 0, 0, 0};
  std::vector<double> rewards1{1, 0, 1, 1, 0, 0, 0, 0, 1, 1};
  BanditInstance instance = BanditInstance::bernoulli(std::vector<double>{0.5, 0.5, 0.5});
};

}  // namespace

TEST_CASE("interaction counts") {
  const std::vector<std::size_t> a{2, 3, 5}, b{3, 4, 3};
  const auto c = interaction_counts(a, b);
  CHECK(c.n_env == 12);
  CHECK(c.n_replay == 8);
  const auto same = interaction_counts(a, a);
  CHECK(same.n_env == 10);
  CHECK(same.n_replay == 10);
  const std::vector<std::size_t> left{7, 0}, right{0, 7};
  CHECK(interaction_counts(left, right).n_env == 14);
  CHECK(interaction_counts(left, right).n_replay == 0);

  const std::vector<std::size_t> short_sum{2, 3, 4}, two{5, 5};
  CHECK_THROWS_AS(interaction_counts(a, short_sum), std::invalid_argument);
  CHECK_THROWS_AS(interaction_counts(a, two), std::invalid_argument);
}

TEST_CASE("worked example: replay pattern and counters") {
  const WorkedExample ex;
  // Source flags depend only on the action rows.
  const auto rec = run_ar(ex.pi0, ex.pi1, ex.instance, 10, RunSeeds::derive(1, 0));
  CHECK(rec.pulls0 == std::vector<std::size_t>{2, 3, 5});
  CHECK(rec.pulls1 == std::vector<std::size_t>{3, 4, 3});
  CHECK(rec.n_env == 12);
  CHECK(rec.n_replay == 8);
  for (std::size_t t = 0; t < 10; ++t) {
    const bool fresh = t == 6 || t == 9;  // periods 7 and 10
    CHECK(rec.traj1.steps[t].source == (fresh ? Source::Environment : Source::Replay));
  }

  // Search the run index until the control's coin flips and the two fresh
  // treatment draws match the worked example (probability 2^-12 per run).
  bool found = false;
  for (std::uint64_t m = 0; m < 200000 && !found; ++m) {
    const auto r = run_ar(ex.pi0, ex.pi1, ex.instance, 10, RunSeeds::derive(7, m));
    if (rewards_of(r.traj0) != ex.rewards0) continue;
    if (r.traj1.steps[6].reward != ex.rewards1[6] || r.traj1.steps[9].reward != ex.rewards1[9]) continue;
    found = true;
    CHECK(rewards_of(r.traj1) == ex.rewards1);
    CHECK(r.traj0.total_reward() == 4.0);
    CHECK(r.traj1.total_reward() == 5.0);
    CHECK(theta_hat(r.traj1, r.traj0) == 1.0);
  }
  CHECK(found);
}

TEST_CASE("worked example on the shared stack reads 12 distinct cells, 8 of them twice") {
  const WorkedExample ex;
  const auto run = run_shared_stack(ex.pi0, ex.pi1, ex.instance, 10, RunSeeds::derive(3, 0));
  const auto c = interaction_counts(run.stacks.revealed0, run.stacks.revealed1);
  CHECK(c.n_env == 12);
  CHECK(c.n_replay == 8);
  CHECK(run.stacks.revealed0 == std::vector<std::size_t>{2, 3, 5});
}

TEST_CASE("single arm: treatment replays the control verbatim") {
  const auto inst = BanditInstance::gaussian(std::vector<double>{0.3}, 2.0);
  for (std::size_t T : {1u, 5u, 64u}) {
    const auto rec = run_ar(Ucb1{}, EpsGreedy{0.5}, inst, T, RunSeeds::derive(5, T));
    CHECK(rec.n_env == T);
    CHECK(rec.n_replay == T);
    CHECK(theta_hat(rec.traj1, rec.traj0) == 0.0);
    CHECK(rewards_of(rec.traj1) == rewards_of(rec.traj0));

    const auto naive = run_naive(Ucb1{}, Ucb1{}, inst, T, RunSeeds::derive(5, T));
    for (auto a : arms_of(naive.traj0)) CHECK(a == 0);
    for (auto a : arms_of(naive.traj1)) CHECK(a == 0);

    const auto stack = run_shared_stack(TsGaussian{}, EpsGreedy{}, inst, T, RunSeeds::derive(5, T));
    CHECK(rewards_of(stack.traj0) == rewards_of(stack.traj1));
  }
}

TEST_CASE("K=2, T=2 with swapped deterministic scripts replays both steps") {
  const auto inst = BanditInstance::bernoulli(std::vector<double>{0.6, 0.3});
  for (std::uint64_t m = 0; m < 50; ++m) {
    const auto rec = run_ar(Scripted{{0, 1}}, Scripted{{1, 0}}, inst, 2, RunSeeds::derive(9, m));
    REQUIRE(rec.n_env == 2);
    REQUIRE(rec.n_replay == 2);
    REQUIRE(theta_hat(rec.traj1, rec.traj0) == 0.0);
  }
}

TEST_CASE("naive design draws every reward from the environment") {
  for (std::size_t T : {10u, 100u}) {
    const auto run = run_naive(Ucb1{2.5}, TsBernoulli{}, kExample1, T, RunSeeds::derive(2, T));
    CHECK(run.traj0.environment_steps() + run.traj1.environment_steps() == 2 * T);
    CHECK(run.traj0.horizon() == T);
    CHECK(run.traj1.horizon() == T);
  }
  // Degenerate single arm: independent draws still agree.
  const auto sure = BanditInstance::bernoulli(std::vector<double>{1.0});
  const auto run = run_naive(Ucb1{}, Ucb1{}, sure, 20, RunSeeds::derive(4, 0));
  CHECK(run.traj0 == run.traj1);
}

TEST_CASE("AR counters and FIFO replay order hold in every run") {
  const std::vector<std::pair<PolicySpec, PolicySpec>> pairs{
      {Ucb1{2.5}, Ucb1{3.0}}, {Ucb1{2.0}, TsBernoulli{}}, {EpsGreedy{0.3}, UcbDelta{2.0, std::nullopt}}};
  for (const auto& [pi0, pi1] : pairs) {
    for (std::uint64_t m = 0; m < 300; ++m) {
      const std::size_t T = 2 + m % 96;  // UCB-delta derives delta from T >= 2
      const auto rec = run_ar(pi0, pi1, kExample1, T, RunSeeds::derive(11, m));
      const auto counts = interaction_counts(rec.pulls0, rec.pulls1);
      REQUIRE(rec.n_env + rec.n_replay == 2 * T);
      REQUIRE(rec.n_env == counts.n_env);
      REQUIRE(rec.n_replay == counts.n_replay);
      REQUIRE(rec.traj0.environment_steps() == T);
      REQUIRE(rec.pulls0 == pull_counts(rec.traj0, 5));
      REQUIRE(rec.pulls1 == pull_counts(rec.traj1, 5));

      // k-th replayed reward of arm a equals the k-th control reward of arm a.
      std::vector<std::vector<double>> logged(5), replayed(5);
      for (const auto& s : rec.traj0.steps) logged[s.arm].push_back(s.reward);
      for (const auto& s : rec.traj1.steps) {
        if (s.source == Source::Replay) replayed[s.arm].push_back(s.reward);
      }
      for (ArmIndex a = 0; a < 5; ++a) {
        REQUIRE(replayed[a].size() == std::min(rec.pulls0[a], rec.pulls1[a]));
        for (std::size_t k = 0; k < replayed[a].size(); ++k) REQUIRE(replayed[a][k] == logged[a][k]);
      }
    }
  }
}

TEST_CASE("the control trajectory is shared verbatim by naive and AR runs") {
  for (std::uint64_t m = 0; m < 100; ++m) {
    const auto seeds = RunSeeds::derive(13, m);
    const auto naive = run_naive(TsBernoulli{}, Ucb1{}, kExample1, 60, seeds);
    const auto ar = run_ar(TsBernoulli{}, Ucb1{}, kExample1, 60, seeds);
    REQUIRE(naive.traj0 == ar.traj0);
  }
}

TEST_CASE("shared stack reads") {
  SUBCASE("identical deterministic policies produce identical trajectories") {
    for (std::uint64_t m = 0; m < 50; ++m) {
      const auto run = run_shared_stack(Ucb1{2.0}, Ucb1{2.0}, kExample1, 80, RunSeeds::derive(17, m));
      REQUIRE(run.traj0 == run.traj1);
    }
  }
  SUBCASE("the n-th pull of arm a reveals cell (a, n-1)") {
    const auto run = run_shared_stack(EpsGreedy{0.5}, TsBernoulli{}, kExample1, 50, RunSeeds::derive(19, 0));
    for (const auto* traj : {&run.traj0, &run.traj1}) {
      std::vector<std::size_t> depth(5, 0);
      for (const auto& s : traj->steps) {
        REQUIRE(s.reward == run.stacks.cell(s.arm, depth[s.arm]++));
        REQUIRE(s.source == Source::Environment);
      }
      REQUIRE(depth == (traj == &run.traj0 ? run.stacks.revealed0 : run.stacks.revealed1));
    }
  }
}

TEST_CASE("horizon zero is rejected") {
  CHECK_THROWS_AS(run_ar(Ucb1{}, Ucb1{}, kExample1, 0, RunSeeds::derive(0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(run_naive(Ucb1{}, Ucb1{}, kExample1, 0, RunSeeds::derive(0, 0)), std::invalid_argument);
  CHECK_THROWS_AS(run_shared_stack(Ucb1{}, Ucb1{}, kExample1, 0, RunSeeds::derive(0, 0)), std::invalid_argument);
}

TEST_CASE("seed streams are distinct across runs and tags") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20000; ++m) {
    const auto s = RunSeeds::derive(0xC0FFEE, m);
    for (auto v : {s.rewards, s.policy0, s.policy1, s.aux}) seen.insert(v);
  }
  CHECK(seen.size() == 80000);
}

TEST_CASE("replications are deterministic and independent of the worker count") {
  for (auto design : {Design::Naive, Design::ArtificialReplay, Design::SharedStack}) {
    const auto serial = replicate(design, TsBernoulli{}, EpsGreedy{0.2}, kExample1, 40, 64, 5, 1);
    const auto again = replicate(design, TsBernoulli{}, EpsGreedy{0.2}, kExample1, 40, 64, 5, 1);
    const auto parallel = replicate(design, TsBernoulli{}, EpsGreedy{0.2}, kExample1, 40, 64, 5, 4);
    for (std::size_t m = 0; m < serial.size(); ++m) {
      REQUIRE(serial[m].reward0 == again[m].reward0);
      REQUIRE(serial[m].reward0 == parallel[m].reward0);
      REQUIRE(serial[m].reward1 == parallel[m].reward1);
      REQUIRE(serial[m].pulls1 == parallel[m].pulls1);
      REQUIRE(serial[m].n_env == parallel[m].n_env);
    }
  }
}

TEST_CASE("trajectory dump format") {
  const WorkedExample ex;
  const auto rec = run_ar(ex.pi0, ex.pi1, ex.instance, 10, RunSeeds::derive(1, 0));
  std::ostringstream os;
  write_trajectory_header(os);
  write_trajectory_rows(os, 1, rec.traj0, rec.traj1);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "run,phase,t,arm,reward,source");
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  REQUIRE(lines.size() == 20);
  CHECK(lines[0].starts_with("1,1,1,1,"));
  CHECK(lines[0].ends_with(",env"));
  CHECK(lines[13].starts_with("1,2,4,3,"));
  CHECK(lines[13].ends_with(",replay"));
  CHECK(lines[16].starts_with("1,2,7,1,"));
  CHECK(lines[16].ends_with(",env"));
}
