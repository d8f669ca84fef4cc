#include "replaylab/designs.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>

#include "replaylab/csv.hpp"
#include "replaylab/parallel.hpp"
#include "replaylab/stats.hpp"

namespace replaylab {

std::string_view design_name(Design d) noexcept {
  switch (d) {
    case Design::Naive:
      return "naive";
    case Design::ArtificialReplay:
      return "ar";
    case Design::SharedStack:
      return "shared_stack";
  }
  return "unknown";
}

RunSeeds RunSeeds::derive(std::uint64_t base, std::uint64_t run_index) noexcept {
  return {stream_seed(base, run_index, StreamTag::Rewards), stream_seed(base, run_index, StreamTag::Policy0),
          stream_seed(base, run_index, StreamTag::Policy1), stream_seed(base, run_index, StreamTag::Aux)};
}

RewardStacks::RewardStacks(std::size_t arm_count, std::size_t depth)
    : revealed0(arm_count, 0), revealed1(arm_count, 0), arm_count_(arm_count), depth_(depth),
      cells_(arm_count * depth, 0.0) {}

InteractionCounts interaction_counts(std::span<const std::size_t> pulls0, std::span<const std::size_t> pulls1) {
  if (pulls0.size() != pulls1.size() || pulls0.empty()) {
    throw std::invalid_argument("pull-count vectors must have the same nonzero length");
  }
  std::size_t total0 = 0, total1 = 0, hi = 0, lo = 0;
  for (std::size_t a = 0; a < pulls0.size(); ++a) {
    total0 += pulls0[a];
    total1 += pulls1[a];
    hi += std::max(pulls0[a], pulls1[a]);
    lo += std::min(pulls0[a], pulls1[a]);
  }
  if (total0 != total1) {
    throw std::invalid_argument("pull-count vectors must sum to the same horizon");
  }
  return {hi, lo};
}

namespace {

void require_horizon(std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
}

Trajectory deploy(Policy& policy, const BanditInstance& instance, std::size_t horizon, RunEngine& rewards) {
  Trajectory traj;
  traj.steps.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const ArmIndex a = policy.select();
    const double r = instance.sample_reward(a, rewards);
    policy.update(a, r);
    traj.steps.push_back({a, r, Source::Environment});
  }
  return traj;
}

}  // namespace

NaiveRun run_naive(const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance, std::size_t horizon,
                   const RunSeeds& seeds) {
  require_horizon(horizon);
  const std::size_t k = instance.arm_count();
  RunEngine rewards(seeds.rewards);
  Policy p0(pi0, k, horizon, seeds.policy0);
  Policy p1(pi1, k, horizon, seeds.policy1);
  NaiveRun run;
  run.traj0 = deploy(p0, instance, horizon, rewards);
  run.traj1 = deploy(p1, instance, horizon, rewards);
  return run;
}

ARRunRecord run_ar(const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance, std::size_t horizon,
                   const RunSeeds& seeds, Mutation mutation) {
  require_horizon(horizon);
  const std::size_t k = instance.arm_count();
  RunEngine rewards(seeds.rewards);
  Policy p0(pi0, k, horizon, seeds.policy0);
  Policy p1(pi1, k, horizon, seeds.policy1);

  ARRunRecord rec;
  rec.traj0 = deploy(p0, instance, horizon, rewards);

  // Unused control rewards per arm, in the order they were observed.
  std::vector<std::deque<double>> log(k);
  for (const auto& s : rec.traj0.steps) log[s.arm].push_back(s.reward);

  rec.traj1.steps.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const ArmIndex a = p1.select();
    auto& queue = log[a];
    Step step{a, 0.0, Source::Replay};
    if (!queue.empty()) {
      switch (mutation) {
        case Mutation::LifoReplay:
          step.reward = queue.back();
          queue.pop_back();
          break;
        case Mutation::ReplayWithoutMarking:
          step.reward = queue.front();
          break;
        default:
          step.reward = queue.front();
          queue.pop_front();
          break;
      }
    } else {
      step.reward = instance.sample_reward(a, rewards);
      step.source = Source::Environment;
    }
    p1.update(a, step.reward);
    rec.traj1.steps.push_back(step);
  }

  rec.pulls0 = p0.state().counts();
  rec.pulls1 = p1.state().counts();
  rec.n_env = rec.traj0.environment_steps() + rec.traj1.environment_steps();
  rec.n_replay = 2 * horizon - rec.n_env;
  return rec;
}

StackRun run_shared_stack(const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance,
                          std::size_t horizon, const RunSeeds& seeds, Mutation mutation) {
  require_horizon(horizon);
  const std::size_t k = instance.arm_count();
  RunEngine rewards(seeds.rewards);
  RewardStacks stacks(k, horizon);
  for (ArmIndex a = 0; a < k; ++a) {
    for (std::size_t n = 0; n < horizon; ++n) stacks.cell(a, n) = instance.sample_reward(a, rewards);
  }

  auto read = [&](Policy& policy, std::vector<std::size_t>& depth) {
    Trajectory traj;
    traj.steps.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const ArmIndex a = policy.select();
      const ArmIndex row = mutation == Mutation::StackSharedAcrossArms ? 0 : a;
      const double r = stacks.cell(row, depth[a]++);
      policy.update(a, r);
      traj.steps.push_back({a, r, Source::Environment});
    }
    return traj;
  };

  Policy p0(pi0, k, horizon, seeds.policy0);
  Policy p1(pi1, k, horizon, seeds.policy1);
  auto traj0 = read(p0, stacks.revealed0);
  auto traj1 = read(p1, stacks.revealed1);
  return {std::move(traj0), std::move(traj1), std::move(stacks)};
}

RunOutcome reduce(const BanditInstance& instance, const Trajectory& traj0, const Trajectory& traj1,
                  std::size_t n_env, std::size_t n_replay) {
  const std::size_t k = instance.arm_count();
  RunOutcome out;
  out.reward0 = traj0.total_reward();
  out.reward1 = traj1.total_reward();
  out.n_env = n_env;
  out.n_replay = n_replay;
  out.pulls0 = pull_counts(traj0, k);
  out.pulls1 = pull_counts(traj1, k);
  out.centered0.resize(k);
  out.centered1.resize(k);
  for (ArmIndex a = 0; a < k; ++a) {
    out.centered0[a] = centered_arm_sum(traj0, instance, a);
    out.centered1[a] = centered_arm_sum(traj1, instance, a);
  }
  return out;
}

RunOutcome simulate(Design design, const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance,
                    std::size_t horizon, const RunSeeds& seeds, Mutation mutation) {
  switch (design) {
    case Design::Naive: {
      const auto run = run_naive(pi0, pi1, instance, horizon, seeds);
      return reduce(instance, run.traj0, run.traj1, 2 * horizon, 0);
    }
    case Design::ArtificialReplay: {
      const auto rec = run_ar(pi0, pi1, instance, horizon, seeds, mutation);
      return reduce(instance, rec.traj0, rec.traj1, rec.n_env, rec.n_replay);
    }
    case Design::SharedStack: {
      const auto run = run_shared_stack(pi0, pi1, instance, horizon, seeds, mutation);
      const auto counts = interaction_counts(run.stacks.revealed0, run.stacks.revealed1);
      return reduce(instance, run.traj0, run.traj1, counts.n_env, counts.n_replay);
    }
  }
  throw std::invalid_argument("unknown design");
}

std::vector<RunOutcome> replicate(Design design, const PolicySpec& pi0, const PolicySpec& pi1,
                                  const BanditInstance& instance, std::size_t horizon, std::size_t runs,
                                  std::uint64_t base_seed, std::size_t workers, Mutation mutation) {
  std::vector<RunOutcome> out(runs);
  parallel_for(runs, workers, [&](std::size_t m) {
    out[m] = simulate(design, pi0, pi1, instance, horizon, RunSeeds::derive(base_seed, m), mutation);
  });
  return out;
}

void write_trajectory_header(std::ostream& os) { os << "run,phase,t,arm,reward,source\n"; }

void write_trajectory_rows(std::ostream& os, std::size_t run, const Trajectory& traj0, const Trajectory& traj1) {
  int phase = 1;
  for (const auto* traj : {&traj0, &traj1}) {
    for (std::size_t t = 0; t < traj->steps.size(); ++t) {
      const auto& s = traj->steps[t];
      os << run << ',' << phase << ',' << (t + 1) << ',' << (s.arm + 1) << ',' << format_number(s.reward) << ','
         << (s.source == Source::Environment ? "env" : "replay") << '\n';
    }
    ++phase;
  }
}

}  // namespace replaylab
