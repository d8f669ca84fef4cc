#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "replaylab/env.hpp"
#include "replaylab/policies.hpp"
#include "replaylab/trajectory.hpp"

namespace replaylab {

enum class Design { Naive, ArtificialReplay, SharedStack };

std::string_view design_name(Design d) noexcept;

/// Seeds of the four independent sub-streams of one replication.
struct RunSeeds {
  std::uint64_t rewards;
  std::uint64_t policy0;
  std::uint64_t policy1;
  std::uint64_t aux;

  static RunSeeds derive(std::uint64_t base, std::uint64_t run_index) noexcept;
};

/// Deliberate defects used to check that the equivalence battery has teeth.
enum class Mutation {
  None,
  LifoReplay,            // replay the latest unused control reward
  ReplayWithoutMarking,  // replay the earliest reward but never consume it
  StackSharedAcrossArms, // every arm reads the first arm's reward stack
};

struct NaiveRun {
  Trajectory traj0;
  Trajectory traj1;
};

/// One coupled run: control trajectory (phase 1), treatment trajectory
/// (phase 2) and the interaction counters.
struct ARRunRecord {
  Trajectory traj0;
  Trajectory traj1;
  std::size_t n_env = 0;     // fresh environment draws over both phases
  std::size_t n_replay = 0;  // treatment steps served from the control log
  std::vector<std::size_t> pulls0;
  std::vector<std::size_t> pulls1;
};

/// Pre-drawn K x T reward matrix. cell(a, k) is the (k+1)-th reward of arm a.
class RewardStacks {
 public:
  RewardStacks(std::size_t arm_count, std::size_t depth);

  std::size_t arm_count() const noexcept { return arm_count_; }
  std::size_t depth() const noexcept { return depth_; }
  double cell(ArmIndex a, std::size_t k) const { return cells_.at(a * depth_ + k); }
  double& cell(ArmIndex a, std::size_t k) { return cells_.at(a * depth_ + k); }

  /// Cells of arm a revealed to each policy (equals its pull count).
  std::vector<std::size_t> revealed0;
  std::vector<std::size_t> revealed1;

 private:
  std::size_t arm_count_;
  std::size_t depth_;
  std::vector<double> cells_;
};

struct StackRun {
  Trajectory traj0;
  Trajectory traj1;
  RewardStacks stacks;
};

struct InteractionCounts {
  std::size_t n_env;
  std::size_t n_replay;
};

/// (sum of per-arm max, sum of per-arm min). Throws std::invalid_argument on
/// length or total mismatch.
InteractionCounts interaction_counts(std::span<const std::size_t> pulls0, std::span<const std::size_t> pulls1);

/// Two independent deployments, each against its own environment draws.
NaiveRun run_naive(const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance, std::size_t horizon,
                   const RunSeeds& seeds);

/// Control runs against the environment; the treatment then reuses the
/// control's rewards arm by arm, earliest unused first, and only samples the
/// environment once an arm's log is exhausted.
ARRunRecord run_ar(const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance, std::size_t horizon,
                   const RunSeeds& seeds, Mutation mutation = Mutation::None);

/// Both policies read one pre-drawn stack per arm; the n-th pull of arm a
/// reveals cell (a, n-1). Every step is flagged Environment.
StackRun run_shared_stack(const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance,
                          std::size_t horizon, const RunSeeds& seeds, Mutation mutation = Mutation::None);

/// Per-run reduction kept by replication loops (full trajectories are too
/// large to hold for 10^4 runs at T = 10^4).
struct RunOutcome {
  double reward0 = 0.0;
  double reward1 = 0.0;
  std::size_t n_env = 0;
  std::size_t n_replay = 0;
  std::vector<std::size_t> pulls0;
  std::vector<std::size_t> pulls1;
  /// Per-arm sum of (reward - mu_a) over each policy's pulls of that arm.
  std::vector<double> centered0;
  std::vector<double> centered1;

  double theta() const noexcept { return reward1 - reward0; }
};

RunOutcome reduce(const BanditInstance& instance, const Trajectory& traj0, const Trajectory& traj1,
                  std::size_t n_env, std::size_t n_replay);

/// Runs one replication of `design` and reduces it.
RunOutcome simulate(Design design, const PolicySpec& pi0, const PolicySpec& pi1, const BanditInstance& instance,
                    std::size_t horizon, const RunSeeds& seeds, Mutation mutation = Mutation::None);

/// M replications with seeds RunSeeds::derive(base_seed, m), m = 0..M-1.
/// Work is split across `workers` threads; the result depends only on the
/// run index, never on scheduling.
std::vector<RunOutcome> replicate(Design design, const PolicySpec& pi0, const PolicySpec& pi1,
                                  const BanditInstance& instance, std::size_t horizon, std::size_t runs,
                                  std::uint64_t base_seed, std::size_t workers = 1,
                                  Mutation mutation = Mutation::None);

/// Header: run,phase,t,arm,reward,source (arms and periods 1-based).
void write_trajectory_header(std::ostream& os);
void write_trajectory_rows(std::ostream& os, std::size_t run, const Trajectory& traj0, const Trajectory& traj1);

}  // namespace replaylab
