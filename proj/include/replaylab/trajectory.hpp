#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "replaylab/env.hpp"

namespace replaylab {

enum class Source : std::uint8_t { Environment, Replay };

struct Step {
  ArmIndex arm;
  double reward;
  Source source;

  friend bool operator==(const Step&, const Step&) = default;
};

/// Ordered action-reward sequence of one policy over the horizon.
struct Trajectory {
  std::vector<Step> steps;

  std::size_t horizon() const noexcept { return steps.size(); }
  double total_reward() const noexcept;
  std::size_t environment_steps() const noexcept;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// N_a(t): pulls of `arm` among the first `t` steps. Throws std::out_of_range
/// when t exceeds the horizon.
std::size_t count_pulls(const Trajectory& trajectory, ArmIndex arm, std::size_t t);

/// N_a(T) for every arm.
std::vector<std::size_t> pull_counts(const Trajectory& trajectory, std::size_t arm_count);

}  // namespace replaylab
