#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "replaylab/rng.hpp"

namespace replaylab {

/// Arm position. The C++ API is 0-based; every wire format (JSON, CSV,
/// CLI output) presents arms 1-based.
using ArmIndex = std::size_t;

struct Bernoulli {
  double p;
};

struct Gaussian {
  double mean;
  double variance;
};

/// Reward distribution of one arm.
class ArmDistribution {
 public:
  /// Throws std::invalid_argument unless p is in [0, 1].
  static ArmDistribution bernoulli(double p);
  /// Throws std::invalid_argument unless variance > 0.
  static ArmDistribution gaussian(double mean, double variance);

  double mean() const noexcept;
  double variance() const noexcept;
  bool is_bernoulli() const noexcept { return std::holds_alternative<Bernoulli>(kind_); }
  const std::variant<Bernoulli, Gaussian>& kind() const noexcept { return kind_; }

  /// Bernoulli uses one draw, Gaussian two.
  template <class Urbg>
  double sample(Urbg& rng) const {
    if (const auto* b = std::get_if<Bernoulli>(&kind_)) {
      return uniform01(rng) < b->p ? 1.0 : 0.0;
    }
    const auto& g = std::get<Gaussian>(kind_);
    return g.mean + std::sqrt(g.variance) * standard_normal(rng);
  }

 private:
  explicit ArmDistribution(std::variant<Bernoulli, Gaussian> kind) : kind_(kind) {}
  std::variant<Bernoulli, Gaussian> kind_;
};

struct OptimalArm {
  ArmIndex arm;  // lowest index among the maximizers
  bool unique;
};

/// A fixed K-armed environment. Immutable after construction.
class BanditInstance {
 public:
  /// Throws std::invalid_argument when arms is empty.
  explicit BanditInstance(std::vector<ArmDistribution> arms);

  static BanditInstance bernoulli(std::span<const double> means);
  static BanditInstance gaussian(std::span<const double> means, double variance);

  std::size_t arm_count() const noexcept { return arms_.size(); }
  const ArmDistribution& arm(ArmIndex a) const;
  const std::vector<ArmDistribution>& arms() const noexcept { return arms_; }
  std::vector<double> means() const;
  bool all_bernoulli() const noexcept;

  OptimalArm optimal_arm() const noexcept { return optimal_; }
  double best_mean() const noexcept { return arms_[optimal_.arm].mean(); }
  /// Δ_a = μ* − μ_a for every arm.
  std::vector<double> gaps() const;

  /// Throws std::out_of_range for a bad arm index.
  template <class Urbg>
  double sample_reward(ArmIndex a, Urbg& rng) const {
    return arm(a).sample(rng);
  }

 private:
  std::vector<ArmDistribution> arms_;
  OptimalArm optimal_;
};

struct Trajectory;

/// T·μ* minus the realized cumulative reward of a trajectory.
double regret(const BanditInstance& instance, const Trajectory& trajectory);

std::string describe(const BanditInstance& instance);

}  // namespace replaylab
