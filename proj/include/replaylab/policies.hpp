#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "replaylab/env.hpp"
#include "replaylab/rng.hpp"

namespace replaylab {

/// Which period count enters the log of the UCB1 bonus.
enum class UcbClock {
  Period,     // ln t, t the period being decided
  Completed,  // ln(t - 1), the number of completed periods (floored at 1)
};

/// UCB1: mean + sqrt(alpha * ln t / n).
struct Ucb1 {
  double alpha = 2.0;
  UcbClock clock = UcbClock::Period;
};

/// UCB-delta: mean + sqrt(2 ln(1/delta) / n). Either `delta` is given
/// directly or it is derived from the horizon as T^-d.
struct UcbDelta {
  std::optional<double> d;
  std::optional<double> delta;
};

/// Thompson sampling with independent Beta priors (rewards in [0, 1]).
struct TsBernoulli {
  double alpha0 = 1.0;
  double beta0 = 1.0;
};

/// Thompson sampling with independent Gaussian priors and known
/// observation variance.
struct TsGaussian {
  double prior_mean = 0.0;
  double prior_var = 1.0;
  double obs_var = 1.0;
};

struct EpsGreedy {
  double eps = 0.1;
};

/// Fixed action script, repeated cyclically. Skips the initialization
/// round; used for hand-built scenarios and exact checks.
struct Scripted {
  std::vector<ArmIndex> arms;
};

using PolicySpec = std::variant<Ucb1, UcbDelta, TsBernoulli, TsGaussian, EpsGreedy, Scripted>;

/// Throws std::invalid_argument naming the offending parameter.
void validate(const PolicySpec& spec);

/// Fills in horizon-dependent parameters (UCB-delta with d). Throws when a
/// required horizon is missing.
PolicySpec bind_horizon(PolicySpec spec, std::size_t horizon);

/// Short label ("ucb1", "ts_bernoulli", ...).
std::string policy_kind(const PolicySpec& spec);

/// True when the kernel is a point mass at every history.
bool is_deterministic(const PolicySpec& spec) noexcept;

/// Sufficient statistics of a policy's history.
class PolicyState {
 public:
  explicit PolicyState(std::size_t arm_count);

  std::size_t arm_count() const noexcept { return counts_.size(); }
  /// Number of completed updates; the next decision is for period() + 1.
  std::size_t period() const noexcept { return period_; }
  std::size_t count(ArmIndex a) const { return counts_.at(a); }
  double reward_sum(ArmIndex a) const { return sums_.at(a); }
  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  const std::vector<double>& reward_sums() const noexcept { return sums_; }
  /// Empirical mean; 0 for an unpulled arm.
  double empirical_mean(ArmIndex a) const;

  /// Lowest-index arm with zero pulls, if any.
  std::optional<ArmIndex> first_unpulled() const noexcept;

  void record(ArmIndex arm, double reward);

 private:
  std::size_t period_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<double> sums_;
};

class UnsupportedKernel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct BetaParams {
  double alpha;
  double beta;
};

struct NormalParams {
  double mean;
  double variance;
};

BetaParams beta_posterior(const TsBernoulli& spec, const PolicyState& state, ArmIndex a);
NormalParams gaussian_posterior(const TsGaussian& spec, const PolicyState& state, ArmIndex a);

/// Optimistic index of a UCB-type spec (Ucb1 or bound UcbDelta); +inf for
/// an unpulled arm.
double ucb_index(const PolicySpec& spec, const PolicyState& state, ArmIndex a);

/// Chooses the arm for period state.period() + 1. `rng` is the policy's
/// stream for that period and is independent of every reward draw.
ArmIndex select(const PolicySpec& spec, const PolicyState& state, SplitMix64& rng);

/// Validates the reward against the spec, then records it.
void update(const PolicySpec& spec, PolicyState& state, ArmIndex arm, double reward);

/// Exact kernel pi_t(. | history) for UCB variants, epsilon-greedy and
/// scripted policies. Throws UnsupportedKernel for Thompson sampling.
std::vector<double> action_distribution(const PolicySpec& spec, const PolicyState& state);

/// A spec together with its running state and randomness.
class Policy {
 public:
  Policy(PolicySpec spec, std::size_t arm_count, std::size_t horizon, std::uint64_t seed);

  ArmIndex select() const;
  void update(ArmIndex arm, double reward) { replaylab::update(spec_, state_, arm, reward); }

  const PolicySpec& spec() const noexcept { return spec_; }
  const PolicyState& state() const noexcept { return state_; }

 private:
  PolicySpec spec_;
  PolicyState state_;
  PolicyStream stream_;
};

}  // namespace replaylab
