#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "replaylab/env.hpp"
#include "replaylab/trajectory.hpp"

namespace replaylab {

struct RunOutcome;

/// Sample mean and unbiased (M - 1) variance; variance is empty for M = 1.
struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  std::optional<double> variance;
};

/// Throws std::invalid_argument on an empty sample.
Moments moments(std::span<const double> samples);

/// Standard error of the unbiased sample variance, sqrt((m4 - s^4) / M)
/// with m4 the fourth central moment. Requires M >= 2.
double variance_standard_error(std::span<const double> samples);

/// Cumulative reward of traj1 minus that of traj0.
double theta_hat(const Trajectory& traj1, const Trajectory& traj0);

/// Monte Carlo aggregate over M replications of one design.
struct ReplicationSummary {
  std::size_t M = 0;
  std::vector<double> theta_samples;
  double mean = 0.0;
  std::optional<double> sample_var;
  std::vector<double> n_env_samples;
  std::vector<double> n_replay_samples;
  /// pulls0[a][m]: pulls of arm a by the control policy in run m.
  std::vector<std::vector<double>> pulls0;
  std::vector<std::vector<double>> pulls1;
};

ReplicationSummary summarize(std::span<const double> theta_samples);
ReplicationSummary summarize(std::span<const RunOutcome> runs);

/// Student-t CDF through the regularized incomplete beta function.
double t_cdf(double x, std::size_t df);

/// x with t_cdf(x, df) = p. Throws std::domain_error unless 0 < p < 1 and df >= 1.
double t_quantile(double p, std::size_t df);

struct Interval {
  double lo;
  double hi;
};

/// mean +/- t_{1-alpha/2, M-1} * sqrt(sample_var / M). Throws for M < 2 or
/// alpha outside (0, 1).
Interval confidence_interval(const ReplicationSummary& summary, double alpha);

/// Sum over the trajectory's pulls of `arm` of (reward - mu_arm).
double centered_arm_sum(const Trajectory& trajectory, const BanditInstance& instance, ArmIndex arm);

struct VarianceReport {
  double var_b;            // from theta_b = rewards1 - rewards0 directly
  double var_b_marginal;   // Var(rewards0) + Var(rewards1)
  double var_ar;
  double var_b_over_T;
  double var_b_marginal_over_T;
  double var_ar_over_T;
};

/// `rewards0`/`rewards1` are the naive design's cumulative rewards per run
/// (aligned), `theta_ar` the AR estimates. Each needs at least two runs.
VarianceReport variance_report(std::span<const double> rewards0, std::span<const double> rewards1,
                               std::span<const double> theta_ar, std::size_t horizon);

}  // namespace replaylab
