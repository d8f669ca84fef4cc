#include "replaylab/stats.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <stdexcept>

#include "replaylab/designs.hpp"

namespace replaylab {

Moments moments(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("moments of an empty sample");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  Moments m{samples.size(), mean, std::nullopt};
  if (samples.size() >= 2) {
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    m.variance = ss / (n - 1.0);
  }
  return m;
}

double variance_standard_error(std::span<const double> samples) {
  if (samples.size() < 2) throw std::invalid_argument("variance standard error needs M >= 2");
  const auto m = moments(samples);
  double m4 = 0.0;
  for (double x : samples) {
    const double d = x - m.mean;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(samples.size());
  m4 /= n;
  const double s2 = *m.variance;
  return std::sqrt(std::max(m4 - s2 * s2, 0.0) / n);
}

double theta_hat(const Trajectory& traj1, const Trajectory& traj0) {
  if (traj1.horizon() != traj0.horizon()) {
    throw std::invalid_argument("theta_hat: trajectories differ in length");
  }
  return traj1.total_reward() - traj0.total_reward();
}

ReplicationSummary summarize(std::span<const double> theta_samples) {
  const auto m = moments(theta_samples);
  ReplicationSummary s;
  s.M = m.count;
  s.theta_samples.assign(theta_samples.begin(), theta_samples.end());
  s.mean = m.mean;
  s.sample_var = m.variance;
  return s;
}

ReplicationSummary summarize(std::span<const RunOutcome> runs) {
  if (runs.empty()) throw std::invalid_argument("summarize: no replications");
  std::vector<double> thetas;
  thetas.reserve(runs.size());
  for (const auto& r : runs) thetas.push_back(r.theta());
  auto s = summarize(thetas);

  const std::size_t k = runs.front().pulls0.size();
  s.pulls0.assign(k, {});
  s.pulls1.assign(k, {});
  for (const auto& r : runs) {
    s.n_env_samples.push_back(static_cast<double>(r.n_env));
    s.n_replay_samples.push_back(static_cast<double>(r.n_replay));
    for (std::size_t a = 0; a < k; ++a) {
      s.pulls0[a].push_back(static_cast<double>(r.pulls0[a]));
      s.pulls1[a].push_back(static_cast<double>(r.pulls1[a]));
    }
  }
  return s;
}

double t_cdf(double x, std::size_t df) {
  if (df == 0) throw std::domain_error("t distribution needs df >= 1");
  if (x == 0.0) return 0.5;
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  const double nu = static_cast<double>(df);
  // P(|T| < |x|) = I_{x^2/(nu+x^2)}(1/2, nu/2); the complementary form keeps
  // precision in whichever tail is small.
  const double x2 = x * x;
  double central, tail;
  if (x2 < nu) {
    central = boost::math::ibeta(0.5, nu / 2.0, x2 / (nu + x2));
    tail = 0.5 * (1.0 - central);
  } else {
    tail = 0.5 * boost::math::ibeta(nu / 2.0, 0.5, nu / (nu + x2));
    central = 1.0 - 2.0 * tail;
  }
  return x > 0 ? 0.5 + 0.5 * central : tail;
}

double t_quantile(double p, std::size_t df) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("t_quantile: p must lie in (0, 1)");
  if (df == 0) throw std::domain_error("t_quantile: df must be >= 1");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -t_quantile(1.0 - p, df);

  double lo = 0.0;
  double hi = 1.0;
  while (t_cdf(hi, df) < p) {
    lo = hi;
    hi *= 2.0;
  }
  // Bisection to machine precision in x; the CDF is monotone.
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Interval confidence_interval(const ReplicationSummary& summary, double alpha) {
  if (summary.M < 2 || !summary.sample_var) throw std::invalid_argument("confidence interval needs M >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const double half =
      t_quantile(1.0 - alpha / 2.0, summary.M - 1) * std::sqrt(*summary.sample_var / static_cast<double>(summary.M));
  return {summary.mean - half, summary.mean + half};
}

double centered_arm_sum(const Trajectory& trajectory, const BanditInstance& instance, ArmIndex arm) {
  const double mu = instance.arm(arm).mean();
  double s = 0.0;
  for (const auto& step : trajectory.steps) {
    if (step.arm == arm) s += step.reward - mu;
  }
  return s;
}

VarianceReport variance_report(std::span<const double> rewards0, std::span<const double> rewards1,
                               std::span<const double> theta_ar, std::size_t horizon) {
  if (rewards0.size() != rewards1.size()) throw std::invalid_argument("variance_report: unaligned naive samples");
  if (rewards0.size() < 2 || theta_ar.size() < 2) throw std::invalid_argument("variance_report: needs M >= 2");
  if (horizon == 0) throw std::invalid_argument("variance_report: horizon must be >= 1");
  std::vector<double> theta_b(rewards0.size());
  for (std::size_t m = 0; m < theta_b.size(); ++m) theta_b[m] = rewards1[m] - rewards0[m];

  VarianceReport rep{};
  rep.var_b = *moments(theta_b).variance;
  rep.var_b_marginal = *moments(rewards0).variance + *moments(rewards1).variance;
  rep.var_ar = *moments(theta_ar).variance;
  const double t = static_cast<double>(horizon);
  rep.var_b_over_T = rep.var_b / t;
  rep.var_b_marginal_over_T = rep.var_b_marginal / t;
  rep.var_ar_over_T = rep.var_ar / t;
  return rep;
}

}  // namespace replaylab
