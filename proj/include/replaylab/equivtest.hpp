#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "replaylab/designs.hpp"
#include "replaylab/env.hpp"
#include "replaylab/policies.hpp"

namespace replaylab {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  bool pass = true;  // p_value > level
  double level = 0.01;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Two-sample chi-square test of homogeneity on aligned bins. Adjacent bins
/// are merged until both pooled expectations reach 5; df = groups - 1.
/// Throws std::invalid_argument when either histogram is empty.
TestReport chi_square_two_sample(std::span<const std::size_t> hist_a, std::span<const std::size_t> hist_b,
                                 double level = 0.01);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov tail.
/// Both samples need at least 20 values.
TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double level = 0.01);

/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_tail(double lambda);

/// Upper tail of the chi-square distribution.
double chi_square_tail(double statistic, double df);

struct HistogramPair {
  std::vector<std::size_t> a;
  std::vector<std::size_t> b;
};

/// Counts of each rounded integer value, over the union of both supports.
HistogramPair integer_histograms(std::span<const double> a, std::span<const double> b);

/// chi-square on integer support when `discrete`, KS otherwise.
TestReport two_sample(std::span<const double> a, std::span<const double> b, bool discrete, double level);

struct EquivalenceSetup {
  BanditInstance instance;
  PolicySpec pi0;
  PolicySpec pi1;
  std::size_t horizon = 100;
  std::size_t runs = 10000;
  std::uint64_t seed = 0;
  double family_level = 0.01;
  std::size_t workers = 1;
};

/// AR against shared stack (pull counts per policy and arm, theta, n_env)
/// and shared stack against naive per-policy marginals (pull counts,
/// cumulative reward). Levels are Bonferroni-adjusted to the family level.
/// The mutation is injected into the AR and shared-stack runners.
std::vector<TestReport> check_equivalence(const EquivalenceSetup& setup, Mutation mutation = Mutation::None);

/// True when every report passes.
bool all_pass(std::span<const TestReport> reports) noexcept;

/// theta_AR from run_ar(pi0, pi1) against -theta_AR from run_ar(pi1, pi0).
/// With flip_sign = false the swapped estimates enter unflipped (a defect).
TestReport check_symmetry(const EquivalenceSetup& setup, bool flip_sign = true);

/// Exact law of (traj0, traj1). Key layout: arm0, reward0, arm1, reward1, ...
/// for the control trajectory followed by the same for the treatment.
/// Arms are 0-based, rewards 0 or 1.
using OutcomeKey = std::vector<int>;
using ExactDistribution = std::map<OutcomeKey, double>;

/// Enumerates every reward realization and policy branch. Requires a
/// Bernoulli instance with K <= 2, T <= 4 and policies with an exact kernel.
ExactDistribution brute_force_distribution(const BanditInstance& instance, const PolicySpec& pi0,
                                           const PolicySpec& pi1, std::size_t horizon, Design design);

/// Law of one policy's trajectory (0 = control, 1 = treatment).
ExactDistribution marginal(const ExactDistribution& joint, int policy);

double total_mass(const ExactDistribution& d) noexcept;

/// Largest atom-wise absolute difference over the union of supports.
double max_atom_difference(const ExactDistribution& x, const ExactDistribution& y);

}  // namespace replaylab
