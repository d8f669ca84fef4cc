#include "replaylab/equivtest.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace replaylab {

double chi_square_tail(double statistic, double df) {
  if (df <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

TestReport chi_square_two_sample(std::span<const std::size_t> hist_a, std::span<const std::size_t> hist_b,
                                 double level) {
  if (hist_a.size() != hist_b.size()) throw std::invalid_argument("chi-square: histograms use different binning");
  double n_a = 0.0, n_b = 0.0;
  for (auto c : hist_a) n_a += static_cast<double>(c);
  for (auto c : hist_b) n_b += static_cast<double>(c);
  if (n_a == 0.0 || n_b == 0.0) throw std::invalid_argument("chi-square: empty histogram");
  const double n = n_a + n_b;

  // Greedy left-to-right pooling of adjacent bins.
  std::vector<std::pair<double, double>> groups;
  double acc_a = 0.0, acc_b = 0.0;
  auto enough = [&](double ca, double cb) {
    const double pooled = ca + cb;
    return pooled * n_a / n >= 5.0 && pooled * n_b / n >= 5.0;
  };
  for (std::size_t i = 0; i < hist_a.size(); ++i) {
    acc_a += static_cast<double>(hist_a[i]);
    acc_b += static_cast<double>(hist_b[i]);
    if (enough(acc_a, acc_b)) {
      groups.emplace_back(acc_a, acc_b);
      acc_a = acc_b = 0.0;
    }
  }
  if (acc_a + acc_b > 0.0) {
    if (groups.empty()) {
      groups.emplace_back(acc_a, acc_b);
    } else {
      groups.back().first += acc_a;
      groups.back().second += acc_b;
    }
  }

  double stat = 0.0;
  for (const auto& [ca, cb] : groups) {
    const double pooled = ca + cb;
    const double ea = pooled * n_a / n;
    const double eb = pooled * n_b / n;
    stat += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  TestReport rep;
  rep.name = "chi_square";
  rep.statistic = stat;
  rep.p_value = chi_square_tail(stat, static_cast<double>(groups.size()) - 1.0);
  rep.level = level;
  rep.pass = rep.p_value > level;
  rep.n_a = static_cast<std::size_t>(n_a);
  rep.n_b = static_cast<std::size_t>(n_b);
  return rep;
}

double kolmogorov_tail(double lambda) {
  if (lambda < 0.2) return 1.0;  // the series is 1 to double precision here
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestReport ks_two_sample(std::span<const double> a, std::span<const double> b, double level) {
  if (a.size() < 20 || b.size() < 20) throw std::invalid_argument("KS test needs at least 20 values per sample");
  std::vector<double> xa(a.begin(), a.end());
  std::vector<double> xb(b.begin(), b.end());
  std::sort(xa.begin(), xa.end());
  std::sort(xb.begin(), xb.end());
  const double na = static_cast<double>(xa.size());
  const double nb = static_cast<double>(xb.size());

  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < xa.size() && j < xb.size()) {
    const double x = std::min(xa[i], xb[j]);
    while (i < xa.size() && xa[i] == x) ++i;
    while (j < xb.size() && xb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double root = std::sqrt(ne);
  TestReport rep;
  rep.name = "ks";
  rep.statistic = d;
  rep.p_value = kolmogorov_tail((root + 0.12 + 0.11 / root) * d);
  rep.level = level;
  rep.pass = rep.p_value > level;
  rep.n_a = a.size();
  rep.n_b = b.size();
  return rep;
}

HistogramPair integer_histograms(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("integer_histograms: empty sample");
  auto lo = std::llround(a.front());
  auto hi = lo;
  for (auto s : {a, b}) {
    for (double x : s) {
      lo = std::min(lo, std::llround(x));
      hi = std::max(hi, std::llround(x));
    }
  }
  const auto width = static_cast<std::size_t>(hi - lo + 1);
  HistogramPair h{std::vector<std::size_t>(width, 0), std::vector<std::size_t>(width, 0)};
  for (double x : a) ++h.a[static_cast<std::size_t>(std::llround(x) - lo)];
  for (double x : b) ++h.b[static_cast<std::size_t>(std::llround(x) - lo)];
  return h;
}

TestReport two_sample(std::span<const double> a, std::span<const double> b, bool discrete, double level) {
  if (discrete) {
    const auto h = integer_histograms(a, b);
    return chi_square_two_sample(h.a, h.b, level);
  }
  return ks_two_sample(a, b, level);
}

namespace {

constexpr std::uint64_t kArTag = 0xA11CE;
constexpr std::uint64_t kStackTag = 0x57AC4;
constexpr std::uint64_t kNaiveTag = 0x0A1FE;
constexpr std::uint64_t kSwapTag = 0x5A4B;

std::vector<double> column(const std::vector<RunOutcome>& runs, auto&& field) {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(static_cast<double>(field(r)));
  return out;
}

TestReport named(TestReport rep, std::string name) {
  rep.name = std::move(name);
  return rep;
}

}  // namespace

std::vector<TestReport> check_equivalence(const EquivalenceSetup& setup, Mutation mutation) {
  const auto& inst = setup.instance;
  const std::size_t k = inst.arm_count();
  const bool discrete = inst.all_bernoulli();
  const auto ar = replicate(Design::ArtificialReplay, setup.pi0, setup.pi1, inst, setup.horizon, setup.runs,
                            combine_seed(setup.seed, kArTag), setup.workers, mutation);
  const auto stack = replicate(Design::SharedStack, setup.pi0, setup.pi1, inst, setup.horizon, setup.runs,
                               combine_seed(setup.seed, kStackTag), setup.workers, mutation);
  const auto naive = replicate(Design::Naive, setup.pi0, setup.pi1, inst, setup.horizon, setup.runs,
                               combine_seed(setup.seed, kNaiveTag), setup.workers);

  const std::size_t tests = 4 * k + 4;
  const double level = setup.family_level / static_cast<double>(tests);
  std::vector<TestReport> reports;
  reports.reserve(tests);

  auto pulls = [](int policy, std::size_t a) {
    return [policy, a](const RunOutcome& r) { return policy == 0 ? r.pulls0[a] : r.pulls1[a]; };
  };
  auto add_pull_tests = [&](const std::vector<RunOutcome>& x, const std::vector<RunOutcome>& y,
                            const std::string& prefix) {
    for (int policy = 0; policy < 2; ++policy) {
      for (std::size_t a = 0; a < k; ++a) {
        const auto h = integer_histograms(column(x, pulls(policy, a)), column(y, pulls(policy, a)));
        reports.push_back(named(chi_square_two_sample(h.a, h.b, level),
                                prefix + "/pulls" + std::to_string(policy) + "/arm" + std::to_string(a + 1)));
      }
    }
  };

  add_pull_tests(ar, stack, "ar_vs_stack");
  auto theta = [](const RunOutcome& r) { return r.theta(); };
  reports.push_back(named(two_sample(column(ar, theta), column(stack, theta), discrete, level), "ar_vs_stack/theta"));
  auto n_env = [](const RunOutcome& r) { return r.n_env; };
  {
    const auto h = integer_histograms(column(ar, n_env), column(stack, n_env));
    reports.push_back(named(chi_square_two_sample(h.a, h.b, level), "ar_vs_stack/n_env"));
  }

  add_pull_tests(stack, naive, "stack_vs_naive");
  auto reward0 = [](const RunOutcome& r) { return r.reward0; };
  auto reward1 = [](const RunOutcome& r) { return r.reward1; };
  reports.push_back(
      named(two_sample(column(stack, reward0), column(naive, reward0), discrete, level), "stack_vs_naive/reward0"));
  reports.push_back(
      named(two_sample(column(stack, reward1), column(naive, reward1), discrete, level), "stack_vs_naive/reward1"));
  return reports;
}

bool all_pass(std::span<const TestReport> reports) noexcept {
  return std::all_of(reports.begin(), reports.end(), [](const TestReport& r) { return r.pass; });
}

TestReport check_symmetry(const EquivalenceSetup& setup, bool flip_sign) {
  const auto& inst = setup.instance;
  const auto forward = replicate(Design::ArtificialReplay, setup.pi0, setup.pi1, inst, setup.horizon, setup.runs,
                                 combine_seed(setup.seed, kArTag), setup.workers);
  const auto swapped = replicate(Design::ArtificialReplay, setup.pi1, setup.pi0, inst, setup.horizon, setup.runs,
                                 combine_seed(setup.seed, kSwapTag), setup.workers);
  const double sign = flip_sign ? -1.0 : 1.0;
  auto theta = [](const RunOutcome& r) { return r.theta(); };
  auto adjusted = [sign](const RunOutcome& r) { return sign * r.theta(); };
  return named(two_sample(column(forward, theta), column(swapped, adjusted), inst.all_bernoulli(), setup.family_level),
               "symmetry/theta");
}

}  // namespace replaylab
