#include <cmath>
#include <functional>
#include <stdexcept>

#include "replaylab/equivtest.hpp"

namespace replaylab {

namespace {

/// One fully specified single-policy path and its probability.
struct Path {
  OutcomeKey key;
  double prob;
};

struct Enumerator {
  const BanditInstance& instance;
  std::size_t horizon;

  double reward_prob(ArmIndex a, int r) const {
    const double p = instance.arm(a).mean();
    return r == 1 ? p : 1.0 - p;
  }

  /// All paths of `spec` when its n-th pull of arm a must return
  /// `fixed(a, n)` if that is >= 0, and is drawn fresh otherwise.
  std::vector<Path> paths(const PolicySpec& spec, const std::function<int(ArmIndex, std::size_t)>& fixed) const {
    std::vector<Path> out;
    PolicyState state(instance.arm_count());
    OutcomeKey key;
    std::function<void(double)> step = [&](double prob) {
      if (state.period() == horizon) {
        out.push_back({key, prob});
        return;
      }
      const auto kernel = action_distribution(spec, state);
      for (ArmIndex a = 0; a < kernel.size(); ++a) {
        if (kernel[a] == 0.0) continue;
        const int forced = fixed(a, state.count(a));
        for (int r = 0; r <= 1; ++r) {
          const double q = forced >= 0 ? (r == forced ? 1.0 : 0.0) : reward_prob(a, r);
          if (q == 0.0) continue;
          const PolicyState saved = state;
          update(spec, state, a, r);
          key.push_back(static_cast<int>(a));
          key.push_back(r);
          step(prob * kernel[a] * q);
          key.resize(key.size() - 2);
          state = saved;
        }
      }
    };
    step(1.0);
    return out;
  }
};

void check_supported(const BanditInstance& instance, const PolicySpec& pi0, const PolicySpec& pi1,
                     std::size_t horizon) {
  if (!instance.all_bernoulli()) throw std::invalid_argument("brute force needs Bernoulli rewards");
  if (instance.arm_count() > 2) throw std::invalid_argument("brute force supports K <= 2");
  if (horizon == 0 || horizon > 4) throw std::invalid_argument("brute force supports 1 <= T <= 4");
  for (const auto* spec : {&pi0, &pi1}) {
    if (std::holds_alternative<TsBernoulli>(*spec) || std::holds_alternative<TsGaussian>(*spec)) {
      throw UnsupportedKernel("brute force needs an exact action distribution");
    }
    validate(*spec);
  }
}

OutcomeKey join(const OutcomeKey& a, const OutcomeKey& b) {
  OutcomeKey k = a;
  k.insert(k.end(), b.begin(), b.end());
  return k;
}

}  // namespace

ExactDistribution brute_force_distribution(const BanditInstance& instance, const PolicySpec& pi0_in,
                                           const PolicySpec& pi1_in, std::size_t horizon, Design design) {
  check_supported(instance, pi0_in, pi1_in, horizon);
  const PolicySpec pi0 = bind_horizon(pi0_in, horizon);
  const PolicySpec pi1 = bind_horizon(pi1_in, horizon);
  const Enumerator en{instance, horizon};
  const std::size_t k = instance.arm_count();
  auto fresh = [](ArmIndex, std::size_t) { return -1; };
  ExactDistribution dist;

  switch (design) {
    case Design::Naive: {
      const auto p0 = en.paths(pi0, fresh);
      const auto p1 = en.paths(pi1, fresh);
      for (const auto& x : p0) {
        for (const auto& y : p1) dist[join(x.key, y.key)] += x.prob * y.prob;
      }
      break;
    }
    case Design::ArtificialReplay: {
      for (const auto& x : en.paths(pi0, fresh)) {
        // The control's rewards per arm in observation order.
        std::vector<std::vector<int>> logged(k);
        for (std::size_t i = 0; i < x.key.size(); i += 2) {
          logged[static_cast<std::size_t>(x.key[i])].push_back(x.key[i + 1]);
        }
        auto replay = [&](ArmIndex a, std::size_t n) { return n < logged[a].size() ? logged[a][n] : -1; };
        for (const auto& y : en.paths(pi1, replay)) dist[join(x.key, y.key)] += x.prob * y.prob;
      }
      break;
    }
    case Design::SharedStack: {
      const std::size_t cells = k * horizon;
      for (std::uint32_t bits = 0; bits < (1u << cells); ++bits) {
        double prob = 1.0;
        for (std::size_t c = 0; c < cells; ++c) {
          prob *= en.reward_prob(c / horizon, static_cast<int>((bits >> c) & 1u));
        }
        if (prob == 0.0) continue;
        auto stack = [&](ArmIndex a, std::size_t n) { return static_cast<int>((bits >> (a * horizon + n)) & 1u); };
        const auto p0 = en.paths(pi0, stack);
        const auto p1 = en.paths(pi1, stack);
        for (const auto& x : p0) {
          for (const auto& y : p1) dist[join(x.key, y.key)] += prob * x.prob * y.prob;
        }
      }
      break;
    }
  }
  return dist;
}

ExactDistribution marginal(const ExactDistribution& joint, int policy) {
  ExactDistribution out;
  for (const auto& [key, prob] : joint) {
    const auto half = static_cast<std::ptrdiff_t>(key.size() / 2);
    OutcomeKey part = policy == 0 ? OutcomeKey(key.begin(), key.begin() + half) : OutcomeKey(key.begin() + half, key.end());
    out[part] += prob;
  }
  return out;
}

double total_mass(const ExactDistribution& d) noexcept {
  double s = 0.0;
  for (const auto& [key, prob] : d) s += prob;
  return s;
}

double max_atom_difference(const ExactDistribution& x, const ExactDistribution& y) {
  double worst = 0.0;
  for (const auto& [key, prob] : x) {
    const auto it = y.find(key);
    worst = std::max(worst, std::abs(prob - (it == y.end() ? 0.0 : it->second)));
  }
  for (const auto& [key, prob] : y) {
    if (!x.contains(key)) worst = std::max(worst, prob);
  }
  return worst;
}

}  // namespace replaylab
