#include "replaylab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace replaylab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

ArmIndex argmax_lowest(const std::vector<double>& values) {
  ArmIndex best = 0;
  for (ArmIndex a = 1; a < values.size(); ++a) {
    if (values[a] > values[best]) best = a;
  }
  return best;
}

ArmIndex greedy_arm(const PolicyState& state) {
  ArmIndex best = 0;
  double best_mean = state.empirical_mean(0);
  for (ArmIndex a = 1; a < state.arm_count(); ++a) {
    const double m = state.empirical_mean(a);
    if (m > best_mean) {
      best = a;
      best_mean = m;
    }
  }
  return best;
}

ArmIndex scripted_arm(const Scripted& s, std::size_t period) {
  return s.arms[(period - 1) % s.arms.size()];
}

double beta_draw(double a, double b, SplitMix64& rng) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace

void validate(const PolicySpec& spec) {
  std::visit(Overloaded{
                 [](const Ucb1& p) { require(p.alpha > 0.0 && std::isfinite(p.alpha), "alpha: must be a positive real"); },
                 [](const UcbDelta& p) {
                   require(p.d.has_value() || p.delta.has_value(), "ucb_delta: needs d or delta");
                   if (p.d) require(*p.d >= 2.0 && std::isfinite(*p.d), "d: must be >= 2");
                   if (p.delta) require(*p.delta > 0.0 && *p.delta < 1.0, "delta: must lie in (0, 1)");
                 },
                 [](const TsBernoulli& p) {
                   require(p.alpha0 > 0.0 && std::isfinite(p.alpha0), "alpha0: must be a positive real");
                   require(p.beta0 > 0.0 && std::isfinite(p.beta0), "beta0: must be a positive real");
                 },
                 [](const TsGaussian& p) {
                   require(std::isfinite(p.prior_mean), "prior_mean: must be finite");
                   require(p.prior_var > 0.0 && std::isfinite(p.prior_var), "prior_var: must be a positive real");
                   require(p.obs_var > 0.0 && std::isfinite(p.obs_var), "obs_var: must be a positive real");
                 },
                 [](const EpsGreedy& p) { require(p.eps >= 0.0 && p.eps <= 1.0, "eps: must lie in [0, 1]"); },
                 [](const Scripted& p) { require(!p.arms.empty(), "arms: script must be nonempty"); },
             },
             spec);
}

PolicySpec bind_horizon(PolicySpec spec, std::size_t horizon) {
  if (auto* p = std::get_if<UcbDelta>(&spec); p && !p->delta) {
    if (!p->d) throw std::invalid_argument("ucb_delta: needs d or delta");
    if (horizon < 2) throw std::invalid_argument("ucb_delta: horizon-derived delta needs T >= 2");
    p->delta = std::pow(static_cast<double>(horizon), -*p->d);
  }
  return spec;
}

std::string policy_kind(const PolicySpec& spec) {
  return std::visit(Overloaded{
                        [](const Ucb1&) { return std::string("ucb1"); },
                        [](const UcbDelta&) { return std::string("ucb_delta"); },
                        [](const TsBernoulli&) { return std::string("ts_bernoulli"); },
                        [](const TsGaussian&) { return std::string("ts_gaussian"); },
                        [](const EpsGreedy&) { return std::string("eps_greedy"); },
                        [](const Scripted&) { return std::string("scripted"); },
                    },
                    spec);
}

bool is_deterministic(const PolicySpec& spec) noexcept {
  return std::holds_alternative<Ucb1>(spec) || std::holds_alternative<UcbDelta>(spec) ||
         std::holds_alternative<Scripted>(spec) ||
         (std::holds_alternative<EpsGreedy>(spec) && std::get<EpsGreedy>(spec).eps == 0.0);
}

PolicyState::PolicyState(std::size_t arm_count) : counts_(arm_count, 0), sums_(arm_count, 0.0) {
  if (arm_count == 0) throw std::invalid_argument("policy state needs at least one arm");
}

double PolicyState::empirical_mean(ArmIndex a) const {
  const auto n = counts_.at(a);
  return n == 0 ? 0.0 : sums_[a] / static_cast<double>(n);
}

std::optional<ArmIndex> PolicyState::first_unpulled() const noexcept {
  for (ArmIndex a = 0; a < counts_.size(); ++a) {
    if (counts_[a] == 0) return a;
  }
  return std::nullopt;
}

void PolicyState::record(ArmIndex arm, double reward) {
  if (arm >= counts_.size()) throw std::out_of_range("arm index outside the policy's arm set");
  ++counts_[arm];
  sums_[arm] += reward;
  ++period_;
}

BetaParams beta_posterior(const TsBernoulli& spec, const PolicyState& state, ArmIndex a) {
  const double successes = state.reward_sum(a);
  const double failures = static_cast<double>(state.count(a)) - successes;
  return {spec.alpha0 + successes, spec.beta0 + failures};
}

NormalParams gaussian_posterior(const TsGaussian& spec, const PolicyState& state, ArmIndex a) {
  const double precision = 1.0 / spec.prior_var + static_cast<double>(state.count(a)) / spec.obs_var;
  const double mean = (spec.prior_mean / spec.prior_var + state.reward_sum(a) / spec.obs_var) / precision;
  return {mean, 1.0 / precision};
}

double ucb_index(const PolicySpec& spec, const PolicyState& state, ArmIndex a) {
  const auto n = state.count(a);
  if (n == 0) return std::numeric_limits<double>::infinity();
  const double nd = static_cast<double>(n);
  const double mean = state.reward_sum(a) / nd;
  if (const auto* u = std::get_if<Ucb1>(&spec)) {
    const auto period = state.period() + 1;
    const double t = static_cast<double>(u->clock == UcbClock::Period ? period : std::max<std::size_t>(period - 1, 1));
    return mean + std::sqrt(u->alpha * std::log(t) / nd);
  }
  if (const auto* u = std::get_if<UcbDelta>(&spec)) {
    if (!u->delta) throw std::invalid_argument("ucb_delta: delta unresolved; bind the horizon first");
    return mean + std::sqrt(2.0 * std::log(1.0 / *u->delta) / nd);
  }
  throw std::invalid_argument("ucb_index: not a UCB policy");
}

namespace {

ArmIndex select_ucb(const PolicySpec& spec, const PolicyState& state) {
  ArmIndex best = 0;
  double best_index = ucb_index(spec, state, 0);
  for (ArmIndex a = 1; a < state.arm_count(); ++a) {
    const double idx = ucb_index(spec, state, a);
    if (idx > best_index) {
      best = a;
      best_index = idx;
    }
  }
  return best;
}

}  // namespace

ArmIndex select(const PolicySpec& spec, const PolicyState& state, SplitMix64& rng) {
  if (const auto* s = std::get_if<Scripted>(&spec)) {
    const ArmIndex a = scripted_arm(*s, state.period() + 1);
    if (a >= state.arm_count()) throw std::out_of_range("scripted arm outside the arm set");
    return a;
  }
  if (auto unpulled = state.first_unpulled()) return *unpulled;

  return std::visit(Overloaded{
                        [&](const Ucb1&) { return select_ucb(spec, state); },
                        [&](const UcbDelta&) { return select_ucb(spec, state); },
                        [&](const TsBernoulli& p) {
                          std::vector<double> draws(state.arm_count());
                          for (ArmIndex a = 0; a < draws.size(); ++a) {
                            const auto post = beta_posterior(p, state, a);
                            draws[a] = beta_draw(post.alpha, post.beta, rng);
                          }
                          return argmax_lowest(draws);
                        },
                        [&](const TsGaussian& p) {
                          std::vector<double> draws(state.arm_count());
                          for (ArmIndex a = 0; a < draws.size(); ++a) {
                            const auto post = gaussian_posterior(p, state, a);
                            draws[a] = post.mean + std::sqrt(post.variance) * standard_normal(rng);
                          }
                          return argmax_lowest(draws);
                        },
                        [&](const EpsGreedy& p) {
                          if (uniform01(rng) < p.eps) return uniform_index(rng, state.arm_count());
                          return greedy_arm(state);
                        },
                        [&](const Scripted&) -> ArmIndex { throw std::logic_error("unreachable"); },
                    },
                    spec);
}

void update(const PolicySpec& spec, PolicyState& state, ArmIndex arm, double reward) {
  if (std::holds_alternative<TsBernoulli>(spec) && !(reward >= 0.0 && reward <= 1.0)) {
    throw std::invalid_argument("ts_bernoulli: reward outside [0, 1]");
  }
  state.record(arm, reward);
}

std::vector<double> action_distribution(const PolicySpec& spec, const PolicyState& state) {
  const std::size_t k = state.arm_count();
  std::vector<double> probs(k, 0.0);
  if (std::holds_alternative<TsBernoulli>(spec) || std::holds_alternative<TsGaussian>(spec)) {
    throw UnsupportedKernel("Thompson sampling has no closed-form action distribution");
  }
  if (const auto* s = std::get_if<Scripted>(&spec)) {
    probs.at(scripted_arm(*s, state.period() + 1)) = 1.0;
    return probs;
  }
  if (auto unpulled = state.first_unpulled()) {
    probs[*unpulled] = 1.0;
    return probs;
  }
  if (const auto* e = std::get_if<EpsGreedy>(&spec)) {
    for (auto& p : probs) p = e->eps / static_cast<double>(k);
    probs[greedy_arm(state)] += 1.0 - e->eps;
    return probs;
  }
  probs[select_ucb(spec, state)] = 1.0;
  return probs;
}

namespace {

PolicySpec prepare(PolicySpec spec, std::size_t horizon) {
  validate(spec);
  return bind_horizon(std::move(spec), horizon);
}

}  // namespace

Policy::Policy(PolicySpec spec, std::size_t arm_count, std::size_t horizon, std::uint64_t seed)
    : spec_(prepare(std::move(spec), horizon)), state_(arm_count), stream_(seed) {}

ArmIndex Policy::select() const {
  auto rng = stream_.at(state_.period() + 1);
  return replaylab::select(spec_, state_, rng);
}

}  // namespace replaylab
