#include "replaylab/env.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "replaylab/trajectory.hpp"

namespace replaylab {

ArmDistribution ArmDistribution::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("Bernoulli mean must lie in [0, 1]");
  }
  return ArmDistribution(Bernoulli{p});
}

ArmDistribution ArmDistribution::gaussian(double mean, double variance) {
  if (!std::isfinite(mean)) {
    throw std::invalid_argument("Gaussian mean must be finite");
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("Gaussian variance must be positive");
  }
  return ArmDistribution(Gaussian{mean, variance});
}

double ArmDistribution::mean() const noexcept {
  return std::visit([](const auto& d) {
    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, Bernoulli>) {
      return d.p;
    } else {
      return d.mean;
    }
  }, kind_);
}

double ArmDistribution::variance() const noexcept {
  return std::visit([](const auto& d) {
    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, Bernoulli>) {
      return d.p * (1.0 - d.p);
    } else {
      return d.variance;
    }
  }, kind_);
}

namespace {

OptimalArm find_optimal(const std::vector<ArmDistribution>& arms) {
  ArmIndex best = 0;
  for (ArmIndex a = 1; a < arms.size(); ++a) {
    if (arms[a].mean() > arms[best].mean()) best = a;
  }
  const double top = arms[best].mean();
  const auto ties = std::count_if(arms.begin(), arms.end(),
                                  [top](const ArmDistribution& d) { return d.mean() == top; });
  return {best, ties == 1};
}

}  // namespace

BanditInstance::BanditInstance(std::vector<ArmDistribution> arms) : arms_(std::move(arms)), optimal_{0, true} {
  if (arms_.empty()) {
    throw std::invalid_argument("a bandit instance needs at least one arm");
  }
  optimal_ = find_optimal(arms_);
}

BanditInstance BanditInstance::bernoulli(std::span<const double> means) {
  std::vector<ArmDistribution> arms;
  arms.reserve(means.size());
  for (double p : means) arms.push_back(ArmDistribution::bernoulli(p));
  return BanditInstance(std::move(arms));
}

BanditInstance BanditInstance::gaussian(std::span<const double> means, double variance) {
  std::vector<ArmDistribution> arms;
  arms.reserve(means.size());
  for (double m : means) arms.push_back(ArmDistribution::gaussian(m, variance));
  return BanditInstance(std::move(arms));
}

const ArmDistribution& BanditInstance::arm(ArmIndex a) const {
  if (a >= arms_.size()) {
    throw std::out_of_range("arm index " + std::to_string(a + 1) + " outside 1.." + std::to_string(arms_.size()));
  }
  return arms_[a];
}

std::vector<double> BanditInstance::means() const {
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& d : arms_) out.push_back(d.mean());
  return out;
}

bool BanditInstance::all_bernoulli() const noexcept {
  return std::all_of(arms_.begin(), arms_.end(), [](const ArmDistribution& d) { return d.is_bernoulli(); });
}

std::vector<double> BanditInstance::gaps() const {
  const double top = best_mean();
  std::vector<double> out;
  out.reserve(arms_.size());
  for (const auto& d : arms_) out.push_back(top - d.mean());
  return out;
}

double regret(const BanditInstance& instance, const Trajectory& trajectory) {
  if (trajectory.steps.empty()) {
    throw std::invalid_argument("regret needs a trajectory of length >= 1");
  }
  for (const auto& s : trajectory.steps) {
    if (s.arm >= instance.arm_count()) throw std::invalid_argument("trajectory references an unknown arm");
  }
  return static_cast<double>(trajectory.horizon()) * instance.best_mean() - trajectory.total_reward();
}

std::string describe(const BanditInstance& instance) {
  std::ostringstream os;
  os << (instance.all_bernoulli() ? "bernoulli" : "mixed/gaussian") << " [";
  for (std::size_t a = 0; a < instance.arm_count(); ++a) {
    if (a) os << ", ";
    os << instance.arm(a).mean();
  }
  os << "]";
  return os.str();
}

double Trajectory::total_reward() const noexcept {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

std::size_t Trajectory::environment_steps() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const Step& s) { return s.source == Source::Environment; }));
}

std::size_t count_pulls(const Trajectory& trajectory, ArmIndex arm, std::size_t t) {
  if (t > trajectory.horizon()) {
    throw std::out_of_range("period beyond the trajectory horizon");
  }
  return static_cast<std::size_t>(std::count_if(trajectory.steps.begin(), trajectory.steps.begin() + static_cast<std::ptrdiff_t>(t),
                                                [arm](const Step& s) { return s.arm == arm; }));
}

std::vector<std::size_t> pull_counts(const Trajectory& trajectory, std::size_t arm_count) {
  std::vector<std::size_t> counts(arm_count, 0);
  for (const auto& s : trajectory.steps) {
    if (s.arm >= arm_count) throw std::invalid_argument("trajectory references an unknown arm");
    ++counts[s.arm];
  }
  return counts;
}

}  // namespace replaylab
