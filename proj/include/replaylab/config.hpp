#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "replaylab/designs.hpp"
#include "replaylab/env.hpp"
#include "replaylab/policies.hpp"

namespace replaylab {

/// Validation failure tied to a config field (dotted path, e.g. "policy1.eps").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Per-arm means drawn independently from U[low, high].
struct UniformMeansPrior {
  bool bernoulli = true;
  std::size_t arms = 2;
  double low = 0.0;
  double high = 1.0;
  double variance = 1.0;  // Gaussian family only
};

/// Finite mixture of fixed instances (a point mass when it has one entry).
struct DiscretePrior {
  std::vector<std::pair<double, BanditInstance>> atoms;  // (weight, instance)
};

using InstancePrior = std::variant<UniformMeansPrior, DiscretePrior>;

BanditInstance sample_instance(const InstancePrior& prior, RunEngine& rng);

struct BayesBlock {
  InstancePrior prior;
  std::size_t instances = 1000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  BanditInstance instance = BanditInstance::bernoulli(std::vector<double>{0.5});
  PolicySpec policy0 = Ucb1{};
  PolicySpec policy1 = Ucb1{};
  std::vector<std::size_t> horizons{10, 100, 1000, 10000};
  std::size_t m_ci = 10;
  std::size_t m_var = 10000;
  double ci_alpha = 0.01;
  std::uint64_t master_seed = 0;
  std::vector<Design> designs{Design::Naive, Design::ArtificialReplay};
  std::optional<BayesBlock> bayes;
  std::size_t workers = 1;

  bool runs(Design d) const noexcept;
};

/// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& config);

BanditInstance instance_from_json(const nlohmann::json& j, const std::string& field = "instance");
PolicySpec policy_from_json(const nlohmann::json& j, const std::string& field);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const BanditInstance& instance);
nlohmann::json to_json(const PolicySpec& spec);
nlohmann::json to_json(const ExperimentConfig& config);

/// Built-in presets "example1", "example2", "example3". Throws
/// std::invalid_argument for an unknown name.
ExperimentConfig preset(const std::string& name);

/// REPLAYLAB_SEED and REPLAYLAB_WORKERS, when set, override the config.
void apply_env_overrides(ExperimentConfig& config);

}  // namespace replaylab
