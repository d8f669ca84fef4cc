#include "replaylab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <string_view>

namespace replaylab {

using nlohmann::json;

namespace {

const json& member(const json& j, const std::string& key, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(field + "." + key, "missing");
  return *it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& field) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, field + "." + key);
}

std::size_t count(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(field, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::string kind_of(const json& j, const std::string& field) {
  const auto& k = member(j, "kind", field);
  if (!k.is_string()) throw ConfigError(field + ".kind", "expected a string");
  return k.get<std::string>();
}

/// Runs a constructor that throws std::invalid_argument and rethrows as a
/// ConfigError under `field`.
template <class Fn>
auto guarded(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

std::optional<Design> design_from_name(std::string_view name) {
  if (name == "naive") return Design::Naive;
  if (name == "ar") return Design::ArtificialReplay;
  if (name == "shared_stack") return Design::SharedStack;
  return std::nullopt;
}

InstancePrior prior_from_json(const json& j, const std::string& field) {
  const auto kind = kind_of(j, field);
  if (kind == "uniform_means") {
    UniformMeansPrior p;
    const auto fam = j.value("family", std::string("bernoulli"));
    if (fam != "bernoulli" && fam != "gaussian") throw ConfigError(field + ".family", "expected bernoulli or gaussian");
    p.bernoulli = fam == "bernoulli";
    p.arms = count(member(j, "arms", field), field + ".arms");
    p.low = number_or(j, "low", 0.0, field);
    p.high = number_or(j, "high", 1.0, field);
    p.variance = number_or(j, "variance", 1.0, field);
    if (p.arms == 0) throw ConfigError(field + ".arms", "must be >= 1");
    if (!(p.low <= p.high)) throw ConfigError(field + ".high", "must be >= low");
    if (p.bernoulli && (p.low < 0.0 || p.high > 1.0)) throw ConfigError(field, "Bernoulli means must stay in [0, 1]");
    if (!p.bernoulli && !(p.variance > 0.0)) throw ConfigError(field + ".variance", "must be positive");
    return p;
  }
  if (kind == "point_mass") {
    return DiscretePrior{{{1.0, instance_from_json(member(j, "instance", field), field + ".instance")}}};
  }
  if (kind == "discrete") {
    const auto& atoms = member(j, "atoms", field);
    if (!atoms.is_array() || atoms.empty()) throw ConfigError(field + ".atoms", "expected a nonempty array");
    DiscretePrior p;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string f = field + ".atoms[" + std::to_string(i) + "]";
      const double w = number_or(atoms[i], "weight", 1.0, f);
      if (!(w > 0.0)) throw ConfigError(f + ".weight", "must be positive");
      p.atoms.emplace_back(w, instance_from_json(member(atoms[i], "instance", f), f + ".instance"));
    }
    return p;
  }
  throw ConfigError(field + ".kind", "unsupported prior kind '" + kind + "'");
}

json prior_to_json(const InstancePrior& prior) {
  if (const auto* u = std::get_if<UniformMeansPrior>(&prior)) {
    json j{{"kind", "uniform_means"}, {"family", u->bernoulli ? "bernoulli" : "gaussian"}, {"arms", u->arms},
           {"low", u->low}, {"high", u->high}};
    if (!u->bernoulli) j["variance"] = u->variance;
    return j;
  }
  json atoms = json::array();
  for (const auto& [w, inst] : std::get<DiscretePrior>(prior).atoms) {
    atoms.push_back({{"weight", w}, {"instance", to_json(inst)}});
  }
  return {{"kind", "discrete"}, {"atoms", atoms}};
}

}  // namespace

bool ExperimentConfig::runs(Design d) const noexcept {
  return std::find(designs.begin(), designs.end(), d) != designs.end();
}

BanditInstance sample_instance(const InstancePrior& prior, RunEngine& rng) {
  if (const auto* u = std::get_if<UniformMeansPrior>(&prior)) {
    std::vector<double> means(u->arms);
    for (auto& m : means) m = u->low + (u->high - u->low) * uniform01(rng);
    return u->bernoulli ? BanditInstance::bernoulli(means) : BanditInstance::gaussian(means, u->variance);
  }
  const auto& atoms = std::get<DiscretePrior>(prior).atoms;
  double total = 0.0;
  for (const auto& [w, inst] : atoms) total += w;
  double u = uniform01(rng) * total;
  for (const auto& [w, inst] : atoms) {
    if (u < w) return inst;
    u -= w;
  }
  return atoms.back().second;
}

BanditInstance instance_from_json(const json& j, const std::string& field) {
  const auto kind = kind_of(j, field);
  const auto means = numbers(member(j, "means", field), field + ".means");
  if (kind == "bernoulli") {
    for (std::size_t i = 0; i < means.size(); ++i) {
      if (!(means[i] >= 0.0 && means[i] <= 1.0)) {
        throw ConfigError(field + ".means[" + std::to_string(i) + "]", "Bernoulli mean must lie in [0, 1]");
      }
    }
    return BanditInstance::bernoulli(means);
  }
  if (kind == "gaussian") {
    std::vector<double> variances;
    if (j.contains("variances")) {
      variances = numbers(j["variances"], field + ".variances");
      if (variances.size() != means.size()) throw ConfigError(field + ".variances", "length differs from means");
    } else {
      variances.assign(means.size(), number(member(j, "variance", field), field + ".variance"));
    }
    std::vector<ArmDistribution> arms;
    for (std::size_t i = 0; i < means.size(); ++i) {
      arms.push_back(guarded(field + ".variances[" + std::to_string(i) + "]",
                             [&] { return ArmDistribution::gaussian(means[i], variances[i]); }));
    }
    return BanditInstance(std::move(arms));
  }
  throw ConfigError(field + ".kind", "unsupported instance kind '" + kind + "'");
}

PolicySpec policy_from_json(const json& j, const std::string& field) {
  const auto kind = kind_of(j, field);
  PolicySpec spec;
  if (kind == "ucb1") {
    Ucb1 u{number_or(j, "alpha", 2.0, field)};
    if (j.contains("clock")) {
      const auto& clock = j["clock"];
      if (clock == "period") {
        u.clock = UcbClock::Period;
      } else if (clock == "completed") {
        u.clock = UcbClock::Completed;
      } else {
        throw ConfigError(field + ".clock", "expected \"period\" or \"completed\"");
      }
    }
    spec = u;
  } else if (kind == "ucb_delta") {
    UcbDelta u;
    if (j.contains("d")) u.d = number(j["d"], field + ".d");
    if (j.contains("delta")) u.delta = number(j["delta"], field + ".delta");
    if (!u.d && !u.delta) u.d = 2.0;
    spec = u;
  } else if (kind == "ts_bernoulli") {
    spec = TsBernoulli{number_or(j, "alpha0", 1.0, field), number_or(j, "beta0", 1.0, field)};
  } else if (kind == "ts_gaussian") {
    spec = TsGaussian{number_or(j, "prior_mean", 0.0, field), number_or(j, "prior_var", 1.0, field),
                      number_or(j, "obs_var", 1.0, field)};
  } else if (kind == "eps_greedy") {
    spec = EpsGreedy{number_or(j, "eps", 0.1, field)};
  } else if (kind == "scripted") {
    Scripted s;
    for (double a : numbers(member(j, "arms", field), field + ".arms")) {
      if (a < 1.0 || a != std::floor(a)) throw ConfigError(field + ".arms", "arms are 1-based integers");
      s.arms.push_back(static_cast<ArmIndex>(a) - 1);
    }
    spec = s;
  } else {
    throw ConfigError(field + ".kind", "unsupported policy kind '" + kind + "'");
  }
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    // Policy messages start with the parameter name ("eps: ...").
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    if (colon != std::string::npos && msg.find(' ') > colon) {
      throw ConfigError(field + "." + msg.substr(0, colon), msg.substr(colon + 2));
    }
    throw ConfigError(field, msg);
  }
  return spec;
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  c.instance = instance_from_json(member(j, "instance", "<root>"), "instance");
  c.policy0 = policy_from_json(member(j, "policy0", "<root>"), "policy0");
  c.policy1 = policy_from_json(member(j, "policy1", "<root>"), "policy1");
  if (j.contains("horizons")) {
    const auto& h = j["horizons"];
    if (!h.is_array()) throw ConfigError("horizons", "expected an array of integers");
    c.horizons.clear();
    for (std::size_t i = 0; i < h.size(); ++i) c.horizons.push_back(count(h[i], "horizons[" + std::to_string(i) + "]"));
  }
  if (j.contains("M_ci")) c.m_ci = count(j["M_ci"], "M_ci");
  if (j.contains("M_var")) c.m_var = count(j["M_var"], "M_var");
  if (j.contains("ci_alpha")) c.ci_alpha = number(j["ci_alpha"], "ci_alpha");
  if (j.contains("master_seed")) {
    if (!j["master_seed"].is_number_unsigned()) throw ConfigError("master_seed", "expected a nonnegative integer");
    c.master_seed = j["master_seed"].get<std::uint64_t>();
  }
  if (j.contains("workers")) c.workers = count(j["workers"], "workers");
  if (j.contains("designs")) {
    const auto& d = j["designs"];
    if (!d.is_array()) throw ConfigError("designs", "expected an array of design names");
    c.designs.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::string f = "designs[" + std::to_string(i) + "]";
      if (!d[i].is_string()) throw ConfigError(f, "expected a string");
      const auto design = design_from_name(d[i].get<std::string>());
      if (!design) throw ConfigError(f, "unknown design '" + d[i].get<std::string>() + "'");
      if (!c.runs(*design)) c.designs.push_back(*design);
    }
  }
  if (j.contains("bayes")) {
    const auto& b = j["bayes"];
    BayesBlock block{prior_from_json(member(b, "prior", "bayes"), "bayes.prior"), 1000};
    if (b.contains("instances_M")) block.instances = count(b["instances_M"], "bayes.instances_M");
    c.bayes = std::move(block);
  }
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c) {
  if (c.horizons.empty()) throw ConfigError("horizons", "must be nonempty");
  for (std::size_t i = 0; i < c.horizons.size(); ++i) {
    if (c.horizons[i] == 0) throw ConfigError("horizons[" + std::to_string(i) + "]", "must be >= 1");
    if (i > 0 && c.horizons[i] <= c.horizons[i - 1]) {
      throw ConfigError("horizons[" + std::to_string(i) + "]", "horizons must be strictly increasing");
    }
  }
  if (c.m_ci < 2) throw ConfigError("M_ci", "must be >= 2");
  if (c.m_var < 2) throw ConfigError("M_var", "must be >= 2");
  if (!(c.ci_alpha > 0.0 && c.ci_alpha < 1.0)) throw ConfigError("ci_alpha", "must lie in (0, 1)");
  if (c.designs.empty()) throw ConfigError("designs", "must name at least one design");
  if (c.bayes && c.bayes->instances < 2) throw ConfigError("bayes.instances_M", "must be >= 2");
  for (const auto& [spec, field] : {std::pair{&c.policy0, "policy0"}, std::pair{&c.policy1, "policy1"}}) {
    if (std::holds_alternative<TsBernoulli>(*spec) && !c.instance.all_bernoulli()) {
      throw ConfigError(field, "ts_bernoulli needs rewards in [0, 1] (a Bernoulli instance)");
    }
    if (const auto* s = std::get_if<Scripted>(spec)) {
      for (auto a : s->arms) {
        if (a >= c.instance.arm_count()) throw ConfigError(std::string(field) + ".arms", "arm outside the instance");
      }
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return config_from_json(j);
}

json to_json(const BanditInstance& instance) {
  json means = json::array();
  for (double m : instance.means()) means.push_back(m);
  if (instance.all_bernoulli()) return {{"kind", "bernoulli"}, {"means", means}};
  json variances = json::array();
  for (const auto& arm : instance.arms()) variances.push_back(arm.variance());
  const bool common = std::all_of(variances.begin(), variances.end(), [&](const json& v) { return v == variances[0]; });
  json j{{"kind", "gaussian"}, {"means", means}};
  if (common) {
    j["variance"] = variances[0];
  } else {
    j["variances"] = variances;
  }
  return j;
}

json to_json(const PolicySpec& spec) {
  if (const auto* p = std::get_if<Ucb1>(&spec)) {
    return {{"kind", "ucb1"}, {"alpha", p->alpha}, {"clock", p->clock == UcbClock::Period ? "period" : "completed"}};
  }
  if (const auto* p = std::get_if<UcbDelta>(&spec)) {
    json j{{"kind", "ucb_delta"}};
    if (p->d) j["d"] = *p->d;
    if (p->delta && !p->d) j["delta"] = *p->delta;
    return j;
  }
  if (const auto* p = std::get_if<TsBernoulli>(&spec)) {
    return {{"kind", "ts_bernoulli"}, {"alpha0", p->alpha0}, {"beta0", p->beta0}};
  }
  if (const auto* p = std::get_if<TsGaussian>(&spec)) {
    return {{"kind", "ts_gaussian"}, {"prior_mean", p->prior_mean}, {"prior_var", p->prior_var}, {"obs_var", p->obs_var}};
  }
  if (const auto* p = std::get_if<EpsGreedy>(&spec)) return {{"kind", "eps_greedy"}, {"eps", p->eps}};
  json arms = json::array();
  for (auto a : std::get<Scripted>(spec).arms) arms.push_back(a + 1);
  return {{"kind", "scripted"}, {"arms", arms}};
}

json to_json(const ExperimentConfig& c) {
  json designs = json::array();
  for (auto d : c.designs) designs.push_back(std::string(design_name(d)));
  json j{{"name", c.name},
         {"instance", to_json(c.instance)},
         {"policy0", to_json(c.policy0)},
         {"policy1", to_json(c.policy1)},
         {"horizons", c.horizons},
         {"M_ci", c.m_ci},
         {"M_var", c.m_var},
         {"ci_alpha", c.ci_alpha},
         {"master_seed", c.master_seed},
         {"designs", designs},
         {"workers", c.workers}};
  if (c.bayes) j["bayes"] = {{"prior", prior_to_json(c.bayes->prior)}, {"instances_M", c.bayes->instances}};
  return j;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  if (name == "example1") {
    c.instance = BanditInstance::bernoulli(std::vector<double>{0.9, 0.7, 0.5, 0.3, 0.1});
    c.policy0 = Ucb1{2.5, UcbClock::Completed};
    c.policy1 = Ucb1{3.0, UcbClock::Completed};
  } else if (name == "example2") {
    c.instance = BanditInstance::bernoulli(std::vector<double>{0.7, 0.3});
    c.policy0 = Ucb1{2.0, UcbClock::Completed};
    c.policy1 = TsBernoulli{1.0, 1.0};
  } else if (name == "example3") {
    c.instance = BanditInstance::gaussian(std::vector<double>{1.0, 0.8, -2.0, -3.0, -4.0}, 1.0);
    c.policy0 = TsGaussian{0.0, 1.0, 1.0};
    c.policy1 = EpsGreedy{0.1};
  } else {
    throw std::invalid_argument("unknown preset '" + name + "'");
  }
  return c;
}

void apply_env_overrides(ExperimentConfig& config) {
  auto read = [](const char* var) -> std::optional<std::uint64_t> {
    const char* raw = std::getenv(var);
    if (!raw || !*raw) return std::nullopt;
    std::uint64_t v = 0;
    const std::string_view s(raw);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ConfigError(var, "expected a nonnegative integer");
    }
    return v;
  };
  if (auto seed = read("REPLAYLAB_SEED")) config.master_seed = *seed;
  if (auto workers = read("REPLAYLAB_WORKERS")) config.workers = std::max<std::uint64_t>(*workers, 1);
}

}  // namespace replaylab
