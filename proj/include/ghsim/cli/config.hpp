#pragma once

#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "ghsim/core/error.hpp"
#include "ghsim/core/hash.hpp"
#include "ghsim/metrics/metrics.hpp"
#include "ghsim/models/bayesian.hpp"
#include "ghsim/models/embedding.hpp"
#include "ghsim/models/lpe.hpp"
#include "ghsim/models/newentity.hpp"
#include "ghsim/models/stationary.hpp"
#include "ghsim/synth/synth.hpp"

namespace ghsim::cli {

/// Every tunable the command line reads from a config file. Field defaults
/// here are the single source; `config_keys()` documents them.
struct Config {
  std::uint64_t seed = 1;
  std::uint32_t threads = 1;
  std::uint32_t partitions = 1;
  double tick_hours = 1;

  std::size_t preferential_max_neighbors = 256;

  double bayes_half_life_days = kDefaultHalfLifeDays;
  double bayes_walk_mean = 2.0;
  double bayes_default_p_new = 0.2;
  std::size_t bayes_min_events = 100;

  std::string lpe_method = "gf";
  std::int64_t lpe_dim = 64;
  int lpe_epochs = 50;
  double lpe_lr = 0.01;
  double lpe_reg = 1e-3;
  std::size_t lpe_top_k = kLpeTopK;

  double new_entity_p_explore = 0;  // 0 leaves the base model unwrapped
  std::size_t new_entity_max_features = 6;
  std::size_t new_entity_folds = 3;

  double evaluate_persistence = kDefaultPersistence;
  std::size_t evaluate_top = kPopularityTop;

  SynthConfig synth{};

  BayesianOptions bayesian_options() const {
    BayesianOptions o;
    o.half_life_days = bayes_half_life_days;
    o.walk_mean = bayes_walk_mean;
    o.default_p_new = bayes_default_p_new;
    o.min_events = bayes_min_events;
    return o;
  }

  LpeOptions lpe_options() const {
    LpeOptions o;
    o.method = parse_embedding_method(lpe_method);
    o.train.gf.dim = o.train.le.dim = o.train.hope.dim = lpe_dim;
    o.train.gf.epochs = lpe_epochs;
    o.train.gf.lr = lpe_lr;
    o.train.gf.reg = lpe_reg;
    o.train.gf.seed = seed;
    o.top_k = lpe_top_k;
    return o;
  }

  NewEntityOptions new_entity_options() const {
    NewEntityOptions o;
    o.p_explore = new_entity_p_explore;
    o.max_features = new_entity_max_features;
    o.folds = new_entity_folds;
    o.threads = threads;
    o.seed = seed;
    return o;
  }
};

struct ConfigKey {
  std::string name;
  std::string doc;
  std::function<void(Config&, const YAML::Node&)> set;
  std::function<std::string(const Config&)> show;
};

namespace detail {

template <class T>
std::string show_value(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_floating_point_v<T>) {
    std::ostringstream s;
    s << v;
    return s.str();
  } else {
    return std::to_string(v);
  }
}

template <class T>
ConfigKey key(std::string name, T Config::*field, std::string doc) {
  return {name, std::move(doc),
          [field, name](Config& c, const YAML::Node& n) {
            try {
              c.*field = n.as<T>();
            } catch (const YAML::Exception&) {
              fail(ErrorCode::Config, "bad value for '" + name + "'");
            }
          },
          [field](const Config& c) { return show_value(c.*field); }};
}

template <class T>
ConfigKey synth_key(std::string name, T SynthConfig::*field, std::string doc) {
  return {name, std::move(doc),
          [field, name](Config& c, const YAML::Node& n) {
            try {
              c.synth.*field = n.as<T>();
            } catch (const YAML::Exception&) {
              fail(ErrorCode::Config, "bad value for '" + name + "'");
            }
          },
          [field](const Config& c) { return show_value(c.synth.*field); }};
}

}  // namespace detail

inline const std::vector<ConfigKey>& config_keys() {
  using detail::key;
  using detail::synth_key;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k{
        key("seed", &Config::seed, "master seed for fitting, simulation and synth"),
        key("threads", &Config::threads, "worker threads"),
        key("partitions", &Config::partitions, "simulation partitions"),
        key("tick_hours", &Config::tick_hours, "hub synchronization interval"),
        key("preferential.max_neighbors", &Config::preferential_max_neighbors, "neighbors kept per user"),
        key("bayes.half_life_days", &Config::bayes_half_life_days, "activity decay half-life"),
        key("bayes.walk_mean", &Config::bayes_walk_mean, "mean social walk length"),
        key("bayes.default_p_new", &Config::bayes_default_p_new, "new-user share without user metadata"),
        key("bayes.min_events", &Config::bayes_min_events, "smallest training log accepted"),
        key("lpe.method", &Config::lpe_method, "gf, le, hope or random"),
        key("lpe.dim", &Config::lpe_dim, "embedding dimension"),
        key("lpe.epochs", &Config::lpe_epochs, "GF epochs"),
        key("lpe.lr", &Config::lpe_lr, "GF learning rate"),
        key("lpe.reg", &Config::lpe_reg, "GF L2 weight"),
        key("lpe.top_k", &Config::lpe_top_k, "reconstructed repos kept per user and type"),
        key("new_entity.p_explore", &Config::new_entity_p_explore, "chance of a step on an unseen repo; 0 disables"),
        key("new_entity.max_features", &Config::new_entity_max_features, "S3D feature budget"),
        key("new_entity.folds", &Config::new_entity_folds, "cross-validation folds for lambda"),
        key("evaluate.persistence", &Config::evaluate_persistence, "RBO persistence p"),
        key("evaluate.top", &Config::evaluate_top, "ranked list length for popularity RBO"),
        synth_key("synth.n_users", &SynthConfig::n_users, "users before the window"),
        synth_key("synth.n_repos", &SynthConfig::n_repos, "repos before the window"),
        synth_key("synth.days", &SynthConfig::days, "window length"),
        synth_key("synth.seed", &SynthConfig::seed, "generator seed"),
        synth_key("synth.rate_log_mean", &SynthConfig::rate_log_mean, "log-normal mean of daily rates"),
        synth_key("synth.rate_log_sigma", &SynthConfig::rate_log_sigma, "log-normal sigma of daily rates"),
        synth_key("synth.gamma", &SynthConfig::gamma, "popularity power-law exponent"),
        synth_key("synth.new_user_share", &SynthConfig::new_user_share, "share of events by new users"),
        synth_key("synth.first_touch_one_time", &SynthConfig::first_touch_one_time, "one-time share of first touches"),
        synth_key("synth.p_discover", &SynthConfig::p_discover, "chance an existing user touches a new repo"),
        synth_key("synth.p_own", &SynthConfig::p_own, "chance a repeat event goes to an owned repo"),
        synth_key("synth.types_per_user", &SynthConfig::types_per_user, "frozen: event types per user"),
        synth_key("synth.repos_per_user", &SynthConfig::repos_per_user, "frozen: repos per user"),
    };
    k.push_back({"synth.variant", "attachment or frozen",
                 [](Config& c, const YAML::Node& n) { c.synth.variant = parse_synth_variant(n.as<std::string>()); },
                 [](const Config& c) { return std::string(to_string(c.synth.variant)); }});
    k.push_back({"synth.start", "window start timestamp",
                 [](Config& c, const YAML::Node& n) { c.synth.start = parse_timestamp(n.as<std::string>()); },
                 [](const Config& c) { return format_timestamp(c.synth.start); }});
    k.push_back({"synth.discovery_split", "Watch, Fork, Create weights of one-time first touches",
                 [](Config& c, const YAML::Node& n) {
                   if (!n.IsSequence() || n.size() != 3) fail(ErrorCode::Config, "synth.discovery_split needs three numbers");
                   for (std::size_t i = 0; i < 3; ++i) c.synth.discovery_split[i] = n[i].as<double>();
                 },
                 [](const Config& c) {
                   return "[" + detail::show_value(c.synth.discovery_split[0]) + ", " +
                          detail::show_value(c.synth.discovery_split[1]) + ", " +
                          detail::show_value(c.synth.discovery_split[2]) + "]";
                 }});
    return k;
  }();
  return keys;
}

namespace detail {

inline void flatten(const YAML::Node& node, const std::string& prefix, std::vector<std::pair<std::string, YAML::Node>>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const auto name = kv.first.as<std::string>();
      flatten(kv.second, prefix.empty() ? name : prefix + "." + name, out);
    }
  } else if (!prefix.empty()) {
    out.emplace_back(prefix, node);
  }
}

}  // namespace detail

/// Applies a YAML document to `cfg`. Nested maps and dotted keys are
/// equivalent ("lpe: {dim: 8}" and "lpe.dim: 8"). Unknown keys are errors.
inline void apply_config(Config& cfg, const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::Config, std::string("config parse error: ") + e.what());
  }
  if (root.IsNull()) return;
  if (!root.IsMap()) fail(ErrorCode::Config, "config must be a mapping");
  std::vector<std::pair<std::string, YAML::Node>> flat;
  detail::flatten(root, "", flat);
  for (const auto& [name, value] : flat) {
    const auto& keys = config_keys();
    auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
    if (it == keys.end()) fail(ErrorCode::Config, "unknown config key '" + name + "'");
    try {
      it->set(cfg, value);
    } catch (const YAML::Exception&) {
      fail(ErrorCode::Config, "bad value for '" + name + "'");
    }
  }
}

inline Config load_config(const std::string& path) {
  Config cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open config " + path);
  std::stringstream s;
  s << in.rdbuf();
  apply_config(cfg, s.str());
  return cfg;
}

/// Canonical "key = value" listing; also the basis of the config hash.
inline std::string dump_config(const Config& cfg) {
  std::string out;
  for (const auto& k : config_keys()) out += k.name + " = " + k.show(cfg) + "\n";
  return out;
}

inline std::string config_hash(const Config& cfg) { return hex64(fnv1a64(dump_config(cfg))); }

/// Markdown table of every key with its default and meaning.
inline std::string config_table() {
  const Config def;
  std::string out = "| key | default | meaning |\n|---|---|---|\n";
  for (const auto& k : config_keys()) out += "| `" + k.name + "` | `" + k.show(def) + "` | " + k.doc + " |\n";
  return out;
}

}  // namespace ghsim::cli
