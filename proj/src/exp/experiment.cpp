#include "cavex/exp/experiment.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cavex/exp/presets.hpp"

namespace cavex {

using nlohmann::json;

void ExperimentConfig::validate() const {
  env.validate();
  hyper.validate();
  if (policy.hidden_units == 0) throw ConfigError("policy.hidden_units: must be positive");
  if (repeats < 1) throw ConfigError("repeats: must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must be non-empty");
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!known.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_field(const json& obj, const std::string& key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

AddrRange read_range(const json& obj, const std::string& key, const std::string& where,
                     AddrRange fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || (v.size() != 2 && !v.empty()))
    throw ConfigError(where + "." + key + ": expected [lo, hi] or []");
  if (v.empty()) return AddrRange{1, 0};
  AddrRange r;
  try {
    r.lo = v.at(0).get<Addr>();
    r.hi = v.at(1).get<Addr>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": expected unsigned integers");
  }
  return r;
}

CacheConfig parse_cache_level(const json& obj, const std::string& where) {
  reject_unknown(obj, {"n_sets", "n_ways", "policy", "prefetcher"}, where);
  CacheConfig c;
  read_field(obj, "n_sets", where, c.n_sets);
  read_field(obj, "n_ways", where, c.n_ways);
  std::string policy = to_string(c.policy), prefetcher = to_string(c.prefetcher);
  read_field(obj, "policy", where, policy);
  read_field(obj, "prefetcher", where, prefetcher);
  c.policy = parse_policy(policy);
  c.prefetcher = parse_prefetcher(prefetcher);
  return c;
}

void parse_env_section(const json& obj, EnvConfig& env) {
  const std::string where = "env";
  reject_unknown(obj,
                 {"hierarchy", "victim_addrs", "attacker_addrs", "flush_enabled",
                  "useless_penalty_enabled", "snapshot_scope", "max_episode_len", "epoch_actions",
                  "seed"},
                 where);
  if (obj.contains("hierarchy")) {
    const json& h = obj.at("hierarchy");
    reject_unknown(h, {"levels", "n_cores", "inclusive"}, "env.hierarchy");
    if (h.contains("levels")) {
      if (!h.at("levels").is_array())
        throw ConfigError("env.hierarchy.levels: expected an array");
      env.hierarchy.levels.clear();
      std::size_t i = 0;
      for (const json& lvl : h.at("levels"))
        env.hierarchy.levels.push_back(
            parse_cache_level(lvl, "env.hierarchy.levels[" + std::to_string(i++) + "]"));
    }
    read_field(h, "n_cores", "env.hierarchy", env.hierarchy.n_cores);
    read_field(h, "inclusive", "env.hierarchy", env.hierarchy.inclusive);
  }
  env.victim_addrs = read_range(obj, "victim_addrs", where, env.victim_addrs);
  env.attacker_addrs = read_range(obj, "attacker_addrs", where, env.attacker_addrs);
  read_field(obj, "flush_enabled", where, env.flush_enabled);
  read_field(obj, "useless_penalty_enabled", where, env.useless_penalty_enabled);
  std::string scope = to_string(env.snapshot_scope);
  read_field(obj, "snapshot_scope", where, scope);
  env.snapshot_scope = parse_scope(scope);
  read_field(obj, "max_episode_len", where, env.max_episode_len);
  read_field(obj, "epoch_actions", where, env.epoch_actions);
  read_field(obj, "seed", where, env.seed);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(root, {"preset", "env", "rewards", "policy", "hyper", "repeats", "output_dir"},
                 "config");

  ExperimentConfig cfg;
  if (root.contains("preset")) {
    std::string preset;
    read_field(root, "preset", "config", preset);
    cfg.env = preset_env(preset);
  }
  if (root.contains("env")) parse_env_section(root.at("env"), cfg.env);
  if (root.contains("rewards")) {
    const json& r = root.at("rewards");
    reject_unknown(r, {"r_step", "r_useless", "r_correct", "r_wrong"}, "rewards");
    read_field(r, "r_step", "rewards", cfg.env.rewards.r_step);
    read_field(r, "r_useless", "rewards", cfg.env.rewards.r_useless);
    read_field(r, "r_correct", "rewards", cfg.env.rewards.r_correct);
    read_field(r, "r_wrong", "rewards", cfg.env.rewards.r_wrong);
  }
  if (root.contains("policy")) {
    const json& p = root.at("policy");
    reject_unknown(p, {"hidden_units", "shared_trunk"}, "policy");
    read_field(p, "hidden_units", "policy", cfg.policy.hidden_units);
    read_field(p, "shared_trunk", "policy", cfg.policy.shared_trunk);
  }
  if (root.contains("hyper")) {
    const json& h = root.at("hyper");
    reject_unknown(h,
                   {"gamma", "lr", "clip_ratio", "rollout_len", "minibatch", "gae_lambda",
                    "ppo_epochs_per_update", "value_coef", "entropy_coef", "max_epochs"},
                   "hyper");
    read_field(h, "gamma", "hyper", cfg.hyper.gamma);
    read_field(h, "lr", "hyper", cfg.hyper.lr);
    read_field(h, "clip_ratio", "hyper", cfg.hyper.clip_ratio);
    read_field(h, "rollout_len", "hyper", cfg.hyper.rollout_len);
    read_field(h, "minibatch", "hyper", cfg.hyper.minibatch);
    read_field(h, "gae_lambda", "hyper", cfg.hyper.gae_lambda);
    read_field(h, "ppo_epochs_per_update", "hyper", cfg.hyper.ppo_epochs_per_update);
    read_field(h, "value_coef", "hyper", cfg.hyper.value_coef);
    read_field(h, "entropy_coef", "hyper", cfg.hyper.entropy_coef);
    read_field(h, "max_epochs", "hyper", cfg.hyper.max_epochs);
  }
  read_field(root, "repeats", "config", cfg.repeats);
  read_field(root, "output_dir", "config", cfg.output_dir);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
  json levels = json::array();
  for (const CacheConfig& c : cfg.env.hierarchy.levels)
    levels.push_back({{"n_sets", c.n_sets},
                      {"n_ways", c.n_ways},
                      {"policy", to_string(c.policy)},
                      {"prefetcher", to_string(c.prefetcher)}});
  auto range = [](const AddrRange& r) {
    return r.empty() ? json::array() : json::array({r.lo, r.hi});
  };
  const json root = {
      {"env",
       {{"hierarchy",
         {{"levels", levels},
          {"n_cores", cfg.env.hierarchy.n_cores},
          {"inclusive", cfg.env.hierarchy.inclusive}}},
        {"victim_addrs", range(cfg.env.victim_addrs)},
        {"attacker_addrs", range(cfg.env.attacker_addrs)},
        {"flush_enabled", cfg.env.flush_enabled},
        {"useless_penalty_enabled", cfg.env.useless_penalty_enabled},
        {"snapshot_scope", to_string(cfg.env.snapshot_scope)},
        {"max_episode_len", cfg.env.max_episode_len},
        {"epoch_actions", cfg.env.epoch_actions},
        {"seed", cfg.env.seed}}},
      {"rewards",
       {{"r_step", cfg.env.rewards.r_step},
        {"r_useless", cfg.env.rewards.r_useless},
        {"r_correct", cfg.env.rewards.r_correct},
        {"r_wrong", cfg.env.rewards.r_wrong}}},
      {"policy",
       {{"hidden_units", cfg.policy.hidden_units}, {"shared_trunk", cfg.policy.shared_trunk}}},
      {"hyper",
       {{"gamma", cfg.hyper.gamma},
        {"lr", cfg.hyper.lr},
        {"clip_ratio", cfg.hyper.clip_ratio},
        {"rollout_len", cfg.hyper.rollout_len},
        {"minibatch", cfg.hyper.minibatch},
        {"gae_lambda", cfg.hyper.gae_lambda},
        {"ppo_epochs_per_update", cfg.hyper.ppo_epochs_per_update},
        {"value_coef", cfg.hyper.value_coef},
        {"entropy_coef", cfg.hyper.entropy_coef},
        {"max_epochs", cfg.hyper.max_epochs}}},
      {"repeats", cfg.repeats},
      {"output_dir", cfg.output_dir},
  };
  return root.dump(2) + "\n";
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_config: cannot open " + path);
  out << config_to_text(cfg);
}

ExperimentConfig config_from_preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.env = preset_env(name);
  return cfg;
}

}  // namespace cavex
