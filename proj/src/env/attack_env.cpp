#include "cavex/env/attack_env.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>

#include "cavex/util/rng.hpp"

namespace cavex {

const char* to_string(ActionKind k) {
  switch (k) {
    case ActionKind::AttackerAccess: return "access";
    case ActionKind::AttackerFlush: return "flush";
    case ActionKind::VictimTrigger: return "victim_trigger";
    case ActionKind::Guess: return "guess";
  }
  return "?";
}

void RewardConfig::validate() const {
  if (r_step > 0) throw ConfigError("rewards.r_step: must be <= 0");
  if (r_useless > 0) throw ConfigError("rewards.r_useless: must be <= 0");
  if (r_correct <= 0) throw ConfigError("rewards.r_correct: must be positive");
  if (r_wrong >= 0) throw ConfigError("rewards.r_wrong: must be negative");
}

void EnvConfig::validate() const {
  hierarchy.validate();
  rewards.validate();
  if (victim_addrs.empty()) throw ConfigError("env.victim_addrs: must be non-empty");
  if (epoch_actions < 1) throw ConfigError("env.epoch_actions: must be >= 1");
  if (episode_len_limit() < 1) throw ConfigError("env.max_episode_len: must be >= 1");
}

std::vector<std::uint64_t> secret_domain(const EnvConfig& cfg) {
  std::vector<std::uint64_t> out;
  if (cfg.binary_secret()) {
    out = {0, 1};
  } else {
    out.reserve(cfg.victim_addrs.size());
    for (Addr a = cfg.victim_addrs.lo; a <= cfg.victim_addrs.hi; ++a) out.push_back(a);
  }
  return out;
}

std::vector<Action> build_action_list(const EnvConfig& cfg) {
  std::vector<Action> out;
  if (!cfg.attacker_addrs.empty()) {
    for (Addr a = cfg.attacker_addrs.lo; a <= cfg.attacker_addrs.hi; ++a)
      out.push_back({ActionKind::AttackerAccess, a});
    if (cfg.flush_enabled)
      for (Addr a = cfg.attacker_addrs.lo; a <= cfg.attacker_addrs.hi; ++a)
        out.push_back({ActionKind::AttackerFlush, a});
  }
  out.push_back({ActionKind::VictimTrigger, 0});
  for (std::uint64_t s : secret_domain(cfg)) out.push_back({ActionKind::Guess, s});
  return out;
}

AttackEnv::AttackEnv(EnvConfig cfg)
    : cfg_(std::move(cfg)),
      cache_((cfg_.validate(), cfg_.hierarchy), derive_seed(cfg_.seed, 1)),
      secret_rng_(derive_seed(cfg_.seed, 0)),
      actions_(build_action_list(cfg_)),
      secrets_(secret_domain(cfg_)),
      max_len_(cfg_.episode_len_limit()) {
  obs_.assign(static_cast<std::size_t>(max_len_) * kObsSlotWidth, 0.0);
  epoch_start_ = std::chrono::steady_clock::now();
}

void AttackEnv::begin_episode(std::uint64_t secret) {
  cache_.reset();
  secret_ = secret;
  step_count_ = 0;
  episode_active_ = true;
  ++episode_counter_;
  std::fill(obs_.begin(), obs_.end(), 0.0);
}

Observation AttackEnv::reset_episode() {
  std::uint64_t s = cfg_.binary_secret()
                        ? uniform_below(secret_rng_, 2)
                        : cfg_.victim_addrs.lo + uniform_below(secret_rng_, cfg_.victim_addrs.size());
  begin_episode(s);
  return obs_;
}

Observation AttackEnv::reset_episode(std::uint64_t forced_secret) {
  if (std::find(secrets_.begin(), secrets_.end(), forced_secret) == secrets_.end())
    throw EnvError("reset_episode: secret outside the secret domain");
  begin_episode(forced_secret);
  return obs_;
}

void AttackEnv::validate_action(const Action& a) const {
  switch (a.kind) {
    case ActionKind::AttackerAccess:
      if (!cfg_.attacker_addrs.contains(a.operand))
        throw EnvError("step: access operand outside attacker_addrs");
      break;
    case ActionKind::AttackerFlush:
      if (!cfg_.flush_enabled) throw EnvError("step: flush actions are disabled");
      if (!cfg_.attacker_addrs.contains(a.operand))
        throw EnvError("step: flush operand outside attacker_addrs");
      break;
    case ActionKind::VictimTrigger:
      break;
    case ActionKind::Guess:
      if (std::find(secrets_.begin(), secrets_.end(), a.operand) == secrets_.end())
        throw EnvError("step: guess operand outside the secret domain");
      break;
  }
}

bool AttackEnv::classify_useless(ActionKind kind, const CacheSnapshot& pre,
                                 const CacheSnapshot& post) {
  if (pre.scope != post.scope)
    throw std::invalid_argument("classify_useless: snapshot scopes differ");
  if (kind != ActionKind::AttackerAccess && kind != ActionKind::AttackerFlush) return false;
  return pre == post;
}

double AttackEnv::compute_reward(const RewardConfig& rc, ActionKind kind, bool useless,
                                 std::optional<bool> guess_correct, bool penalty_enabled) {
  assert(guess_correct.has_value() == (kind == ActionKind::Guess));
  if (kind == ActionKind::Guess) return *guess_correct ? rc.r_correct : rc.r_wrong;
  double r = rc.r_step;
  if (penalty_enabled && useless) r += rc.r_useless;
  return r;
}

void AttackEnv::record_step(std::size_t action_index, const Action& a, LatencyClass lat) {
  double* slot = obs_.data() + static_cast<std::size_t>(step_count_) * kObsSlotWidth;
  slot[0] = n_actions() > 1
                ? static_cast<double>(action_index) / static_cast<double>(n_actions() - 1)
                : 0.0;
  slot[1 + latency_obs_slot(lat)] = 1.0;
  slot[5] = a.kind == ActionKind::VictimTrigger ? 1.0 : 0.0;
  slot[6] = static_cast<double>(step_count_ + 1) / static_cast<double>(max_len_);
}

StepResult AttackEnv::step(const Action& a) {
  if (!episode_active_) throw std::logic_error("step: episode finished; call reset_episode");
  validate_action(a);
  const auto it = std::find(actions_.begin(), actions_.end(), a);
  const std::size_t action_index = static_cast<std::size_t>(it - actions_.begin());

  const CacheSnapshot pre = cache_.snapshot(cfg_.snapshot_scope);
  LatencyClass lat = LatencyClass::None;
  std::optional<bool> guess_correct;
  bool done = false;
  switch (a.kind) {
    case ActionKind::AttackerAccess:
      lat = cache_.access(0, a.operand, AccessKind::Demand).latency;
      break;
    case ActionKind::AttackerFlush:
      cache_.flush(a.operand);
      break;
    case ActionKind::VictimTrigger: {
      // Binary secret 0 means the victim stays silent this episode.
      const bool silent = cfg_.binary_secret() && secret_ == 0;
      if (!silent) {
        const Addr target = cfg_.binary_secret() ? cfg_.victim_addrs.lo : secret_;
        cache_.access(victim_core(), target, AccessKind::Demand);
      }
      break;
    }
    case ActionKind::Guess:
      guess_correct = a.operand == secret_;
      done = true;
      break;
  }
  const CacheSnapshot post = cache_.snapshot(cfg_.snapshot_scope);
  const bool useless = classify_useless(a.kind, pre, post);
  double reward =
      compute_reward(cfg_.rewards, a.kind, useless, guess_correct, cfg_.useless_penalty_enabled);

  record_step(action_index, a, lat);
  ++step_count_;
  bool truncated = false;
  if (!done && step_count_ >= max_len_) {
    // Out of steps without a guess: the episode counts as a failure.
    done = true;
    truncated = true;
    reward += cfg_.rewards.r_wrong;
  }

  ++actions_in_epoch_;
  ++global_step_;
  if (useless) ++useless_in_epoch_;
  if (done) {
    episode_active_ = false;
    ++episodes_completed_;
    if (guess_correct && *guess_correct) ++episodes_correct_;
  }

  if (trace_) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%llu,%llu,%s,%llu,%s,%d,%.6f\n",
                  static_cast<unsigned long long>(global_step_),
                  static_cast<unsigned long long>(episode_counter_), to_string(a.kind),
                  static_cast<unsigned long long>(a.operand), to_string(lat), useless ? 1 : 0,
                  reward);
    *trace_ << buf;
    trace_->flush();
  }

  StepResult r;
  r.observation = obs_;
  r.reward = reward;
  r.done = done;
  r.info = StepInfo{useless, guess_correct, truncated, lat};
  return r;
}

EpochStats AttackEnv::epoch_stats() {
  if (actions_in_epoch_ != cfg_.epoch_actions)
    throw std::logic_error("epoch_stats: not at an epoch boundary");
  EpochStats s;
  s.episodes_completed = episodes_completed_;
  s.episodes_correct = episodes_correct_;
  s.total_actions = actions_in_epoch_;
  s.useless_actions = useless_in_epoch_;
  s.no_episodes = episodes_completed_ == 0;
  const auto now = std::chrono::steady_clock::now();
  s.wall_time_s = std::chrono::duration<double>(now - epoch_start_).count();
  actions_in_epoch_ = 0;
  useless_in_epoch_ = 0;
  episodes_completed_ = 0;
  episodes_correct_ = 0;
  epoch_start_ = now;
  return s;
}

void AttackEnv::enable_trace(const std::string& csv_path) {
  trace_ = std::make_unique<std::ofstream>(csv_path);
  if (!*trace_) throw EnvError("enable_trace: cannot open " + csv_path);
  *trace_ << "step,episode,action_kind,operand,latency_class,useless,reward\n";
}

}  // namespace cavex
