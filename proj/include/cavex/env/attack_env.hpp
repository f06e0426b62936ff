#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cavex/cache/hierarchy.hpp"
#include "cavex/env/action.hpp"
#include "cavex/env/config.hpp"

namespace cavex {

// Fixed-length step-history encoding; all entries are in [0, 1].
// Step t occupies slots [t*kObsSlotWidth, (t+1)*kObsSlotWidth):
//   normalized action index, latency one-hot {none, hit/l1_hit, l2_hit, miss},
//   victim-trigger flag, normalized step number. Unused slots stay zero.
using Observation = std::vector<double>;
inline constexpr std::size_t kObsSlotWidth = 7;

struct StepInfo {
  bool useless = false;
  std::optional<bool> guess_correct;
  bool truncated = false;
  LatencyClass latency = LatencyClass::None;  // as observed by the attacker
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EpochStats {
  std::uint64_t episodes_completed = 0;
  std::uint64_t episodes_correct = 0;
  std::uint64_t total_actions = 0;
  std::uint64_t useless_actions = 0;
  double wall_time_s = 0.0;
  bool no_episodes = false;  // degenerate epoch; correct_rate reported as 0

  double correct_rate() const {
    return episodes_completed == 0
               ? 0.0
               : static_cast<double>(episodes_correct) / static_cast<double>(episodes_completed);
  }
};

// Episodic environment around CacheHierarchy. An episode draws a secret,
// runs attacker actions until a guess (or the length cap) and scores the
// guess; epochs are fixed budgets of epoch_actions steps for the correct
// rate. Every step is bracketed by state snapshots: an attacker access or
// flush that leaves the captured state unchanged is flagged useless and,
// when the penalty is enabled, charged r_useless on top of r_step.
class AttackEnv {
 public:
  explicit AttackEnv(EnvConfig cfg);

  Observation reset_episode();
  Observation reset_episode(std::uint64_t forced_secret);
  StepResult step(const Action& a);

  const std::vector<Action>& legal_actions() const { return actions_; }
  std::size_t n_actions() const { return actions_.size(); }
  std::size_t obs_dim() const { return obs_.size(); }
  const EnvConfig& config() const { return cfg_; }
  bool episode_active() const { return episode_active_; }
  std::uint64_t secret() const { return secret_; }

  bool epoch_complete() const { return actions_in_epoch_ >= cfg_.epoch_actions; }
  // Harvests and resets the epoch counters. Must be called exactly at the
  // epoch boundary; an in-progress episode carries over.
  EpochStats epoch_stats();

  // Optional per-step CSV log: step,episode,action_kind,operand,latency_class,useless,reward
  void enable_trace(const std::string& csv_path);

  static bool classify_useless(ActionKind kind, const CacheSnapshot& pre,
                               const CacheSnapshot& post);
  static double compute_reward(const RewardConfig& rc, ActionKind kind, bool useless,
                               std::optional<bool> guess_correct, bool penalty_enabled);

 private:
  void validate_action(const Action& a) const;
  void record_step(std::size_t action_index, const Action& a, LatencyClass lat);
  std::uint32_t victim_core() const { return cfg_.hierarchy.two_level() ? 1 : 0; }
  void begin_episode(std::uint64_t secret);

  EnvConfig cfg_;
  CacheHierarchy cache_;
  std::mt19937_64 secret_rng_;
  std::vector<Action> actions_;
  std::vector<std::uint64_t> secrets_;
  std::uint32_t max_len_;

  Observation obs_;
  std::uint64_t secret_ = 0;
  std::uint32_t step_count_ = 0;
  bool episode_active_ = false;

  std::uint64_t actions_in_epoch_ = 0;
  std::uint64_t useless_in_epoch_ = 0;
  std::uint64_t episodes_completed_ = 0;
  std::uint64_t episodes_correct_ = 0;
  std::chrono::steady_clock::time_point epoch_start_;

  std::uint64_t global_step_ = 0;
  std::uint64_t episode_counter_ = 0;
  std::unique_ptr<std::ofstream> trace_;
};

}  // namespace cavex
