#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cavex/env/attack_env.hpp"
#include "cavex/rl/hyper.hpp"
#include "cavex/rl/policy_net.hpp"

namespace cavex {

// Greedy (argmax) rollout of the trained policy under one forced secret.
struct ExtractedPlan {
  std::uint64_t secret = 0;
  std::vector<Action> actions;  // includes the final guess when one was made
  std::string trace;            // one latency character per action (n/h/l/m)
  std::optional<std::uint64_t> guess;
  bool correct = false;
};

struct TrainReport {
  bool converged = false;
  std::uint32_t epochs_run = 0;
  std::vector<EpochStats> epochs;
  std::uint64_t total_actions = 0;
  std::uint64_t total_useless = 0;
  double useless_ratio = 0.0;
  double wall_time_s = 0.0;
  std::vector<ExtractedPlan> extracted_plans;  // filled on convergence
};

// Runs the epoch-driven PPO loop: collect rollout_len transitions across
// episodes, update, tally epoch stats every epoch_actions steps. Stops at the
// first epoch with a 100% correct rate (converged) or after max_epochs.
// Deterministic for a given seed. out_net, when given, receives the final
// parameters.
TrainReport train(const EnvConfig& env_cfg, PolicySpec spec, const TrainHyper& hyper,
                  std::uint64_t seed, PolicyNet* out_net = nullptr);

// Re-runs each extracted plan in a fresh environment with its secret forced
// and checks that the recorded guess matches; returns the fraction correct.
double replay_extracted(const std::vector<ExtractedPlan>& plans, const EnvConfig& env_cfg);

// Versioned text checkpoint (hexfloat values, bit-exact round-trip).
struct Checkpoint {
  PolicySpec spec;
  TrainHyper hyper;
  std::uint64_t seed = 0;
  std::vector<double> params;
};

void save_checkpoint(const std::string& path, const PolicyNet& net, const TrainHyper& hyper,
                     std::uint64_t seed);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cavex
