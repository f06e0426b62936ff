#pragma once

#include <cstdint>

#include "cavex/error.hpp"

namespace cavex {

struct TrainHyper {
  double gamma = 0.99;
  double lr = 3e-4;
  double clip_ratio = 0.2;
  std::uint32_t rollout_len = 2048;  // policy update cadence in actions
  std::uint32_t minibatch = 64;
  double gae_lambda = 0.95;
  std::uint32_t ppo_epochs_per_update = 4;
  double value_coef = 0.5;
  // Initial exploration bonus; the trainer anneals it linearly to zero over
  // the max_epochs horizon. At the default reward scale the early bonus is
  // what carries the agent across the pre-discovery plateau (0.01 collapses
  // into immediate guessing and never finds the attack), while the decay
  // lets the late policy sharpen enough for a 100%-correct epoch.
  double entropy_coef = 0.05;
  std::uint32_t max_epochs = 999;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0))
      throw ConfigError("hyper.gamma: must be in (0, 1]");
    if (!(gae_lambda > 0.0 && gae_lambda <= 1.0))
      throw ConfigError("hyper.gae_lambda: must be in (0, 1]");
    if (lr <= 0) throw ConfigError("hyper.lr: must be positive");
    if (clip_ratio <= 0) throw ConfigError("hyper.clip_ratio: must be positive");
    if (rollout_len == 0) throw ConfigError("hyper.rollout_len: must be positive");
    if (minibatch == 0 || rollout_len % minibatch != 0)
      throw ConfigError("hyper.minibatch: must divide rollout_len");
    if (ppo_epochs_per_update == 0)
      throw ConfigError("hyper.ppo_epochs_per_update: must be positive");
    if (max_epochs == 0) throw ConfigError("hyper.max_epochs: must be positive");
  }

  bool operator==(const TrainHyper&) const = default;
};

}  // namespace cavex
