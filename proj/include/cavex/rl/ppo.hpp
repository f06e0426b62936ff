#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "cavex/rl/adam.hpp"
#include "cavex/rl/hyper.hpp"
#include "cavex/rl/policy_net.hpp"
#include "cavex/rl/rollout.hpp"

namespace cavex {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Samples from the softmax over logits restricted to mask; illegal actions
// get probability zero. Returns the sampled index and its log-probability.
std::pair<int, double> sample_action(std::span<const double> logits,
                                     std::span<const std::uint8_t> mask, std::mt19937_64& rng);

// Masked log-softmax helper shared by sampling and tests.
std::vector<double> masked_log_softmax(std::span<const double> logits,
                                       std::span<const std::uint8_t> mask);

struct PpoLossStats {
  double total = 0.0;
  double policy = 0.0;   // -E[min(rho A, clip(rho) A)]
  double value = 0.0;    // MSE(value, return)
  double entropy = 0.0;  // mean policy entropy
};

// Clipped-surrogate PPO loss over the given buffer rows:
//   total = policy + value_coef * value - entropy_coef * entropy
// When grad is non-null, d(total)/d(params) is accumulated into it (caller
// zeroes it). Minimizing total maximizes the usual PPO objective.
PpoLossStats ppo_minibatch_loss(const PolicyNet& net, const RolloutBuffer& buf,
                                std::span<const int> idx, const TrainHyper& hyper,
                                std::vector<double>* grad);

// ppo_epochs_per_update passes over seeded-shuffled minibatches, stepping
// Adam on each. Throws TrainError on a non-finite loss.
PpoLossStats ppo_update(PolicyNet& net, AdamOptimizer& adam, const RolloutBuffer& buf,
                        const TrainHyper& hyper, std::mt19937_64& shuffle_rng);

}  // namespace cavex
