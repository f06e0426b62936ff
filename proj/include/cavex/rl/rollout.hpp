#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cavex {

// Transition storage for one policy update. finalize() computes GAE and
// normalizes the advantages to zero mean / unit variance.
struct RolloutBuffer {
  std::size_t obs_dim = 0;

  std::vector<double> observations;  // flattened, size() * obs_dim
  std::vector<int> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<std::uint8_t> dones;
  std::vector<std::uint8_t> truncated;

  std::vector<double> advantages;  // normalized
  std::vector<double> returns;

  explicit RolloutBuffer(std::size_t obs_dim_) : obs_dim(obs_dim_) {}

  std::size_t size() const { return actions.size(); }

  void push(std::span<const double> obs, int action, double log_prob, double reward, double value,
            bool done, bool trunc) {
    observations.insert(observations.end(), obs.begin(), obs.end());
    actions.push_back(action);
    log_probs.push_back(log_prob);
    rewards.push_back(reward);
    values.push_back(value);
    dones.push_back(done ? 1 : 0);
    truncated.push_back(trunc ? 1 : 0);
  }

  std::span<const double> obs_at(std::size_t i) const {
    return {observations.data() + i * obs_dim, obs_dim};
  }

  void finalize(double bootstrap_value, double gamma, double lambda);

  void clear() {
    observations.clear();
    actions.clear();
    log_probs.clear();
    rewards.clear();
    values.clear();
    dones.clear();
    truncated.clear();
    advantages.clear();
    returns.clear();
  }
};

}  // namespace cavex
