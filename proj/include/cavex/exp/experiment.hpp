#pragma once

#include <cstdint>
#include <string>

#include "cavex/env/config.hpp"
#include "cavex/rl/hyper.hpp"
#include "cavex/rl/policy_net.hpp"

namespace cavex {

struct ExperimentConfig {
  EnvConfig env;
  PolicySpec policy;  // obs_dim / n_actions are derived from env at run time
  TrainHyper hyper;
  std::uint32_t repeats = 10;
  std::string output_dir = "out";

  void validate() const;
};

// JSON config file with sections env / rewards / policy / hyper plus repeats
// and output_dir. A top-level "preset" expands to one of the built-in
// environments before the env section's overrides apply. Unknown keys are
// rejected; validation errors name the offending field.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);  // for tests
void save_config(const ExperimentConfig& cfg, const std::string& path);
std::string config_to_text(const ExperimentConfig& cfg);

ExperimentConfig config_from_preset(const std::string& name);

}  // namespace cavex
