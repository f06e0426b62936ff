#pragma once

#include <cstdint>
#include <stdexcept>

#include "cavex/cache/config.hpp"
#include "cavex/cache/snapshot.hpp"

namespace cavex {

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inclusive address range; lo > hi means empty.
struct AddrRange {
  Addr lo = 1;
  Addr hi = 0;

  bool empty() const { return hi < lo; }
  std::uint64_t size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(Addr a) const { return !empty() && a >= lo && a <= hi; }

  bool operator==(const AddrRange&) const = default;
};

struct RewardConfig {
  double r_step = -0.01;     // every non-guess action
  double r_useless = -0.01;  // added on top of r_step when the action was useless
  double r_correct = 1.0;
  double r_wrong = -1.0;

  void validate() const;
  bool operator==(const RewardConfig&) const = default;
};

// Secrets: one value per victim address; a single-address victim instead has a
// binary secret (0 = victim stays silent, 1 = victim accesses its address),
// since a one-value secret domain would make guessing trivial.
struct EnvConfig {
  HierarchyConfig hierarchy;
  AddrRange victim_addrs;
  AddrRange attacker_addrs;
  bool flush_enabled = false;
  RewardConfig rewards;
  bool useless_penalty_enabled = false;  // false = baseline, true = proposal
  SnapshotScope snapshot_scope = SnapshotScope::Full;
  std::uint32_t max_episode_len = 0;  // 0 -> default 2 * (|attacker_addrs| + 2)
  std::uint64_t epoch_actions = 3000;
  std::uint64_t seed = 0;

  bool binary_secret() const { return victim_addrs.size() == 1; }
  std::uint64_t secret_count() const { return binary_secret() ? 2 : victim_addrs.size(); }
  std::uint32_t episode_len_limit() const {
    if (max_episode_len > 0) return max_episode_len;
    return static_cast<std::uint32_t>(2 * (attacker_addrs.size() + 2));
  }
  void validate() const;  // throws ConfigError

  bool operator==(const EnvConfig&) const = default;
};

}  // namespace cavex
