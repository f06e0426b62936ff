#pragma once

#include <cstdint>
#include <vector>

#include "cavex/env/config.hpp"

namespace cavex {

enum class ActionKind : std::uint8_t { AttackerAccess, AttackerFlush, VictimTrigger, Guess };

const char* to_string(ActionKind k);

struct Action {
  ActionKind kind = ActionKind::VictimTrigger;
  // Address for access/flush, secret candidate for guess, unused for trigger.
  std::uint64_t operand = 0;

  bool operator==(const Action&) const = default;
};

// The discrete action set in its canonical order, which also defines the
// policy-output indexing: accesses ascending, flushes ascending (when
// enabled), victim trigger, guesses ascending over the secret domain.
std::vector<Action> build_action_list(const EnvConfig& cfg);

// Secret domain values in guess order: addresses ascending, or {0, 1} for a
// binary secret.
std::vector<std::uint64_t> secret_domain(const EnvConfig& cfg);

}  // namespace cavex
