#pragma once

#include <map>
#include <string>
#include <vector>

#include "cavex/env/action.hpp"

namespace cavex {

// A fixed attack: a prefix of non-guess actions plus a decode table mapping
// the observed latency trace (one character per prefix action) to the guessed
// secret. The plan identifies every secret iff the trace function is
// injective, in which case decode is its inverse.
struct AttackPlan {
  std::vector<Action> prefix;
  std::map<std::string, std::uint64_t> decode;

  bool operator==(const AttackPlan&) const = default;
};

// Line-oriented text form, bit-exact round-trip:
//   A 4            attacker access
//   F 2            attacker flush
//   V              victim trigger
//   DECODE mmh -> 0
std::string serialize_plan(const AttackPlan& plan);
AttackPlan parse_plan(const std::string& text);  // throws ConfigError

void save_plan(const std::string& path, const AttackPlan& plan);
AttackPlan load_plan(const std::string& path);

}  // namespace cavex
