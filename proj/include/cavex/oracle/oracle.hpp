#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cavex/env/config.hpp"
#include "cavex/oracle/plan.hpp"

namespace cavex {

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Worst-case work estimate for search(): |secret domain| * n_nonguess^max_len.
// Requests above kSearchBudget are refused up front.
inline constexpr double kSearchBudget = 2e10;
double search_cost(const EnvConfig& cfg, std::uint32_t max_len);

// Iterative-deepening exhaustive search for the first (shortest, then
// lexicographic in action order) prefix whose latency traces are injective
// over the secrets. Returns nullopt when no plan of length <= max_len exists.
// Throws BudgetError when the worst case exceeds kSearchBudget.
std::optional<AttackPlan> search(const EnvConfig& cfg, std::uint32_t max_len);

// Runs the plan deterministically under every secret and decodes; returns the
// fraction of secrets guessed correctly. Traces missing from the decode table
// count as wrong. Throws EnvError on an action illegal under cfg.
double replay(const AttackPlan& plan, const EnvConfig& cfg);

// Independent useless-action labeling for one episode: re-simulates actions
// on a fresh cache and compares field-wise state captures around each step.
// Victim triggers and guesses are always labeled false (exempt).
std::vector<bool> label_trace(const EnvConfig& cfg, std::uint64_t secret,
                              std::span<const Action> actions);

}  // namespace cavex
