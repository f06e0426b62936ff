#include "cavex/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "cavex/cache/hierarchy.hpp"
#include "cavex/util/rng.hpp"

namespace cavex {

namespace {

// Applies one non-guess action with the same semantics the environment uses,
// written against the raw simulator so it stays an independent code path.
LatencyClass apply_action(CacheHierarchy& h, const EnvConfig& cfg, std::uint64_t secret,
                          const Action& a) {
  switch (a.kind) {
    case ActionKind::AttackerAccess:
      return h.access(0, a.operand, AccessKind::Demand).latency;
    case ActionKind::AttackerFlush:
      h.flush(a.operand);
      return LatencyClass::None;
    case ActionKind::VictimTrigger: {
      const bool silent = cfg.binary_secret() && secret == 0;
      if (!silent) {
        const Addr target = cfg.binary_secret() ? cfg.victim_addrs.lo : secret;
        h.access(cfg.hierarchy.two_level() ? 1 : 0, target, AccessKind::Demand);
      }
      return LatencyClass::None;
    }
    case ActionKind::Guess:
      return LatencyClass::None;
  }
  return LatencyClass::None;
}

void check_plan_action(const EnvConfig& cfg, const Action& a) {
  switch (a.kind) {
    case ActionKind::AttackerAccess:
      if (!cfg.attacker_addrs.contains(a.operand))
        throw EnvError("plan action: access operand outside attacker_addrs");
      break;
    case ActionKind::AttackerFlush:
      if (!cfg.flush_enabled) throw EnvError("plan action: flush is disabled in this config");
      if (!cfg.attacker_addrs.contains(a.operand))
        throw EnvError("plan action: flush operand outside attacker_addrs");
      break;
    case ActionKind::VictimTrigger:
      break;
    case ActionKind::Guess:
      throw EnvError("plan action: guess actions do not belong in a prefix");
  }
}

CacheHierarchy fresh_cache(const EnvConfig& cfg) {
  return CacheHierarchy(cfg.hierarchy, derive_seed(cfg.seed, 1));
}

std::vector<Action> nonguess_actions(const EnvConfig& cfg) {
  std::vector<Action> out = build_action_list(cfg);
  std::erase_if(out, [](const Action& a) { return a.kind == ActionKind::Guess; });
  return out;
}

struct SearchContext {
  const EnvConfig& cfg;
  std::vector<Action> actions;          // candidate non-guess actions, canonical order
  std::vector<std::uint64_t> secrets;
  std::vector<Action> prefix;           // current DFS path
  std::optional<AttackPlan> found;

  bool injective(const std::vector<std::string>& traces) const {
    for (std::size_t i = 0; i < traces.size(); ++i)
      for (std::size_t j = i + 1; j < traces.size(); ++j)
        if (traces[i] == traces[j]) return false;
    return true;
  }

  // Depth-first enumeration of prefixes of exactly `remaining` more actions,
  // carrying one simulator per secret. Children are visited in action order,
  // so the first hit at a given depth is the lexicographically first one.
  bool dfs(std::uint32_t remaining, const std::vector<CacheHierarchy>& sims,
           const std::vector<std::string>& traces) {
    for (const Action& a : actions) {
      std::vector<CacheHierarchy> next_sims = sims;
      std::vector<std::string> next_traces = traces;
      for (std::size_t s = 0; s < secrets.size(); ++s) {
        const LatencyClass lat = apply_action(next_sims[s], cfg, secrets[s], a);
        next_traces[s].push_back(latency_trace_char(lat));
      }
      prefix.push_back(a);
      if (remaining == 1) {
        if (injective(next_traces)) {
          AttackPlan plan;
          plan.prefix = prefix;
          for (std::size_t s = 0; s < secrets.size(); ++s)
            plan.decode[next_traces[s]] = secrets[s];
          found = std::move(plan);
          prefix.pop_back();
          return true;
        }
      } else if (dfs(remaining - 1, next_sims, next_traces)) {
        prefix.pop_back();
        return true;
      }
      prefix.pop_back();
    }
    return false;
  }
};

}  // namespace

double search_cost(const EnvConfig& cfg, std::uint32_t max_len) {
  const double n = static_cast<double>(nonguess_actions(cfg).size());
  return static_cast<double>(cfg.secret_count()) * std::pow(n, static_cast<double>(max_len));
}

std::optional<AttackPlan> search(const EnvConfig& cfg, std::uint32_t max_len) {
  cfg.validate();
  const double cost = search_cost(cfg, max_len);
  if (cost > kSearchBudget) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "search: refusing, worst case %.3g simulations exceeds the %.3g budget "
                  "(reduce max_len or the action/secret space)",
                  cost, kSearchBudget);
    throw BudgetError(buf);
  }

  SearchContext ctx{cfg, nonguess_actions(cfg), secret_domain(cfg), {}, {}};
  std::vector<CacheHierarchy> sims;
  for (std::size_t s = 0; s < ctx.secrets.size(); ++s) sims.push_back(fresh_cache(cfg));
  const std::vector<std::string> traces(ctx.secrets.size());
  if (ctx.secrets.size() < 2) return std::nullopt;  // nothing to distinguish
  for (std::uint32_t depth = 1; depth <= max_len; ++depth)
    if (ctx.dfs(depth, sims, traces)) return ctx.found;
  return std::nullopt;
}

double replay(const AttackPlan& plan, const EnvConfig& cfg) {
  cfg.validate();
  for (const Action& a : plan.prefix) check_plan_action(cfg, a);
  const std::vector<std::uint64_t> secrets = secret_domain(cfg);
  std::size_t correct = 0;
  for (std::uint64_t secret : secrets) {
    CacheHierarchy sim = fresh_cache(cfg);
    std::string trace;
    for (const Action& a : plan.prefix)
      trace.push_back(latency_trace_char(apply_action(sim, cfg, secret, a)));
    const auto it = plan.decode.find(trace);
    if (it != plan.decode.end() && it->second == secret) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(secrets.size());
}

namespace {

// Field-wise state capture used only by label_trace. Reads the simulator
// through its inspection interface and compares with explicit loops, keeping
// this route independent of CacheSnapshot comparison.
struct FieldCapture {
  struct Line {
    bool valid;
    Addr tag;
    std::uint32_t meta;
    std::uint8_t origin;
  };
  std::vector<std::vector<Line>> lines;              // per cache instance
  std::vector<std::vector<std::uint32_t>> tree;      // per cache instance
  std::vector<std::pair<bool, Addr>> stream;         // per cache instance
};

FieldCapture capture_fields(const CacheHierarchy& h, SnapshotScope scope) {
  FieldCapture cap;
  const bool full = scope == SnapshotScope::Full;
  for (std::size_t ci = 0; ci < h.cache_count(); ++ci) {
    const SingleCache& c = h.cache(ci);
    const CacheConfig& cfg = c.config();
    std::vector<FieldCapture::Line> lines;
    for (std::uint32_t s = 0; s < cfg.n_sets; ++s) {
      for (std::uint32_t w = 0; w < cfg.n_ways; ++w) {
        const CacheLine& l = c.line(s, w);
        FieldCapture::Line out{l.valid, l.valid ? l.tag : 0, 0, 0};
        if (full && l.valid) {
          out.meta = l.meta;
          out.origin = static_cast<std::uint8_t>(l.origin);
        }
        lines.push_back(out);
      }
    }
    cap.lines.push_back(std::move(lines));
    std::vector<std::uint32_t> tree;
    if (full && cfg.policy == ReplacementPolicy::Plru)
      for (std::uint32_t s = 0; s < cfg.n_sets; ++s) tree.push_back(c.plru_bits(s));
    cap.tree.push_back(std::move(tree));
    if (full && cfg.prefetcher == PrefetcherKind::Stream && c.stream_valid())
      cap.stream.emplace_back(true, c.stream_last());
    else
      cap.stream.emplace_back(false, 0);
  }
  return cap;
}

bool captures_equal(const FieldCapture& a, const FieldCapture& b) {
  if (a.lines.size() != b.lines.size()) return false;
  for (std::size_t ci = 0; ci < a.lines.size(); ++ci) {
    if (a.lines[ci].size() != b.lines[ci].size()) return false;
    for (std::size_t i = 0; i < a.lines[ci].size(); ++i) {
      const auto& x = a.lines[ci][i];
      const auto& y = b.lines[ci][i];
      if (x.valid != y.valid || x.tag != y.tag || x.meta != y.meta || x.origin != y.origin)
        return false;
    }
    if (a.tree[ci] != b.tree[ci]) return false;
    if (a.stream[ci] != b.stream[ci]) return false;
  }
  return true;
}

}  // namespace

std::vector<bool> label_trace(const EnvConfig& cfg, std::uint64_t secret,
                              std::span<const Action> actions) {
  cfg.validate();
  CacheHierarchy sim = fresh_cache(cfg);
  std::vector<bool> labels;
  labels.reserve(actions.size());
  for (const Action& a : actions) {
    const FieldCapture pre = capture_fields(sim, cfg.snapshot_scope);
    apply_action(sim, cfg, secret, a);
    const FieldCapture post = capture_fields(sim, cfg.snapshot_scope);
    const bool attacker_op =
        a.kind == ActionKind::AttackerAccess || a.kind == ActionKind::AttackerFlush;
    labels.push_back(attacker_op && captures_equal(pre, post));
  }
  return labels;
}

}  // namespace cavex
