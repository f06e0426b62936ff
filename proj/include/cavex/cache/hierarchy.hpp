#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cavex/cache/config.hpp"
#include "cavex/cache/snapshot.hpp"

namespace cavex {

enum class AccessKind { Demand, Prefetch };

// Hit means an L1 hit in two-level mode; L2Hit only occurs there.
// None is the slot used by non-access steps in observations and traces.
enum class LatencyClass : std::uint8_t { None = 0, Hit, L1Hit, L2Hit, Miss };

const char* to_string(LatencyClass c);

// Observation one-hot slot: 0 none, 1 hit/l1_hit, 2 l2_hit, 3 miss.
int latency_obs_slot(LatencyClass c);
// Trace character per slot: n / h / l / m.
char latency_trace_char(LatencyClass c);

struct AccessOutcome {
  LatencyClass latency = LatencyClass::Miss;
  std::optional<Addr> evicted;  // line lost from the last (or only) level
  std::optional<Addr> prefetch_issued;
};

struct FlushOutcome {
  bool changed = false;
};

struct CacheLine {
  bool valid = false;
  Addr tag = 0;
  std::uint32_t meta = 0;
  LineOrigin origin = LineOrigin::Demand;
};

// One physical cache instance. Replacement metadata invariants:
//   lru:  valid lines in a set hold a rank permutation 0..k-1, 0 = MRU
//   rrip: 2-bit RRPV, insert at 2, hit resets to 0, victim has RRPV 3
//   plru: per-set tree bits, flipped away from the touched way
// Invalid lines are kept canonically zeroed.
class SingleCache {
 public:
  explicit SingleCache(CacheConfig cfg);

  const CacheConfig& config() const { return cfg_; }
  std::uint32_t set_of(Addr a) const { return static_cast<std::uint32_t>(a % cfg_.n_sets); }
  const CacheLine& line(std::uint32_t set, std::uint32_t way) const;
  std::uint32_t plru_bits(std::uint32_t set) const { return tree_[set]; }
  bool stream_valid() const { return stream_valid_; }
  Addr stream_last() const { return stream_last_; }

  std::optional<std::uint32_t> probe(Addr a) const;  // hit way, if any
  void touch(std::uint32_t set, std::uint32_t way);  // hit-side metadata update
  // Fills a (must not be present); returns the evicted address, if any.
  std::optional<Addr> fill(Addr a, LineOrigin origin, std::mt19937_64& rng);
  bool invalidate(Addr a);  // flush one line; LRU ranks are compacted
  void reset();

  // Demand-miss hook for the attached prefetcher; returns the address to
  // prefetch, if the prefetcher fires. Also advances stream training state.
  std::optional<Addr> on_demand_miss(Addr a);

 private:
  std::uint32_t pick_victim(std::uint32_t set, std::mt19937_64& rng);
  CacheLine& at(std::uint32_t set, std::uint32_t way) { return lines_[set * cfg_.n_ways + way]; }
  const CacheLine& at(std::uint32_t set, std::uint32_t way) const {
    return lines_[set * cfg_.n_ways + way];
  }

  CacheConfig cfg_;
  std::uint32_t plru_levels_ = 0;
  std::vector<CacheLine> lines_;        // set-major
  std::vector<std::uint32_t> tree_;     // PLRU bits per set
  bool stream_valid_ = false;           // stream prefetcher: last demand miss
  Addr stream_last_ = 0;
};

// Behavioral simulator of the configured cache(s). All stochastic behavior
// (random replacement) draws from one generator seeded at construction, so
// outcomes are a pure function of (seed, operation sequence). reset() clears
// cache and prefetcher state but keeps the generator stream running.
class CacheHierarchy {
 public:
  CacheHierarchy(HierarchyConfig cfg, std::uint64_t seed);  // validates cfg

  AccessOutcome access(std::uint32_t core, Addr addr, AccessKind kind);
  FlushOutcome flush(Addr addr);
  CacheSnapshot snapshot(SnapshotScope scope) const;
  void reset();

  const HierarchyConfig& config() const { return cfg_; }
  bool two_level() const { return cfg_.two_level(); }

  // Instance layout: single level -> [0]; two-level -> [L1 core0, L1 core1, L2].
  std::size_t cache_count() const { return caches_.size(); }
  const SingleCache& cache(std::size_t i) const { return caches_[i]; }

 private:
  AccessOutcome access_single(Addr addr, AccessKind kind);
  AccessOutcome access_two_level(std::uint32_t core, Addr addr, AccessKind kind);
  void back_invalidate_l1(Addr addr);

  HierarchyConfig cfg_;
  std::vector<SingleCache> caches_;
  std::mt19937_64 rng_;
};

}  // namespace cavex
