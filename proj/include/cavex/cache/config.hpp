#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cavex/error.hpp"

namespace cavex {

// Line/block-granularity address. No byte offsets: set index = addr % n_sets.
using Addr = std::uint64_t;

enum class ReplacementPolicy { Lru, Plru, Rrip, Random };
enum class PrefetcherKind { None, NextLine, Stream };

const char* to_string(ReplacementPolicy p);
const char* to_string(PrefetcherKind p);
ReplacementPolicy parse_policy(const std::string& s);
PrefetcherKind parse_prefetcher(const std::string& s);

struct CacheConfig {
  std::uint32_t n_sets = 1;
  std::uint32_t n_ways = 1;
  ReplacementPolicy policy = ReplacementPolicy::Lru;
  PrefetcherKind prefetcher = PrefetcherKind::None;

  bool operator==(const CacheConfig&) const = default;
};

// Single cache, or a two-core hierarchy: one private direct-mapped L1 per
// core plus a shared inclusive L2. L2 evictions back-invalidate the L1s.
struct HierarchyConfig {
  std::vector<CacheConfig> levels;  // length 1 or 2 (L1 config, L2 config)
  std::uint32_t n_cores = 1;        // 1 for single level, 2 for two-level
  bool inclusive = false;           // must be true for two-level

  bool two_level() const { return levels.size() == 2; }
  void validate() const;  // throws ConfigError

  bool operator==(const HierarchyConfig&) const = default;
};

}  // namespace cavex
