#include "cavex/cache/config.hpp"

namespace cavex {

const char* to_string(ReplacementPolicy p) {
  switch (p) {
    case ReplacementPolicy::Lru: return "lru";
    case ReplacementPolicy::Plru: return "plru";
    case ReplacementPolicy::Rrip: return "rrip";
    case ReplacementPolicy::Random: return "random";
  }
  return "?";
}

const char* to_string(PrefetcherKind p) {
  switch (p) {
    case PrefetcherKind::None: return "none";
    case PrefetcherKind::NextLine: return "nextline";
    case PrefetcherKind::Stream: return "stream";
  }
  return "?";
}

ReplacementPolicy parse_policy(const std::string& s) {
  if (s == "lru") return ReplacementPolicy::Lru;
  if (s == "plru") return ReplacementPolicy::Plru;
  if (s == "rrip") return ReplacementPolicy::Rrip;
  if (s == "random") return ReplacementPolicy::Random;
  throw ConfigError("unknown replacement policy: " + s);
}

PrefetcherKind parse_prefetcher(const std::string& s) {
  if (s == "none") return PrefetcherKind::None;
  if (s == "nextline") return PrefetcherKind::NextLine;
  if (s == "stream") return PrefetcherKind::Stream;
  throw ConfigError("unknown prefetcher: " + s);
}

static bool is_pow2(std::uint32_t x) { return x != 0 && (x & (x - 1)) == 0; }

void HierarchyConfig::validate() const {
  if (levels.empty() || levels.size() > 2)
    throw ConfigError("hierarchy.levels: expected 1 or 2 levels, got " +
                      std::to_string(levels.size()));
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const CacheConfig& c = levels[i];
    const std::string where = "hierarchy.levels[" + std::to_string(i) + "]";
    if (c.n_sets < 1) throw ConfigError(where + ".n_sets: must be >= 1");
    if (c.n_ways < 1) throw ConfigError(where + ".n_ways: must be >= 1");
    if (c.policy == ReplacementPolicy::Plru && !is_pow2(c.n_ways))
      throw ConfigError(where + ": plru requires n_ways to be a power of two");
  }
  if (levels.size() == 1) {
    if (n_cores != 1) throw ConfigError("hierarchy.n_cores: must be 1 for a single level");
  } else {
    if (n_cores != 2) throw ConfigError("hierarchy.n_cores: must be 2 for two levels");
    if (!inclusive) throw ConfigError("hierarchy.inclusive: two-level hierarchies must be inclusive");
    if (levels[0].n_ways != 1)
      throw ConfigError("hierarchy.levels[0].n_ways: private L1s are direct-mapped (1 way)");
  }
}

}  // namespace cavex
