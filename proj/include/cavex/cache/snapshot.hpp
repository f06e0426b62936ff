#pragma once

#include <cstdint>
#include <vector>

#include "cavex/cache/config.hpp"

namespace cavex {

// lines_only captures (valid, tag) per way. full additionally captures
// replacement metadata, fill origin and prefetcher-internal state.
enum class SnapshotScope { Full, LinesOnly };

const char* to_string(SnapshotScope s);
SnapshotScope parse_scope(const std::string& s);

enum class LineOrigin : std::uint8_t { Demand = 0, Prefetch = 1 };

// One captured way. Invalid lines are canonically zeroed so captures of
// semantically identical caches compare equal regardless of history.
struct SnapLine {
  bool valid = false;
  Addr tag = 0;
  std::uint32_t meta = 0;  // LRU recency rank or RRIP RRPV; 0 for plru/random
  LineOrigin origin = LineOrigin::Demand;

  bool operator==(const SnapLine&) const = default;
};

struct SnapCache {
  std::vector<SnapLine> lines;           // set-major: [set * n_ways + way]
  std::vector<std::uint32_t> tree_bits;  // PLRU bits per set; empty otherwise
  bool stream_valid = false;             // stream-prefetcher training state
  Addr stream_last = 0;

  bool operator==(const SnapCache&) const = default;
};

struct CacheSnapshot {
  SnapshotScope scope = SnapshotScope::Full;
  std::vector<SnapCache> caches;

  // Element-wise equality over all captured fields.
  bool operator==(const CacheSnapshot&) const = default;

  void serialize(std::vector<std::uint8_t>& out) const;
  std::uint64_t digest() const;  // FNV-1a over the canonical serialization
};

}  // namespace cavex
