#include "cavex/cache/hierarchy.hpp"

#include <bit>
#include <stdexcept>

#include "cavex/util/rng.hpp"

namespace cavex {

const char* to_string(LatencyClass c) {
  switch (c) {
    case LatencyClass::None: return "none";
    case LatencyClass::Hit: return "hit";
    case LatencyClass::L1Hit: return "l1_hit";
    case LatencyClass::L2Hit: return "l2_hit";
    case LatencyClass::Miss: return "miss";
  }
  return "?";
}

int latency_obs_slot(LatencyClass c) {
  switch (c) {
    case LatencyClass::None: return 0;
    case LatencyClass::Hit:
    case LatencyClass::L1Hit: return 1;
    case LatencyClass::L2Hit: return 2;
    case LatencyClass::Miss: return 3;
  }
  return 0;
}

char latency_trace_char(LatencyClass c) {
  static const char chars[4] = {'n', 'h', 'l', 'm'};
  return chars[latency_obs_slot(c)];
}

// ---------------------------------------------------------------------------
// SingleCache

SingleCache::SingleCache(CacheConfig cfg) : cfg_(cfg) {
  plru_levels_ = static_cast<std::uint32_t>(std::bit_width(cfg_.n_ways) - 1);
  lines_.resize(static_cast<std::size_t>(cfg_.n_sets) * cfg_.n_ways);
  tree_.assign(cfg_.n_sets, 0);
}

const CacheLine& SingleCache::line(std::uint32_t set, std::uint32_t way) const {
  return at(set, way);
}

std::optional<std::uint32_t> SingleCache::probe(Addr a) const {
  const std::uint32_t set = set_of(a);
  for (std::uint32_t w = 0; w < cfg_.n_ways; ++w) {
    const CacheLine& l = at(set, w);
    if (l.valid && l.tag == a) return w;
  }
  return std::nullopt;
}

void SingleCache::touch(std::uint32_t set, std::uint32_t way) {
  switch (cfg_.policy) {
    case ReplacementPolicy::Lru: {
      const std::uint32_t rank = at(set, way).meta;
      for (std::uint32_t w = 0; w < cfg_.n_ways; ++w) {
        CacheLine& l = at(set, w);
        if (l.valid && l.meta < rank) ++l.meta;
      }
      at(set, way).meta = 0;
      break;
    }
    case ReplacementPolicy::Rrip:
      at(set, way).meta = 0;
      break;
    case ReplacementPolicy::Plru: {
      std::uint32_t bits = tree_[set];
      std::uint32_t node = 0;
      for (std::uint32_t lvl = 0; lvl < plru_levels_; ++lvl) {
        const std::uint32_t dir = (way >> (plru_levels_ - 1 - lvl)) & 1u;
        if (dir)
          bits &= ~(1u << node);  // went right: point left
        else
          bits |= (1u << node);  // went left: point right
        node = 2 * node + 1 + dir;
      }
      tree_[set] = bits;
      break;
    }
    case ReplacementPolicy::Random:
      break;
  }
}

std::uint32_t SingleCache::pick_victim(std::uint32_t set, std::mt19937_64& rng) {
  switch (cfg_.policy) {
    case ReplacementPolicy::Lru:
      for (std::uint32_t w = 0; w < cfg_.n_ways; ++w)
        if (at(set, w).meta == cfg_.n_ways - 1) return w;
      break;
    case ReplacementPolicy::Rrip:
      for (;;) {
        for (std::uint32_t w = 0; w < cfg_.n_ways; ++w)
          if (at(set, w).meta == 3) return w;
        for (std::uint32_t w = 0; w < cfg_.n_ways; ++w) ++at(set, w).meta;
      }
    case ReplacementPolicy::Plru: {
      std::uint32_t node = 0;
      std::uint32_t way = 0;
      for (std::uint32_t lvl = 0; lvl < plru_levels_; ++lvl) {
        const std::uint32_t dir = (tree_[set] >> node) & 1u;
        way = (way << 1) | dir;
        node = 2 * node + 1 + dir;
      }
      return way;
    }
    case ReplacementPolicy::Random:
      return static_cast<std::uint32_t>(uniform_below(rng, cfg_.n_ways));
  }
  return 0;  // lru fallback; unreachable for a full set
}

std::optional<Addr> SingleCache::fill(Addr a, LineOrigin origin, std::mt19937_64& rng) {
  const std::uint32_t set = set_of(a);
  std::optional<Addr> evicted;
  std::uint32_t way = cfg_.n_ways;
  for (std::uint32_t w = 0; w < cfg_.n_ways; ++w) {
    if (!at(set, w).valid) {
      way = w;
      break;
    }
  }
  if (way == cfg_.n_ways) {
    way = pick_victim(set, rng);
    evicted = at(set, way).tag;
    if (cfg_.policy == ReplacementPolicy::Lru) {
      // Remove the victim's rank so the insert below keeps a permutation.
      const std::uint32_t rank = at(set, way).meta;
      for (std::uint32_t w = 0; w < cfg_.n_ways; ++w) {
        CacheLine& l = at(set, w);
        if (l.valid && l.meta > rank) --l.meta;
      }
    }
    at(set, way) = CacheLine{};
  }

  CacheLine& l = at(set, way);
  l.valid = true;
  l.tag = a;
  l.origin = origin;
  switch (cfg_.policy) {
    case ReplacementPolicy::Lru:
      for (std::uint32_t w = 0; w < cfg_.n_ways; ++w) {
        CacheLine& o = at(set, w);
        if (o.valid && w != way) ++o.meta;
      }
      l.meta = 0;
      break;
    case ReplacementPolicy::Rrip:
      l.meta = 2;
      break;
    case ReplacementPolicy::Plru:
      l.meta = 0;
      touch(set, way);
      break;
    case ReplacementPolicy::Random:
      l.meta = 0;
      break;
  }
  return evicted;
}

bool SingleCache::invalidate(Addr a) {
  const auto way = probe(a);
  if (!way) return false;
  const std::uint32_t set = set_of(a);
  if (cfg_.policy == ReplacementPolicy::Lru) {
    const std::uint32_t rank = at(set, *way).meta;
    for (std::uint32_t w = 0; w < cfg_.n_ways; ++w) {
      CacheLine& l = at(set, w);
      if (l.valid && l.meta > rank) --l.meta;
    }
  }
  at(set, *way) = CacheLine{};
  return true;
}

void SingleCache::reset() {
  for (CacheLine& l : lines_) l = CacheLine{};
  tree_.assign(cfg_.n_sets, 0);
  stream_valid_ = false;
  stream_last_ = 0;
}

std::optional<Addr> SingleCache::on_demand_miss(Addr a) {
  switch (cfg_.prefetcher) {
    case PrefetcherKind::None:
      return std::nullopt;
    case PrefetcherKind::NextLine:
      return a + 1;
    case PrefetcherKind::Stream: {
      const bool trained = stream_valid_ && stream_last_ + 1 == a;
      stream_valid_ = true;
      stream_last_ = a;
      return trained ? std::optional<Addr>(a + 2) : std::nullopt;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// CacheHierarchy

CacheHierarchy::CacheHierarchy(HierarchyConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.two_level()) {
    caches_.emplace_back(cfg_.levels[0]);
    caches_.emplace_back(cfg_.levels[0]);
    caches_.emplace_back(cfg_.levels[1]);
  } else {
    caches_.emplace_back(cfg_.levels[0]);
  }
  rng_.seed(seed);
}

AccessOutcome CacheHierarchy::access(std::uint32_t core, Addr addr, AccessKind kind) {
  if (core >= cfg_.n_cores) throw std::invalid_argument("access: core out of range");
  return cfg_.two_level() ? access_two_level(core, addr, kind) : access_single(addr, kind);
}

AccessOutcome CacheHierarchy::access_single(Addr addr, AccessKind kind) {
  SingleCache& c = caches_[0];
  const LineOrigin origin =
      kind == AccessKind::Demand ? LineOrigin::Demand : LineOrigin::Prefetch;
  AccessOutcome out;
  if (auto way = c.probe(addr)) {
    c.touch(c.set_of(addr), *way);
    out.latency = LatencyClass::Hit;
  } else {
    out.latency = LatencyClass::Miss;
    out.evicted = c.fill(addr, origin, rng_);
  }
  if (kind == AccessKind::Demand && out.latency == LatencyClass::Miss) {
    if (auto pf = c.on_demand_miss(addr)) {
      access_single(*pf, AccessKind::Prefetch);
      out.prefetch_issued = pf;
    }
  }
  return out;
}

AccessOutcome CacheHierarchy::access_two_level(std::uint32_t core, Addr addr, AccessKind kind) {
  SingleCache& l1 = caches_[core];
  SingleCache& l2 = caches_.back();
  const LineOrigin origin =
      kind == AccessKind::Demand ? LineOrigin::Demand : LineOrigin::Prefetch;
  AccessOutcome out;
  if (auto way = l1.probe(addr)) {
    l1.touch(l1.set_of(addr), *way);
    out.latency = LatencyClass::L1Hit;
  } else {
    if (auto way2 = l2.probe(addr)) {
      l2.touch(l2.set_of(addr), *way2);
      out.latency = LatencyClass::L2Hit;
    } else {
      out.latency = LatencyClass::Miss;
      if (auto ev = l2.fill(addr, origin, rng_)) {
        back_invalidate_l1(*ev);
        out.evicted = ev;
      }
    }
    // L1 refill. Its own victim stays resident in L2, so it is not reported.
    l1.fill(addr, origin, rng_);
  }
  if (kind == AccessKind::Demand && out.latency != LatencyClass::L1Hit) {
    // At most one prefetch per demand access; the inner level wins.
    std::optional<Addr> pf = l1.on_demand_miss(addr);
    if (out.latency == LatencyClass::Miss) {
      auto pf2 = l2.on_demand_miss(addr);
      if (!pf) pf = pf2;
    }
    if (pf) {
      access_two_level(core, *pf, AccessKind::Prefetch);
      out.prefetch_issued = pf;
    }
  }
  return out;
}

void CacheHierarchy::back_invalidate_l1(Addr addr) {
  for (std::uint32_t core = 0; core < cfg_.n_cores; ++core) caches_[core].invalidate(addr);
}

FlushOutcome CacheHierarchy::flush(Addr addr) {
  bool changed = false;
  for (SingleCache& c : caches_)
    if (c.invalidate(addr)) changed = true;
  return FlushOutcome{changed};
}

CacheSnapshot CacheHierarchy::snapshot(SnapshotScope scope) const {
  CacheSnapshot snap;
  snap.scope = scope;
  snap.caches.reserve(caches_.size());
  const bool full = scope == SnapshotScope::Full;
  for (const SingleCache& c : caches_) {
    SnapCache sc;
    const CacheConfig& cc = c.config();
    sc.lines.reserve(static_cast<std::size_t>(cc.n_sets) * cc.n_ways);
    for (std::uint32_t s = 0; s < cc.n_sets; ++s) {
      for (std::uint32_t w = 0; w < cc.n_ways; ++w) {
        const CacheLine& l = c.line(s, w);
        SnapLine sl;
        sl.valid = l.valid;
        sl.tag = l.valid ? l.tag : 0;
        if (full && l.valid) {
          sl.meta = l.meta;
          sl.origin = l.origin;
        }
        sc.lines.push_back(sl);
      }
    }
    if (full && cc.policy == ReplacementPolicy::Plru) {
      sc.tree_bits.reserve(cc.n_sets);
      for (std::uint32_t s = 0; s < cc.n_sets; ++s) sc.tree_bits.push_back(c.plru_bits(s));
    }
    if (full && cc.prefetcher == PrefetcherKind::Stream) {
      sc.stream_valid = c.stream_valid();
      sc.stream_last = c.stream_valid() ? c.stream_last() : 0;
    }
    snap.caches.push_back(std::move(sc));
  }
  return snap;
}

void CacheHierarchy::reset() {
  for (SingleCache& c : caches_) c.reset();
}

}  // namespace cavex
