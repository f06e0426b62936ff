#include "cavex/exp/presets.hpp"

#include <algorithm>

namespace cavex {

namespace {

EnvConfig single(std::uint32_t sets, std::uint32_t ways, PrefetcherKind pf, AddrRange victim,
                 AddrRange attacker, bool flush) {
  EnvConfig cfg;
  cfg.hierarchy.levels = {CacheConfig{sets, ways, ReplacementPolicy::Lru, pf}};
  cfg.hierarchy.n_cores = 1;
  cfg.victim_addrs = victim;
  cfg.attacker_addrs = attacker;
  cfg.flush_enabled = flush;
  return cfg;
}

EnvConfig two_level(std::uint32_t sets, std::uint32_t l2_ways, AddrRange victim,
                    AddrRange attacker) {
  EnvConfig cfg;
  cfg.hierarchy.levels = {
      CacheConfig{sets, 1, ReplacementPolicy::Lru, PrefetcherKind::None},        // private L1s
      CacheConfig{sets, l2_ways, ReplacementPolicy::Lru, PrefetcherKind::None},  // shared L2
  };
  cfg.hierarchy.n_cores = 2;
  cfg.hierarchy.inclusive = true;
  cfg.victim_addrs = victim;
  cfg.attacker_addrs = attacker;
  cfg.flush_enabled = false;
  return cfg;
}

constexpr PrefetcherKind kNone = PrefetcherKind::None;
constexpr PrefetcherKind kNext = PrefetcherKind::NextLine;
constexpr PrefetcherKind kStream = PrefetcherKind::Stream;

}  // namespace

EnvConfig preset_env(const std::string& name) {
  if (name == "no1") return single(4, 1, kNone, {0, 3}, {4, 7}, false);
  if (name == "no2") return single(4, 1, kNext, {0, 3}, {4, 7}, false);
  if (name == "no3") return single(4, 1, kNone, {0, 3}, {0, 3}, true);
  if (name == "no4") return single(4, 1, kNone, {0, 3}, {0, 7}, false);
  if (name == "no5") return single(1, 4, kNone, {0, 0}, {4, 7}, false);
  if (name == "no6") return single(1, 4, kNone, {0, 0}, {0, 3}, true);
  if (name == "no7") return single(1, 4, kNone, {0, 0}, {0, 7}, false);
  if (name == "no8") return single(1, 4, kNone, {0, 3}, {0, 3}, true);
  if (name == "no9") return single(1, 4, kNone, {0, 3}, {0, 7}, true);
  if (name == "no10") return single(8, 1, kNone, {0, 7}, {0, 7}, true);
  if (name == "no11") return single(1, 8, kNone, {0, 0}, {0, 7}, true);
  if (name == "no12") return single(1, 8, kNone, {0, 0}, {0, 15}, false);
  if (name == "no13") return single(1, 8, kNext, {0, 0}, {0, 15}, false);
  if (name == "no14") return single(1, 8, kStream, {0, 0}, {0, 15}, false);
  if (name == "no15") return single(4, 2, kNone, {0, 3}, {4, 11}, false);
  if (name == "no16") return two_level(4, 2, {0, 3}, {4, 11});
  if (name == "no17") return two_level(8, 2, {0, 7}, {8, 23});
  throw ConfigError("unknown preset: " + name);
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (int i = 1; i <= 17; ++i) v.push_back("no" + std::to_string(i));
    return v;
  }();
  return names;
}

bool is_preset_name(const std::string& name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace cavex
