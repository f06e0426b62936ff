#pragma once

#include <string>
#include <vector>

#include "cavex/env/config.hpp"

namespace cavex {

// Built-in environment presets no1..no17 covering the supported cache shapes:
// direct-mapped, fully-associative and set-associative single caches (with
// optional next-line/stream prefetchers and flush availability) and two-core
// inclusive two-level hierarchies. Replacement policy defaults to LRU and can
// be overridden through a config file.
EnvConfig preset_env(const std::string& name);  // throws ConfigError on unknown names
const std::vector<std::string>& preset_names();
bool is_preset_name(const std::string& name);

}  // namespace cavex
