#include "cavex/cache/snapshot.hpp"

namespace cavex {

const char* to_string(SnapshotScope s) {
  return s == SnapshotScope::Full ? "full" : "lines_only";
}

SnapshotScope parse_scope(const std::string& s) {
  if (s == "full") return SnapshotScope::Full;
  if (s == "lines_only") return SnapshotScope::LinesOnly;
  throw ConfigError("unknown snapshot scope: " + s);
}

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

void CacheSnapshot::serialize(std::vector<std::uint8_t>& out) const {
  out.push_back(scope == SnapshotScope::Full ? 1 : 0);
  put_u32(out, static_cast<std::uint32_t>(caches.size()));
  for (const SnapCache& c : caches) {
    put_u32(out, static_cast<std::uint32_t>(c.lines.size()));
    for (const SnapLine& l : c.lines) {
      out.push_back(l.valid ? 1 : 0);
      put_u64(out, l.tag);
      put_u32(out, l.meta);
      out.push_back(static_cast<std::uint8_t>(l.origin));
    }
    put_u32(out, static_cast<std::uint32_t>(c.tree_bits.size()));
    for (std::uint32_t b : c.tree_bits) put_u32(out, b);
    out.push_back(c.stream_valid ? 1 : 0);
    put_u64(out, c.stream_last);
  }
}

std::uint64_t CacheSnapshot::digest() const {
  std::vector<std::uint8_t> bytes;
  serialize(bytes);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace cavex
