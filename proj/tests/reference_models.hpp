// Independent reference models used as test oracles. These deliberately share
// no code with the library implementations they check.
#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace refmodel {

// Minimal LRU cache on recency-ordered address lists, front = MRU.
struct BruteLru {
  std::size_t n_sets;
  std::size_t n_ways;
  std::vector<std::vector<std::uint64_t>> sets;

  BruteLru(std::size_t sets_, std::size_t ways_) : n_sets(sets_), n_ways(ways_), sets(sets_) {}

  struct Out {
    bool hit = false;
    std::optional<std::uint64_t> evicted;
  };

  Out access(std::uint64_t a) {
    auto& s = sets[a % n_sets];
    Out out;
    auto it = std::find(s.begin(), s.end(), a);
    if (it != s.end()) {
      out.hit = true;
      s.erase(it);
      s.insert(s.begin(), a);
      return out;
    }
    s.insert(s.begin(), a);
    if (s.size() > n_ways) {
      out.evicted = s.back();
      s.pop_back();
    }
    return out;
  }

  bool flush(std::uint64_t a) {
    auto& s = sets[a % n_sets];
    auto it = std::find(s.begin(), s.end(), a);
    if (it == s.end()) return false;
    s.erase(it);
    return true;
  }

  void reset() {
    for (auto& s : sets) s.clear();
  }
};

// Central finite difference of f at x[i].
inline double central_diff(const std::function<double()>& f, double& xi, double eps) {
  const double saved = xi;
  xi = saved + eps;
  const double fp = f();
  xi = saved - eps;
  const double fm = f();
  xi = saved;
  return (fp - fm) / (2.0 * eps);
}

inline double rel_err(double a, double b) {
  const double denom = std::max({1e-8, std::abs(a), std::abs(b)});
  return std::abs(a - b) / denom;
}

}  // namespace refmodel
