#pragma once

#include <deque>
#include <unordered_set>

namespace fpplab {

template <class Allowed>
std::vector<Site> flood(std::span<const Site> seeds, Allowed&& allowed) {
  std::unordered_set<std::uint64_t> seen;
  std::deque<Site> queue;
  std::vector<Site> out;
  for (const Site s : seeds)
    if (allowed(s) && seen.insert(pack(s)).second) queue.push_back(s);
  while (!queue.empty()) {
    const Site v = queue.front();
    queue.pop_front();
    out.push_back(v);
    for (const Site w : neighbors(v))
      if (allowed(w) && seen.insert(pack(w)).second) queue.push_back(w);
  }
  return out;
}

}  // namespace fpplab
