#pragma once
// Slow reference implementations used only by tests.

#include <cmath>
#include <map>
#include <numbers>
#include <queue>
#include <set>

#include "fpplab/config.hpp"

namespace oracle {

using fpplab::Site;

/// Corner test done in floating point on the embedded hexagon.
inline bool hexagon_in_disc(Site v, double r) {
  const auto p = fpplab::embed(v);
  for (int k = 0; k < 6; ++k) {
    const double a = std::numbers::pi / 6 + k * std::numbers::pi / 3;
    const double x = p.x + std::cos(a) / std::numbers::sqrt3, y = p.y + std::sin(a) / std::numbers::sqrt3;
    if (std::hypot(x, y) > r + 1e-9) return false;
  }
  return true;
}

/// Dijkstra with a binary heap on vertex weights.
template <class Allowed>
long dijkstra(const fpplab::Configuration& cfg, const std::vector<Site>& A, const std::set<Site>& B, Allowed allowed) {
  std::map<Site, long> dist;
  using Item = std::pair<long, Site>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (const Site a : A) {
    if (!allowed(a)) continue;
    const long w = cfg.weight(a);
    if (!dist.count(a) || w < dist[a]) dist[a] = w, pq.push({w, a});
  }
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d != dist[v]) continue;
    if (B.count(v)) return d;
    for (const Site w : fpplab::neighbors(v)) {
      if (!cfg.region().contains(w) || !allowed(w)) continue;
      const long nd = d + cfg.weight(w);
      auto it = dist.find(w);
      if (it == dist.end() || nd < it->second) dist[w] = nd, pq.push({nd, w});
    }
  }
  return -1;
}

inline fpplab::Configuration random_config(fpplab::RegionPtr region, double p, std::uint64_t seed) {
  return fpplab::sample_configuration(std::move(region), p, seed);
}

}  // namespace oracle
