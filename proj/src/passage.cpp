#include "fpplab/passage.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace fpplab {

namespace {

constexpr std::int32_t kUnset = std::numeric_limits<std::int32_t>::max();
constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

template <class Open>
PassageOutcome solve(const Grid& g, Open&& is_open, const std::vector<std::uint32_t>& sources, const BitGrid& target,
                     const BitGrid& allowed, bool want_path) {
  std::vector<std::int32_t> dist(g.cells(), kUnset);
  std::vector<std::uint32_t> parent;
  if (want_path) parent.assign(g.cells(), kNoParent);
  BitGrid done(g.cells());
  std::deque<std::uint32_t> dq;
  for (const std::uint32_t s : sources) {
    const std::int32_t w = is_open(s) ? 0 : 1;
    if (w < dist[s]) {
      dist[s] = w;
      w == 0 ? dq.push_front(s) : dq.push_back(s);
    }
  }
  PassageOutcome out;
  while (!dq.empty()) {
    const std::uint32_t u = dq.front();
    dq.pop_front();
    if (!done.claim(u)) continue;
    if (target.test(u)) {
      out.reachable = true;
      out.time = dist[u];
      if (want_path) {
        for (std::uint32_t c = u; c != kNoParent; c = parent[c]) out.geodesic.push_back(g.site(c));
        std::reverse(out.geodesic.begin(), out.geodesic.end());
      }
      return out;
    }
    const Site su = g.site(u);
    for (int d = 0; d < 6; ++d) {
      const std::uint32_t v = g.step(u, d);
      if (!allowed.test(v) || done.test(v)) continue;
      const bool open = is_open(v);
      const std::int32_t nd = dist[u] + (open ? 0 : 1);
      if (nd < dist[v]) {
        dist[v] = nd;
        if (want_path) parent[v] = u;
        open ? dq.push_front(v) : dq.push_back(v);
      } else if (want_path && nd == dist[v] && parent[v] != kNoParent && su < g.site(parent[v])) {
        parent[v] = u;
      }
    }
  }
  return out;
}

auto cells_open(const Configuration& cfg) {
  return [&cfg](std::uint32_t c) { return cfg.open_cell(c); };
}

auto field_open(const CouplingField& field, double p) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("p outside [0, 1]");
  const std::uint64_t t = probability_threshold(p);
  const Grid& g = field.region().grid();
  return [&field, &g, t](std::uint32_t c) { return field.bits(g.site(c)) <= t; };
}

BitGrid mask_of(const Configuration& cfg, const SitePredicate& pred) {
  const LatticeRegion& region = cfg.region();
  BitGrid m(region.grid().cells());
  region.for_each_cell([&](std::uint32_t c) {
    if (!pred || pred(region.grid().site(c))) m.set(c);
  });
  return m;
}

void require_margin(const Configuration& cfg, double radius) {
  const LatticeRegion& region = cfg.region();
  if (region.shape() == RegionShape::Ball && region.center() == kOrigin) {
    if (region.outer_radius() < radius + 2) throw std::invalid_argument("configuration region too small for B(n)");
    return;
  }
  if (!region.contains_with_margin(LatticeRegion::ball(kOrigin, radius)))
    throw std::invalid_argument("configuration region too small for B(n)");
}

}  // namespace

PassageOutcome passage_time(const Configuration& cfg, std::span<const Site> sources, const SitePredicate& is_target,
                            const SitePredicate& allowed, bool want_path) {
  const BitGrid allow = mask_of(cfg, allowed);
  const BitGrid target = mask_of(cfg, is_target);
  std::vector<std::uint32_t> cells;
  for (const Site s : sources) {
    if (!cfg.region().contains(s)) throw std::invalid_argument("source outside configuration region");
    const std::uint32_t c = cfg.grid().cell(s);
    if (allow.test(c)) cells.push_back(c);
  }
  return solve(cfg.grid(), cells_open(cfg), cells, target, allow, want_path);
}

PassageOutcome passage_time(const Configuration& cfg, std::span<const Site> A, std::span<const Site> B,
                            const LatticeRegion* confine, bool want_path) {
  if (A.empty() || B.empty()) throw std::invalid_argument("empty source or target set");
  const Grid& g = cfg.grid();
  BitGrid target(g.cells());
  for (const Site b : B) {
    if (!cfg.region().contains(b)) throw std::invalid_argument("target outside configuration region");
    target.set(g.cell(b));
  }
  SitePredicate allow;
  if (confine) allow = [confine](Site v) { return confine->contains(v); };
  const BitGrid allowed = mask_of(cfg, allow);
  std::vector<std::uint32_t> cells;
  for (const Site a : A) {
    if (!cfg.region().contains(a)) throw std::invalid_argument("source outside configuration region");
    if (allowed.test(g.cell(a))) cells.push_back(g.cell(a));
  }
  return solve(cfg.grid(), cells_open(cfg), cells, target, allowed, want_path);
}

PassageOutcome exit_time(const Configuration& cfg, double n, bool want_path) {
  if (!(n >= 0)) throw std::invalid_argument("negative radius");
  require_margin(cfg, n);
  const Site origin[] = {kOrigin};
  return passage_time(
      cfg, origin, [n](Site v) { return !hexagon_in_ball(v, kOrigin, n); }, {}, want_path);
}

PassageOutcome point_to_point(const Configuration& cfg, std::int32_t n, bool want_path) {
  const Site a[] = {kOrigin};
  const Site b[] = {Site{n, 0}};
  return passage_time(cfg, a, b, nullptr, want_path);
}

AnnulusRims annulus_rims(double r, double R, Site center) {
  if (!(r >= 0) || !(R > r)) throw std::invalid_argument("degenerate annulus");
  const LatticeRegion ring = LatticeRegion::annulus(center, r, R);
  AnnulusRims rims;
  for (const Site v : ring.sites()) {
    bool in = false, out = false;
    for (const Site w : neighbors(v)) {
      if (hexagon_in_ball(w, center, r)) in = true;
      if (!hexagon_in_ball(w, center, R)) out = true;
    }
    if (in) rims.inner.push_back(v);
    if (out) rims.outer.push_back(v);
  }
  return rims;
}

PassageOutcome annulus_crossing(const Configuration& cfg, double r, double R, bool want_path) {
  const AnnulusRims rims = annulus_rims(r, R);
  if (rims.inner.empty() || rims.outer.empty()) throw std::invalid_argument("degenerate annulus");
  const LatticeRegion ring = LatticeRegion::annulus(kOrigin, r, R);
  for (const Site v : rims.outer)
    if (!cfg.region().contains(v)) throw std::invalid_argument("annulus not contained in configuration region");
  return passage_time(cfg, rims.inner, rims.outer, &ring, want_path);
}

namespace {
template <class Open>
std::vector<std::int64_t> exit_times_impl(const LatticeRegion& region, Open&& is_open, std::span<const double> radii) {
  if (radii.empty()) return {};
  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
  const double rmax = radii[order.back()];
  if (!(radii[order.front()] >= 0)) throw std::invalid_argument("negative radius");
  if (region.shape() != RegionShape::Ball || region.center() != kOrigin || region.outer_radius() < rmax + 2) {
    if (!region.contains_with_margin(LatticeRegion::ball(kOrigin, rmax)))
      throw std::invalid_argument("configuration region too small for B(n)");
  }

  // Exact bound on nine times the squared corner radius, and a cheap inner bound on |v|^2.
  std::vector<std::int64_t> bound9(order.size());
  std::vector<std::int64_t> safe2(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const long double r = radii[order[k]];
    bound9[k] = static_cast<std::int64_t>(std::floor(9.0L * r * r * (1.0L + 1e-12L)));
    const long double s = r - 0.5774L;
    safe2[k] = s > 0 ? static_cast<std::int64_t>(std::floor(s * s)) : -1;
  }

  const Grid& g = region.grid();
  BitGrid seen(g.cells());
  std::vector<std::uint32_t> current, next;
  std::vector<std::int64_t> result(radii.size(), -1);
  std::size_t k = 0;
  const std::uint32_t o = g.cell(kOrigin);
  seen.set(o);
  std::int64_t level = is_open(o) ? 0 : 1;
  current.push_back(o);
  while (!current.empty()) {
    while (!current.empty()) {
      const std::uint32_t c = current.back();
      current.pop_back();
      const Site v = g.site(c);
      if (norm2(v) > safe2[k]) {
        const std::int64_t n9 = corner_norm9(v);
        while (k < order.size() && n9 > bound9[k]) result[order[k++]] = level;
        if (k == order.size()) return result;
      }
      for (int d = 0; d < 6; ++d) {
        const std::uint32_t e = g.step(c, d);
        if (!region.contains_cell(e) || !seen.claim(e)) continue;
        (is_open(e) ? current : next).push_back(e);
      }
    }
    current.swap(next);
    ++level;
  }
  throw std::logic_error("exploration ended inside the ball");
}
}  // namespace

std::vector<std::int64_t> exit_times(const Configuration& cfg, std::span<const double> radii) {
  return exit_times_impl(cfg.region(), cells_open(cfg), radii);
}

std::vector<std::int64_t> exit_times(const CouplingField& field, double p, std::span<const double> radii) {
  return exit_times_impl(field.region(), field_open(field, p), radii);
}

std::int64_t point_to_point(const CouplingField& field, double p, std::int32_t n) {
  const LatticeRegion& region = field.region();
  const Grid& g = region.grid();
  if (!region.contains(kOrigin) || !region.contains({n, 0})) throw std::invalid_argument("endpoint outside the region");
  const auto is_open = field_open(field, p);
  // Level by level: each site is read once, when first reached.
  const std::uint32_t o = g.cell(kOrigin), t = g.cell({n, 0});
  BitGrid seen(g.cells());
  std::vector<std::uint32_t> current{o}, next;
  seen.set(o);
  std::int64_t level = is_open(o) ? 0 : 1;
  while (!current.empty()) {
    while (!current.empty()) {
      const std::uint32_t c = current.back();
      current.pop_back();
      if (c == t) return level;
      for (int d = 0; d < 6; ++d) {
        const std::uint32_t e = g.step(c, d);
        if (!region.contains_cell(e) || !seen.claim(e)) continue;
        (is_open(e) ? current : next).push_back(e);
      }
    }
    current.swap(next);
    ++level;
  }
  return -1;
}

bool verify_geodesic(const Configuration& cfg, const PassageOutcome& outcome, std::span<const Site> sources,
                     const SitePredicate& is_target, const SitePredicate& allowed) {
  const auto& path = outcome.geodesic;
  if (!outcome.reachable || path.empty()) return false;
  if (std::find(sources.begin(), sources.end(), path.front()) == sources.end()) return false;
  if (!is_target(path.back())) return false;
  std::int64_t sum = 0;
  std::vector<Site> sorted = path;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!cfg.region().contains(path[i]) || (allowed && !allowed(path[i]))) return false;
    if (i + 1 < path.size() && !adjacent(path[i], path[i + 1])) return false;
    sum += cfg.weight(path[i]);
  }
  if (sum != outcome.time) return false;
  const PassageOutcome again = passage_time(cfg, sources, is_target, allowed, false);
  return again.reachable && again.time == outcome.time;
}

}  // namespace fpplab
