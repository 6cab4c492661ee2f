#include "fpplab/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpplab {

namespace {

// 0: B(r), 1: A(r,R), 2: outside B(R). Every grid cell is classified.
struct Zones {
  const Grid& g;
  std::vector<std::uint8_t> zone;

  Zones(const Configuration& cfg, double r, double R, Site center = kOrigin) : g(cfg.grid()), zone(g.cells(), 2) {
    for (std::uint32_t c = 0; c < g.cells(); ++c) {
      const Site v = g.site(c);
      if (!hexagon_in_ball(v, center, R)) continue;
      if (!cfg.region().contains_cell(c)) throw std::invalid_argument("B(R) is not contained in the configuration region");
      zone[c] = hexagon_in_ball(v, center, r) ? 0 : 1;
    }
  }
  bool touches(std::uint32_t c, std::uint8_t z) const {
    const Site v = g.site(c);
    for (int d = 0; d < 6; ++d) {
      const Site w = neighbor(v, d);
      if (g.inside(w) ? zone[g.cell(w)] == z : z == 2) return true;
    }
    return false;
  }
};

std::vector<Site> trace_cells(const Grid& g, const std::vector<std::uint32_t>& ring, const BitGrid& inside) {
  std::uint32_t start = ring.front();
  for (const std::uint32_t c : ring)
    if (g.site(c) < g.site(start)) start = c;
  const Site s = g.site(start);
  int d0 = 0;
  while (d0 < 6) {
    const Site w = neighbor(s, d0);
    if (!g.inside(w) || !inside.test(g.cell(w))) break;
    ++d0;
  }
  auto in = [&](Site v) { return g.inside(v) && inside.test(g.cell(v)); };
  std::vector<Site> walk = trace_boundary(s, d0, in, 64 * (ring.size() + 8));
  std::vector<Site> a = walk, b;
  for (const std::uint32_t c : ring) b.push_back(g.site(c));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b || !is_circuit(walk)) throw std::logic_error("peeled boundary is not a circuit");
  rotate_to_min(walk);
  return walk;
}

// Peels circuits whose sites have color `barrier_open` (false: closed circuits).
CircuitDecomposition peel_impl(const Configuration& cfg, double r, double R, PeelOrder order, bool barrier_open,
                               std::size_t limit = static_cast<std::size_t>(-1)) {
  if (!(r >= 0) || !(R > r)) throw std::invalid_argument("degenerate annulus");
  const Zones z(cfg, r, R);
  const Grid& g = z.g;
  const std::size_t n = g.cells();
  const bool innermost = order == PeelOrder::InnermostFirst;
  const std::uint8_t seed_zone = innermost ? 0 : 2;
  const std::uint8_t stop_zone = innermost ? 2 : 0;
  auto passable = [&](std::uint32_t c) { return z.zone[c] == 1 && cfg.open_cell(c) != barrier_open; };

  CircuitDecomposition out;
  out.r = r;
  out.R = R;
  out.order = order;

  // Core: the filled region already peeled (inner core or outer shell).
  BitGrid core(n);
  for (std::uint32_t c = 0; c < n; ++c)
    if (z.zone[c] == seed_zone) core.set(c);

  std::vector<std::uint32_t> stack;
  while (out.count() < limit) {
    BitGrid W = core;
    bool hit = false;
    for (std::uint32_t c = 0; c < n && !hit; ++c) {
      if (!core.test(c)) continue;
      const Site v = g.site(c);
      for (int d = 0; d < 6; ++d) {
        const Site w = neighbor(v, d);
        if (!g.inside(w)) continue;
        const std::uint32_t e = g.cell(w);
        if (z.zone[e] == stop_zone) hit = true;
        if (passable(e) && W.claim(e)) stack.push_back(e);
      }
    }
    while (!stack.empty() && !hit) {
      const std::uint32_t c = stack.back();
      stack.pop_back();
      for (int d = 0; d < 6; ++d) {
        const std::uint32_t e = g.step(c, d);
        if (z.zone[e] == stop_zone) hit = true;
        if (passable(e) && W.claim(e)) stack.push_back(e);
      }
    }
    stack.clear();
    if (hit) break;

    BitGrid rim(n);
    for (std::uint32_t c = 0; c < n; ++c) {
      if (!W.test(c)) continue;
      const Site v = g.site(c);
      for (int d = 0; d < 6; ++d) {
        const Site w = neighbor(v, d);
        if (g.inside(w) && !W.test(g.cell(w))) rim.set(g.cell(w));
      }
    }
    // Far side: the component of the complement of W and its rim on the side opposite the core.
    BitGrid far(n);
    for (std::uint32_t c = 0; c < n; ++c)
      if (z.zone[c] == stop_zone && !W.test(c) && !rim.test(c) && far.claim(c)) stack.push_back(c);
    while (!stack.empty()) {
      const std::uint32_t c = stack.back();
      stack.pop_back();
      const Site v = g.site(c);
      for (int d = 0; d < 6; ++d) {
        const Site w = neighbor(v, d);
        if (!g.inside(w)) continue;
        const std::uint32_t e = g.cell(w);
        if (!W.test(e) && !rim.test(e) && far.claim(e)) stack.push_back(e);
      }
    }
    std::vector<std::uint32_t> ring;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (!rim.test(c)) continue;
      const Site v = g.site(c);
      for (int d = 0; d < 6; ++d) {
        const Site w = neighbor(v, d);
        if (g.inside(w) && far.test(g.cell(w))) {
          ring.push_back(c);
          break;
        }
      }
    }
    if (ring.empty()) throw std::logic_error("peeling found no separating circuit");
    for (const std::uint32_t c : ring)
      if (z.zone[c] != 1 || cfg.open_cell(c) != barrier_open) throw std::logic_error("peeled circuit has wrong color");
    BitGrid inside(n);
    if (innermost) {
      for (std::uint32_t c = 0; c < n; ++c)
        if (!far.test(c)) inside.set(c);
      out.circuits.push_back(trace_cells(g, ring, inside));
      core = inside;
    } else {
      for (std::uint32_t c = 0; c < n; ++c)
        if (far.test(c)) inside.set(c);
      for (const std::uint32_t c : ring) inside.set(c);
      out.circuits.push_back(trace_cells(g, ring, inside));
      // The new outer shell is everything outside the interior of the circuit.
      for (std::uint32_t c = 0; c < n; ++c) core.assign(c, !far.test(c));
    }
  }
  return out;
}

struct ColorView {
  const Configuration& cfg;
  const Zones& z;
  bool blue_boundary;
  // G = B(R), plus its outer rim when the boundary is forced open.
  bool in_g(std::uint32_t c) const { return z.zone[c] <= 1 || (blue_boundary && rim(c)); }
  bool rim(std::uint32_t c) const { return z.zone[c] == 2 && z.touches(c, 0) + z.touches(c, 1) > 0; }
  bool open(std::uint32_t c) const { return z.zone[c] <= 1 ? cfg.open_cell(c) : true; }
};

struct LoopRecord {
  LoopInfo info;
  std::size_t hole_size = 0;
  bool clear_of_inner = true;
  bool touches_rim = false;
};

std::vector<LoopRecord> loops_impl(const Configuration& cfg, double r, double R, bool blue_boundary) {
  if (!(r >= 0) || !(R > r)) throw std::invalid_argument("degenerate annulus");
  const Zones z(cfg, r, R);
  const Grid& g = z.g;
  const std::size_t n = g.cells();
  const ColorView view{cfg, z, blue_boundary};
  std::vector<std::uint8_t> ing(n, 0);
  for (std::uint32_t c = 0; c < n; ++c) ing[c] = view.in_g(c);
  auto in_g = [&](Site v) { return g.inside(v) && ing[g.cell(v)]; };

  std::vector<std::int32_t> label(n, -1);
  std::vector<std::size_t> sizes;
  std::vector<std::uint32_t> stack;
  auto label_from = [&](std::uint32_t s) {
    const auto id = static_cast<std::int32_t>(sizes.size());
    const bool color = view.open(s);
    label[s] = id;
    stack.push_back(s);
    std::size_t count = 0;
    while (!stack.empty()) {
      const std::uint32_t c = stack.back();
      stack.pop_back();
      ++count;
      const Site v = g.site(c);
      for (int d = 0; d < 6; ++d) {
        const Site w = neighbor(v, d);
        if (!in_g(w)) continue;
        const std::uint32_t e = g.cell(w);
        if (label[e] < 0 && view.open(e) == color) {
          label[e] = id;
          stack.push_back(e);
        }
      }
    }
    sizes.push_back(count);
  };

  const std::uint32_t o = g.cell(kOrigin);
  std::vector<LoopRecord> loops;
  if (!ing[o]) return loops;
  label_from(o);
  std::vector<std::int32_t> candidates;
  for (Site v = kOrigin; in_g(v); v = neighbor(v, 0)) {
    const std::uint32_t c = g.cell(v);
    if (label[c] < 0) label_from(c);
    if (label[c] != label[o] && std::find(candidates.begin(), candidates.end(), label[c]) == candidates.end())
      candidates.push_back(label[c]);
  }

  BitGrid hole(n);
  std::vector<std::uint32_t> members;
  for (const std::int32_t K : candidates) {
    hole.clear();
    members.clear();
    hole.set(o);
    stack.push_back(o);
    bool bounded = true;
    while (!stack.empty()) {
      const std::uint32_t c = stack.back();
      stack.pop_back();
      members.push_back(c);
      const Site v = g.site(c);
      for (int d = 0; d < 6; ++d) {
        const Site w = neighbor(v, d);
        if (!in_g(w)) {
          bounded = false;
          continue;
        }
        const std::uint32_t e = g.cell(w);
        if (label[e] != K && hole.claim(e)) stack.push_back(e);
      }
    }
    if (!bounded) continue;
    LoopRecord rec;
    rec.hole_size = members.size();
    rec.info.cluster_size = sizes[static_cast<std::size_t>(K)];
    double lo = INFINITY, hi = 0;
    bool k_open = true;
    auto note = [&](std::uint32_t c) {
      const double dist = std::sqrt(static_cast<double>(norm2(g.site(c))));
      lo = std::min(lo, dist);
      hi = std::max(hi, dist);
      if (z.zone[c] == 0) rec.clear_of_inner = false;
      if (z.zone[c] == 2) rec.touches_rim = true;
    };
    for (const std::uint32_t c : members) {
      const Site v = g.site(c);
      bool borders = false;
      for (int d = 0; d < 6; ++d) {
        const Site w = neighbor(v, d);
        if (!g.inside(w)) continue;
        const std::uint32_t e = g.cell(w);
        if (label[e] == K) {
          borders = true;
          k_open = view.open(e);
          note(e);
        }
      }
      if (borders) note(c);
    }
    rec.info.inner_radius = lo;
    rec.info.outer_radius = hi;
    rec.info.counterclockwise = !k_open;
    loops.push_back(rec);
  }
  std::sort(loops.begin(), loops.end(),
            [](const LoopRecord& a, const LoopRecord& b) { return a.hole_size > b.hole_size; });
  return loops;
}

bool arm_flood(const Configuration& cfg, double r, double R, Site center, bool color) {
  const Zones z(cfg, r, R, center);
  const Grid& g = z.g;
  BitGrid seen(g.cells());
  std::vector<std::uint32_t> stack;
  for (std::uint32_t c = 0; c < g.cells(); ++c)
    if (z.zone[c] == 1 && cfg.open_cell(c) == color && z.touches(c, 0) && seen.claim(c)) stack.push_back(c);
  while (!stack.empty()) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    if (z.touches(c, 2)) return true;
    for (int d = 0; d < 6; ++d) {
      const std::uint32_t e = g.step(c, d);
      if (z.zone[e] == 1 && cfg.open_cell(e) == color && seen.claim(e)) stack.push_back(e);
    }
  }
  return false;
}

bool box_crossing(const Configuration& cfg, Site center, std::int32_t m, std::uint32_t flipped, bool flipped_open) {
  const Grid& g = cfg.grid();
  auto inside = [&](Site v) { return std::abs(v.x - center.x) <= m && std::abs(v.y - center.y) <= m; };
  auto open = [&](std::uint32_t c) { return c == flipped ? flipped_open : cfg.open_cell(c); };
  BitGrid seen(g.cells());
  std::vector<std::uint32_t> stack;
  for (std::int32_t j = -m; j <= m; ++j) {
    const std::uint32_t c = g.cell(center + Site{-m, j});
    if (open(c) && seen.claim(c)) stack.push_back(c);
  }
  while (!stack.empty()) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    const Site v = g.site(c);
    if (v.x - center.x == m) return true;
    for (int d = 0; d < 6; ++d) {
      const Site w = neighbor(v, d);
      if (!inside(w)) continue;
      const std::uint32_t e = g.cell(w);
      if (open(e) && seen.claim(e)) stack.push_back(e);
    }
  }
  return false;
}

}  // namespace

CircuitDecomposition peel(const Configuration& cfg, double r, double R, PeelOrder order) {
  return peel_impl(cfg, r, R, order, false);
}

CircuitDecomposition peel_colored(const Configuration& cfg, double r, double R, PeelOrder order, bool open,
                                  std::size_t limit) {
  return peel_impl(cfg, r, R, order, open, limit);
}

std::size_t rho(const Configuration& cfg, double r, double R) { return peel(cfg, r, R).count(); }

std::vector<LoopInfo> surrounding_loops(const Configuration& cfg, double R, bool blue_boundary) {
  std::vector<LoopInfo> out;
  for (const auto& rec : loops_impl(cfg, 0, R, blue_boundary)) out.push_back(rec.info);
  return out;
}

LoopCount loop_count(const Configuration& cfg, double r, double R, bool blue_boundary) {
  LoopCount out;
  for (const auto& rec : loops_impl(cfg, r, R, blue_boundary))
    if (rec.clear_of_inner) out.loops.push_back(rec.info);
  out.count = out.loops.size();
  return out;
}

Configuration color_switch(const Configuration& cfg, const CircuitDecomposition& decomposition) {
  if (decomposition.order != PeelOrder::OutermostFirst)
    throw std::invalid_argument("color switch needs an outermost-first decomposition");
  const CircuitDecomposition fresh = peel(cfg, decomposition.r, decomposition.R, PeelOrder::OutermostFirst);
  if (fresh.circuits != decomposition.circuits) throw std::invalid_argument("decomposition does not match configuration");
  const Grid& g = cfg.grid();
  const std::size_t n = g.cells();
  const std::size_t k = decomposition.count();

  // D_j: the component of the origin after removing circuit j.
  std::vector<BitGrid> D;
  for (const auto& circuit : decomposition.circuits) {
    BitGrid wall(n), inside(n);
    for (const Site v : circuit) wall.set(g.cell(v));
    std::vector<std::uint32_t> stack{g.cell(kOrigin)};
    inside.set(stack.back());
    while (!stack.empty()) {
      const std::uint32_t c = stack.back();
      stack.pop_back();
      for (int d = 0; d < 6; ++d) {
        const std::uint32_t e = g.step(c, d);
        if (!wall.test(e) && inside.claim(e)) stack.push_back(e);
      }
    }
    D.push_back(std::move(inside));
  }
  Configuration out(cfg.region_ptr(), cfg.p());
  out.provenance.reset();
  cfg.region().for_each_cell([&](std::uint32_t c) {
    bool flip = false;
    for (std::size_t j = 0; j + 1 < k; j += 2)
      if (D[j].test(c) && !D[j + 1].test(c)) flip = true;
    if (k % 2 == 1 && D[k - 1].test(c)) flip = true;
    out.set_open_cell(c, cfg.open_cell(c) != flip);
  });
  return out;
}

bool detect_event(const Configuration& cfg, const ArmEventSpec& spec) {
  switch (spec.kind) {
    case ArmEvent::OneArmBlue:
      return arm_flood(cfg, spec.r, spec.R, spec.center, true);
    case ArmEvent::OneArmClosed:
      return arm_flood(cfg, spec.r, spec.R, spec.center, false);
    case ArmEvent::OpenCircuit: {
      if (!(spec.center == kOrigin)) throw std::invalid_argument("open circuit detection is centred at the origin");
      return peel_impl(cfg, spec.r, spec.R, PeelOrder::OutermostFirst, true, 1).count() == 1;
    }
    case ArmEvent::FourArmPivotal: {
      const auto m = static_cast<std::int32_t>(std::ceil(spec.R));
      for (const Site corner : {Site{-m - 1, -m - 1}, Site{m + 1, m + 1}})
        if (!cfg.region().contains(spec.center + corner)) throw std::invalid_argument("box outside configuration region");
      const std::uint32_t c = cfg.grid().cell(spec.center);
      return box_crossing(cfg, spec.center, m, c, true) != box_crossing(cfg, spec.center, m, c, false);
    }
  }
  return false;
}

std::vector<bool> one_arm_events(const Configuration& cfg, double r, std::span<const double> Rs) {
  std::vector<bool> out(Rs.size(), false);
  if (Rs.empty()) return out;
  const double top = *std::max_element(Rs.begin(), Rs.end());
  const Zones z(cfg, r, top);
  const Grid& g = z.g;
  std::vector<std::int64_t> bound9;
  for (const double R : Rs) {
    if (!(R > r)) throw std::invalid_argument("degenerate annulus");
    bound9.push_back(static_cast<std::int64_t>(std::floor(9.0L * R * R * (1.0L + 1e-12L))));
  }
  // A flooded site with a neighbor outside B(R) witnesses the arm to the rim of B(R).
  std::int64_t reach = -1;
  const std::int64_t stop = *std::max_element(bound9.begin(), bound9.end());
  BitGrid seen(g.cells());
  std::vector<std::uint32_t> stack;
  for (std::uint32_t c = 0; c < g.cells(); ++c)
    if (z.zone[c] == 1 && cfg.open_cell(c) && z.touches(c, 0) && seen.claim(c)) stack.push_back(c);
  while (!stack.empty() && reach <= stop) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    const Site v = g.site(c);
    for (int d = 0; d < 6; ++d) {
      const Site w = neighbor(v, d);
      reach = std::max(reach, corner_norm9(w));
      if (!g.inside(w)) continue;
      const std::uint32_t e = g.cell(w);
      if (z.zone[e] == 1 && cfg.open_cell(e) && seen.claim(e)) stack.push_back(e);
    }
  }
  for (std::size_t i = 0; i < Rs.size(); ++i) out[i] = reach > bound9[i];
  return out;
}

std::vector<bool> one_arm_events(const CouplingField& field, double p, double r, std::span<const double> Rs) {
  std::vector<bool> out(Rs.size(), false);
  if (Rs.empty()) return out;
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("p outside [0, 1]");
  const double top = *std::max_element(Rs.begin(), Rs.end());
  std::vector<std::int64_t> bound9;
  for (const double R : Rs) {
    if (!(R > r)) throw std::invalid_argument("degenerate annulus");
    bound9.push_back(static_cast<std::int64_t>(std::floor(9.0L * R * R * (1.0L + 1e-12L))));
  }
  const LatticeRegion& region = field.region();
  const Grid& g = region.grid();
  if (!region.contains_with_margin(LatticeRegion::ball(kOrigin, top), 1))
    throw std::invalid_argument("B(R) is not contained in the configuration region");
  const std::uint64_t t = probability_threshold(p);
  auto in_annulus = [&](Site v) { return hexagon_in_ball(v, kOrigin, top) && !hexagon_in_ball(v, kOrigin, r); };
  std::int64_t reach = -1;
  const std::int64_t stop = *std::max_element(bound9.begin(), bound9.end());
  BitGrid seen(g.cells());
  std::vector<std::uint32_t> stack;
  // Seeds: open annulus sites next to B(r).
  const auto m = static_cast<std::int32_t>(std::ceil(r)) + 2;
  for (std::int32_t y = -m; y <= m; ++y)
    for (std::int32_t x = -m; x <= m; ++x) {
      const Site v{x, y};
      if (!in_annulus(v) || field.bits(v) > t) continue;
      bool touches = false;
      for (const Site w : neighbors(v)) touches = touches || hexagon_in_ball(w, kOrigin, r);
      if (touches && seen.claim(g.cell(v))) stack.push_back(g.cell(v));
    }
  while (!stack.empty() && reach <= stop) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    const Site v = g.site(c);
    for (int d = 0; d < 6; ++d) {
      const Site w = neighbor(v, d);
      reach = std::max(reach, corner_norm9(w));
      // Each site is evaluated once, open or not.
      const std::uint32_t e = g.cell(w);
      if (!seen.claim(e) || !in_annulus(w) || field.bits(w) > t) continue;
      stack.push_back(e);
    }
  }
  for (std::size_t i = 0; i < Rs.size(); ++i) out[i] = reach > bound9[i];
  return out;
}

std::vector<NestingLevel> nesting_profile(const Configuration& cfg, double eps, double M, int k) {
  if (!(eps > 0 && eps < 1) || !(M > 1) || k < 1) throw std::invalid_argument("bad nesting parameters");
  const double top = std::pow(M / eps, k);
  if (top > 2048) throw std::invalid_argument("nesting profile too large for a dense configuration");
  std::vector<NestingLevel> out;
  for (int j = 1; j <= k; ++j) {
    NestingLevel level;
    level.R = std::pow(M / eps, j);
    level.shell_inner = eps * level.R / M;
    level.shell_outer = eps * level.R;
    const CircuitDecomposition dec = peel(cfg, 1, level.R, PeelOrder::OutermostFirst);
    for (std::size_t i = 0; i < dec.count(); ++i) {
      bool inside = true;
      for (const Site v : dec.circuits[i])
        if (!hexagon_in_ball(v, kOrigin, level.shell_outer) || hexagon_in_ball(v, kOrigin, level.shell_inner)) {
          inside = false;
          break;
        }
      if (inside) level.indices.push_back(i + 1);
    }
    const auto loops = loops_impl(cfg, 0, level.R, true);
    level.outer_loop_ok = !loops.empty() && !loops.front().touches_rim && loops.front().info.inner_radius >= level.R / 2;
    out.push_back(std::move(level));
  }
  return out;
}

bool nesting_event(const NestingLevel& level, double eps, double nu, double delta) {
  if (!level.outer_loop_ok) return false;
  const double lo = nu * std::log(1 / eps), hi = (nu + delta) * std::log(1 / eps);
  for (const std::size_t J : level.indices)
    if (static_cast<double>(J) >= lo && static_cast<double>(J) <= hi) return true;
  return false;
}

}  // namespace fpplab
