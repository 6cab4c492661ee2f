#include "fpplab/clustergraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <set>

#include "fpplab/circuits.hpp"

namespace fpplab {

namespace {

// Walks the outer boundary of `inside` from the smallest cell of `ring`; empty if the walk
// does not visit exactly the ring, each cell once.
std::vector<Site> trace_ring(const Grid& g, const std::vector<std::uint32_t>& ring, const BitGrid& inside) {
  if (ring.empty()) return {};
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
  if (d0 == 6) return {};
  auto in = [&](Site v) { return g.inside(v) && inside.test(g.cell(v)); };
  std::vector<Site> walk = trace_boundary(s, d0, in, 64 * (ring.size() + 8));
  std::vector<Site> a = walk, b;
  for (const std::uint32_t c : ring) b.push_back(g.site(c));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != b || !is_circuit(walk)) return {};
  rotate_to_min(walk);
  return walk;
}

double segment_distance(Point a, Point b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? -(a.x * dx + a.y * dy) / len2 : 0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(a.x + t * dx, a.y + t * dy);
}

// Colors with the frame exterior open.
struct Colors {
  const Configuration& cfg;
  const Grid& g;
  explicit Colors(const Configuration& c) : cfg(c), g(c.grid()) {}
  bool member(std::uint32_t c) const { return cfg.region().contains_cell(c); }
  bool open(std::uint32_t c) const { return !member(c) || cfg.open_cell(c); }
};

// Anchors of the six triangles with a corner at a site, relative to the site.
constexpr std::array<std::pair<Site, bool>, 6> kAround{{{{0, 0}, false},
                                                        {{-1, 0}, false},
                                                        {{0, -1}, false},
                                                        {{0, 0}, true},
                                                        {{-1, 0}, true},
                                                        {{-1, 1}, true}}};

// Triangles: 2c is {v, v+(1,0), v+(0,1)}, 2c+1 is {v, v+(1,0), v+(1,-1)}.
struct Triangles {
  const Colors& col;
  const Grid& g;
  explicit Triangles(const Colors& c) : col(c), g(c.g) {}

  std::size_t count() const { return 2 * g.cells(); }
  Site anchor(std::uint32_t t) const { return g.site(t / 2); }
  bool exists(std::uint32_t t) const {
    const Site v = anchor(t);
    return g.inside(v + Site{1, 0}) && g.inside(v + (t % 2 ? Site{1, -1} : Site{0, 1}));
  }
  std::array<std::uint32_t, 3> sites(std::uint32_t t) const {
    const std::uint32_t c = t / 2;
    return {c, g.step(c, 0), g.step(c, t % 2 ? 5 : 1)};
  }
  bool bichromatic(std::uint32_t t) const {
    if (!exists(t)) return false;
    const auto s = sites(t);
    const bool a = col.open(s[0]);
    return col.open(s[1]) != a || col.open(s[2]) != a;
  }
  bool touches_sea(std::uint32_t t) const {
    for (const std::uint32_t c : sites(t))
      if (!col.member(c)) return true;
    return false;
  }
  std::optional<std::uint32_t> at(Site v, bool down) const {
    if (!g.inside(v)) return std::nullopt;
    const auto t = 2 * g.cell(v) + (down ? 1u : 0u);
    if (!exists(t)) return std::nullopt;
    return t;
  }
  // Neighbors across the two interface edges.
  template <class F>
  void across(std::uint32_t t, F&& f) const {
    const auto s = sites(t);
    const Site v = anchor(t);
    const bool down = t % 2;
    static constexpr std::array<Site, 3> up_other{{{0, 0}, {-1, 1}, {0, 1}}};
    static constexpr std::array<Site, 3> down_other{{{0, 0}, {0, -1}, {1, -1}}};
    static constexpr std::array<std::array<int, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    for (int e = 0; e < 3; ++e) {
      const auto [i, j] = pairs[static_cast<std::size_t>(e)];
      if (col.open(s[static_cast<std::size_t>(i)]) == col.open(s[static_cast<std::size_t>(j)])) continue;
      const Site u = v + (down ? down_other : up_other)[static_cast<std::size_t>(e)];
      if (auto o = at(u, !down)) f(*o);
    }
  }
  template <class F>
  void around(std::uint32_t c, F&& f) const {
    const Site s = g.site(c);
    for (const auto& [off, down] : kAround)
      if (auto t = at(s + off, down)) f(*t);
  }
  Point center(std::uint32_t t) const {
    const Point p = embed(anchor(t));
    const Point q = embed(t % 2 ? Site{2, -1} : Site{1, 1});
    return {p.x + q.x / 3, p.y + q.y / 3};
  }
};

struct Dsu {
  std::vector<std::uint32_t> parent;
  explicit Dsu(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::vector<std::int32_t> components_of(const std::vector<std::vector<std::int32_t>>& adj,
                                        const std::vector<bool>& is_vertex) {
  std::vector<std::int32_t> comp(adj.size(), -1);
  std::int32_t next = 0;
  std::vector<std::int32_t> stack;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    if (!is_vertex[i] || comp[i] >= 0) continue;
    comp[i] = next;
    stack.push_back(static_cast<std::int32_t>(i));
    while (!stack.empty()) {
      const auto v = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      for (const std::int32_t w : adj[v])
        if (comp[static_cast<std::size_t>(w)] < 0) {
          comp[static_cast<std::size_t>(w)] = next;
          stack.push_back(w);
        }
    }
    ++next;
  }
  return comp;
}

std::int64_t bfs_distance(const std::vector<std::vector<std::int32_t>>& adj, std::int32_t a, std::int32_t b) {
  if (a == b) return 0;
  std::vector<std::int64_t> dist(adj.size(), -1);
  std::deque<std::int32_t> queue{a};
  dist[static_cast<std::size_t>(a)] = 0;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (const std::int32_t w : adj[static_cast<std::size_t>(v)]) {
      if (dist[static_cast<std::size_t>(w)] >= 0) continue;
      dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
      if (w == b) return dist[static_cast<std::size_t>(w)];
      queue.push_back(w);
    }
  }
  return kUnreachable;
}

// Cells reachable from the frame exterior without entering `wall`.
BitGrid sea_side(const Grid& g, const LatticeRegion& region, const BitGrid& wall) {
  BitGrid far(g.cells());
  std::vector<std::uint32_t> stack;
  for (std::uint32_t c = 0; c < g.cells(); ++c)
    if (!region.contains_cell(c) && !wall.test(c) && far.claim(c)) stack.push_back(c);
  while (!stack.empty()) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    const Site v = g.site(c);
    for (int d = 0; d < 6; ++d) {
      const Site w = neighbor(v, d);
      if (!g.inside(w)) continue;
      const std::uint32_t e = g.cell(w);
      if (!wall.test(e) && far.claim(e)) stack.push_back(e);
    }
  }
  return far;
}

bool near_exterior(const Grid& g, const LatticeRegion& region, std::uint32_t c) {
  const Site v = g.site(c);
  for (int d = 0; d < 6; ++d) {
    const Site w = neighbor(v, d);
    if (!g.inside(w) || !region.contains_cell(g.cell(w))) return true;
  }
  return false;
}

// The exterior site boundary of X: cells next to X with a way out that avoids X and its rim.
struct Exterior {
  std::vector<std::uint32_t> cells;
  BitGrid far;
};
Exterior exterior_boundary(const Grid& g, const LatticeRegion& region, const BitGrid& X) {
  const std::size_t n = g.cells();
  BitGrid wall = X;
  std::vector<std::uint32_t> rim;
  for (std::uint32_t c = 0; c < n; ++c) {
    if (!X.test(c)) continue;
    for (int d = 0; d < 6; ++d) {
      const std::uint32_t e = g.step(c, d);
      if (wall.claim(e)) rim.push_back(e);
    }
  }
  Exterior out{{}, sea_side(g, region, wall)};
  for (const std::uint32_t c : rim)
    for (int d = 0; d < 6; ++d)
      if (g.inside(g.site(c) + kDirections[static_cast<std::size_t>(d)]) && out.far.test(g.step(c, d))) {
        out.cells.push_back(c);
        break;
      }
  std::sort(out.cells.begin(), out.cells.end());
  return out;
}

BitGrid filled(const Grid& g, const LatticeRegion& region, const BitGrid& X) {
  BitGrid out = sea_side(g, region, X);
  for (auto& w : out.words()) w = ~w;
  // Bits past the last cell are never read.
  return out;
}

// Grows G from the filled exterior boundary of the seed cluster, absorbing every open
// cluster met on the exterior boundary of G, until that boundary is all closed (a double
// circuit) or G reaches the frame. After a double circuit the search continues outward.
std::vector<DoubleCircuit> double_circuits_from(const Configuration& cfg, const std::vector<std::uint32_t>& seed) {
  const Grid& g = cfg.grid();
  const LatticeRegion& region = cfg.region();
  const std::size_t n = g.cells();
  std::vector<DoubleCircuit> out;
  auto open = [&](std::uint32_t c) { return !region.contains_cell(c) || cfg.open_cell(c); };
  auto touches_exterior = [&](const BitGrid& set) {
    for (std::uint32_t c = 0; c < n; ++c)
      if (set.test(c) && (!region.contains_cell(c) || near_exterior(g, region, c))) return true;
    return false;
  };
  BitGrid absorbed(n);
  std::vector<std::uint32_t> stack;
  // Adds the open clusters at `starts` and their neighbors to G. Filling afterwards gives the
  // same set as filling each cluster's exterior boundary on its own: rim cells away from the
  // far side are enclosed anyway.
  auto absorb = [&](BitGrid& G, const std::vector<std::uint32_t>& starts) {
    for (const std::uint32_t c : starts) {
      if (!absorbed.claim(c)) continue;
      stack.push_back(c);
      while (!stack.empty()) {
        const std::uint32_t a = stack.back();
        stack.pop_back();
        G.set(a);
        for (int d = 0; d < 6; ++d) {
          const std::uint32_t e = g.step(a, d);
          G.set(e);
          if (region.contains_cell(e) && cfg.open_cell(e) && absorbed.claim(e)) stack.push_back(e);
        }
      }
    }
  };

  BitGrid G(n);
  if (open(seed.front())) {
    absorb(G, seed);
  } else {
    for (const std::uint32_t c : seed) G.set(c);
  }
  G = filled(g, region, G);
  while (!touches_exterior(G)) {
    // Every site next to G is next to an absorbed cluster's boundary, hence linked.
    std::vector<std::uint32_t> opened;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (!G.test(c)) continue;
      for (int d = 0; d < 6; ++d) {
        const std::uint32_t e = g.step(c, d);
        if (!G.test(e) && open(e)) opened.push_back(e);
      }
    }
    if (!opened.empty()) {
      absorb(G, opened);
      G = filled(g, region, G);
      continue;
    }
    const Exterior Q = exterior_boundary(g, region, G);
    BitGrid q(n), inside(n), fill(n);
    for (const std::uint32_t c : Q.cells) q.set(c);
    for (std::uint32_t c = 0; c < n; ++c) {
      fill.assign(c, !Q.far.test(c));
      inside.assign(c, !Q.far.test(c) && !q.test(c));
    }
    std::vector<std::uint32_t> p_cells;
    for (std::uint32_t c = 0; c < n; ++c) {
      if (!inside.test(c)) continue;
      for (int d = 0; d < 6; ++d)
        if (q.test(g.step(c, d))) {
          p_cells.push_back(c);
          break;
        }
    }
    DoubleCircuit dc{trace_ring(g, p_cells, inside), trace_ring(g, Q.cells, fill)};
    if (dc.inner.empty() || dc.outer.empty()) throw std::logic_error("exterior boundary pair is not a pair of circuits");
    const bool closed = std::none_of(p_cells.begin(), p_cells.end(), open);
    if (closed) out.push_back(std::move(dc));
    G = fill;
  }
  return out;
}

}  // namespace

std::int32_t ClusterPartition::cluster_of(Site v) const {
  if (!region->contains(v)) throw std::out_of_range("site outside the region");
  return id[region->grid().cell(v)];
}

ClusterPartition clusters(const Configuration& cfg) {
  ClusterPartition out;
  out.region = cfg.region_ptr();
  const Grid& g = cfg.grid();
  const LatticeRegion& region = cfg.region();
  out.id.assign(g.cells(), -1);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t c = 0; c < g.cells(); ++c) {
    if (!region.contains_cell(c) || out.id[c] >= 0) continue;
    const auto k = static_cast<std::int32_t>(out.clusters.size());
    const bool color = cfg.open_cell(c);
    out.clusters.push_back({color, {}, false});
    out.id[c] = k;
    stack.push_back(c);
    while (!stack.empty()) {
      const std::uint32_t a = stack.back();
      stack.pop_back();
      for (int d = 0; d < 6; ++d) {
        const std::uint32_t e = g.step(a, d);
        if (region.contains_cell(e) && out.id[e] < 0 && cfg.open_cell(e) == color) {
          out.id[e] = k;
          stack.push_back(e);
        }
      }
    }
  }
  for (std::uint32_t c = 0; c < g.cells(); ++c) {
    if (out.id[c] < 0) continue;
    ClusterInfo& info = out.clusters[static_cast<std::size_t>(out.id[c])];
    info.sites.push_back(g.site(c));
    if (near_exterior(g, region, c)) info.touches_frame = true;
  }
  return out;
}

std::size_t ClusterGraphModel::edge_count() const {
  std::size_t n = 0;
  for (const auto& a : adjacency) n += a.size();
  return n / 2;
}

bool ClusterGraphModel::in_infinite_proxy(std::int32_t cluster) const {
  const std::int32_t k = component.at(static_cast<std::size_t>(cluster));
  return k >= 0 && component_sea_linked[static_cast<std::size_t>(k)];
}

bool ClusterGraphModel::proxy_empty() const {
  return std::none_of(component_sea_linked.begin(), component_sea_linked.end(), [](bool b) { return b; });
}

ClusterGraphModel build_cluster_graph(const Configuration& cfg, const ClusterPartition& partition) {
  if (!(*partition.region == cfg.region())) throw std::invalid_argument("partition of another region");
  const Grid& g = cfg.grid();
  const LatticeRegion& region = cfg.region();
  ClusterGraphModel model;
  const std::size_t k = partition.clusters.size();
  model.adjacency.resize(k);
  std::vector<bool> is_vertex(k, false), linked(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    if (!partition.clusters[i].open) continue;
    is_vertex[i] = true;
    model.vertices.push_back(static_cast<std::int32_t>(i));
    if (partition.clusters[i].touches_frame) linked[i] = true;
  }
  std::vector<std::int32_t> near;
  for (std::uint32_t c = 0; c < g.cells(); ++c) {
    if (!region.contains_cell(c) || cfg.open_cell(c)) continue;
    near.clear();
    for (int d = 0; d < 6; ++d) {
      const std::uint32_t e = g.step(c, d);
      if (region.contains_cell(e) && cfg.open_cell(e)) near.push_back(partition.id[e]);
    }
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
    const bool frame = near_exterior(g, region, c);
    for (std::size_t i = 0; i < near.size(); ++i) {
      if (frame) linked[static_cast<std::size_t>(near[i])] = true;
      for (std::size_t j = i + 1; j < near.size(); ++j) {
        model.adjacency[static_cast<std::size_t>(near[i])].push_back(near[j]);
        model.adjacency[static_cast<std::size_t>(near[j])].push_back(near[i]);
      }
    }
  }
  for (auto& a : model.adjacency) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  model.component = components_of(model.adjacency, is_vertex);
  std::int32_t ncomp = 0;
  for (const std::int32_t c : model.component) ncomp = std::max(ncomp, c + 1);
  model.component_sea_linked.assign(static_cast<std::size_t>(ncomp), false);
  for (std::size_t i = 0; i < k; ++i)
    if (linked[i]) model.component_sea_linked[static_cast<std::size_t>(model.component[i])] = true;
  return model;
}

std::int64_t graph_distance(const ClusterGraphModel& model, std::int32_t a, std::int32_t b) {
  for (const std::int32_t v : {a, b})
    if (v < 0 || static_cast<std::size_t>(v) >= model.component.size() || model.component[static_cast<std::size_t>(v)] < 0)
      throw std::invalid_argument("not a vertex of the cluster graph");
  if (model.component[static_cast<std::size_t>(a)] != model.component[static_cast<std::size_t>(b)]) return kUnreachable;
  return bfs_distance(model.adjacency, a, b);
}

std::optional<std::int32_t> innermost_surrounding_cluster(const Configuration& cfg, const ClusterPartition& partition,
                                                          double n) {
  const LatticeRegion& region = cfg.region();
  if (region.shape() != RegionShape::Ball || !(region.center() == kOrigin))
    throw std::invalid_argument("innermost surrounding cluster needs a ball about the origin");
  const auto dec = peel_colored(cfg, n, region.outer_radius(), PeelOrder::InnermostFirst, true, 1);
  if (dec.count() == 0) return std::nullopt;
  return partition.cluster_of(dec.circuits[0][0]);
}

std::optional<Site> innermost_surrounding_site(const Configuration& cfg, double n) {
  const Grid& g = cfg.grid();
  const LatticeRegion& region = cfg.region();
  BitGrid X(g.cells());
  std::vector<std::uint32_t> stack;
  const auto m = static_cast<std::int32_t>(std::ceil(n)) + 1;
  for (std::int32_t y = -m; y <= m; ++y)
    for (std::int32_t x = -m; x <= m; ++x) {
      const Site v{x, y};
      if (!hexagon_in_ball(v, kOrigin, n)) continue;
      if (!region.contains(v)) throw std::invalid_argument("B(n) is not contained in the region");
      if (X.claim(g.cell(v))) stack.push_back(g.cell(v));
    }
  if (stack.empty()) throw std::invalid_argument("B(n) holds no site");
  while (!stack.empty()) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    if (near_exterior(g, region, c)) return std::nullopt;
    for (int d = 0; d < 6; ++d) {
      const std::uint32_t e = g.step(c, d);
      if (!cfg.open_cell(e) && X.claim(e)) stack.push_back(e);
    }
  }
  Site v = kOrigin;
  Site last = kOrigin;
  while (region.contains(v)) {
    if (X.test(g.cell(v))) last = v;
    v = neighbor(v, 0);
  }
  return neighbor(last, 0);
}

std::vector<DoubleCircuit> find_double_circuits(const Configuration& cfg) {
  const Grid& g = cfg.grid();
  if (!cfg.region().contains(kOrigin)) throw std::invalid_argument("origin outside the region");
  if (!cfg.open(kOrigin)) return double_circuits_from(cfg, {g.cell(kOrigin)});
  const ClusterPartition partition = clusters(cfg);
  return find_double_circuits(cfg, partition, partition.cluster_of(kOrigin));
}

std::vector<DoubleCircuit> find_double_circuits(const Configuration& cfg, const ClusterPartition& partition,
                                                std::int32_t cluster) {
  const auto& info = partition.clusters.at(static_cast<std::size_t>(cluster));
  if (!info.open) throw std::invalid_argument("not an open cluster");
  std::vector<std::uint32_t> seed;
  for (const Site v : info.sites) seed.push_back(cfg.grid().cell(v));
  return double_circuits_from(cfg, seed);
}

bool verify_double_circuit(const Configuration& cfg, const DoubleCircuit& dc) {
  const auto& P = dc.inner;
  const auto& Q = dc.outer;
  if (!is_circuit(P) || !is_circuit(Q)) return false;
  const std::set<Site> ps(P.begin(), P.end()), qs(Q.begin(), Q.end());
  for (const auto* c : {&P, &Q})
    for (const Site v : *c)
      if (!cfg.region().contains(v) || cfg.open(v)) return false;
  for (const Site v : P) {
    if (qs.count(v) || winding_number(Q, embed(v)) != 1) return false;
    bool by = false;
    for (const Site w : neighbors(v)) by = by || qs.count(w);
    if (!by) return false;
  }
  for (const Site v : Q) {
    bool by = false;
    for (const Site w : neighbors(v)) by = by || ps.count(w);
    if (!by) return false;
  }
  // Nothing strictly between the two.
  std::int32_t x0 = Q[0].x, x1 = Q[0].x, y0 = Q[0].y, y1 = Q[0].y;
  for (const Site v : Q) {
    x0 = std::min(x0, v.x);
    x1 = std::max(x1, v.x);
    y0 = std::min(y0, v.y);
    y1 = std::max(y1, v.y);
  }
  for (std::int32_t y = y0; y <= y1; ++y)
    for (std::int32_t x = x0; x <= x1; ++x) {
      const Site v{x, y};
      if (ps.count(v) || qs.count(v)) continue;
      if (winding_number(Q, embed(v)) != 0 && winding_number(P, embed(v)) == 0) return false;
    }
  return true;
}

bool is_sublattice_circuit(std::span<const Site> cycle) {
  if (cycle.size() < 3) return false;
  std::set<Site> seen(cycle.begin(), cycle.end());
  if (seen.size() != cycle.size()) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    if (!sublattice_adjacent(cycle[i], cycle[(i + 1) % cycle.size()])) return false;
  return true;
}

std::vector<Site> sublattice_bridge(const DoubleCircuit& dc) {
  const std::set<Site> qs(dc.outer.begin(), dc.outer.end());
  std::vector<Site> out;
  const std::size_t m = dc.inner.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Site u = dc.inner[i], w = dc.inner[(i + 1) % m];
    out.push_back(u);
    if (sublattice_adjacent(u, w)) continue;
    if (!adjacent(u, w)) throw BridgeError("inner circuit is not a lattice path", u, w);
    std::vector<Site> common;
    for (const Site a : neighbors(u))
      if (adjacent(a, w) && qs.count(a)) common.push_back(a);
    if (common.size() != 1) throw BridgeError("bond has no unique common neighbor on the outer circuit", u, w);
    out.push_back(common[0]);
  }
  if (!is_sublattice_circuit(out)) throw BridgeError("bridged path is not a sublattice circuit", out.front(), out.back());
  return out;
}

double distance_to_infinite_component(const Configuration& cfg, const ClusterPartition& partition,
                                      const ClusterGraphModel& model) {
  (void)cfg;
  if (model.proxy_empty()) throw std::runtime_error("frame too small: no cluster reaches the frame");
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const std::int32_t k : model.vertices) {
    if (!model.in_infinite_proxy(k)) continue;
    for (const Site v : partition.clusters[static_cast<std::size_t>(k)].sites) best = std::min(best, norm2(v));
  }
  return std::sqrt(static_cast<double>(best));
}

double distance_to_infinite_component(const Configuration& cfg) {
  const ClusterPartition partition = clusters(cfg);
  return distance_to_infinite_component(cfg, partition, build_cluster_graph(cfg, partition));
}

void export_cluster_graph(const ClusterPartition& partition, const ClusterGraphModel& model, std::ostream& adjacency,
                          std::ostream& metadata) {
  for (const std::int32_t k : model.vertices) {
    adjacency << k << ':';
    const auto& nb = model.adjacency[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < nb.size(); ++i) adjacency << (i ? "," : " ") << nb[i];
    adjacency << '\n';
  }
  metadata << "cluster_id,color,size,surrounds_origin\n";
  for (std::size_t k = 0; k < partition.clusters.size(); ++k) {
    const auto& info = partition.clusters[k];
    // Surrounds the origin when the origin is off the cluster and cut off from the frame by it.
    bool surrounds = false;
    if (partition.region->contains(kOrigin) && partition.cluster_of(kOrigin) != static_cast<std::int32_t>(k)) {
      const Grid& g = partition.region->grid();
      BitGrid wall(g.cells());
      for (const Site v : info.sites) wall.set(g.cell(v));
      surrounds = !sea_side(g, *partition.region, wall).test(g.cell(kOrigin));
    }
    metadata << k << ',' << (info.open ? "open" : "closed") << ',' << info.size() << ',' << (surrounds ? 1 : 0) << '\n';
  }
}

ClusterDistances cluster_distances(const Configuration& cfg, Site source, std::span<const Site> targets) {
  const Grid& g = cfg.grid();
  const LatticeRegion& region = cfg.region();
  if (!region.contains(source) || !cfg.open(source)) throw std::invalid_argument("source must be an open site");
  constexpr std::int32_t inf = std::numeric_limits<std::int32_t>::max();
  std::vector<std::int32_t> dist(g.cells(), inf);
  std::deque<std::uint32_t> queue;
  dist[g.cell(source)] = 0;
  queue.push_back(g.cell(source));
  ClusterDistances out;
  while (!queue.empty()) {
    const std::uint32_t c = queue.front();
    queue.pop_front();
    const std::int32_t d = dist[c];
    const bool c_open = cfg.open_cell(c);
    for (int k = 0; k < 6; ++k) {
      const std::uint32_t e = g.step(c, k);
      if (!region.contains_cell(e)) {
        out.sea_linked = true;
        if (out.to_sea == kUnreachable || d < out.to_sea) out.to_sea = d;
        continue;
      }
      const bool e_open = cfg.open_cell(e);
      if (!c_open && !e_open) continue;
      const std::int32_t nd = d + (e_open ? 0 : 1);
      if (nd >= dist[e]) continue;
      dist[e] = nd;
      e_open ? queue.push_front(e) : queue.push_back(e);
    }
  }
  for (const Site t : targets) {
    if (!region.contains(t) || !cfg.open(t) || dist[g.cell(t)] == inf) {
      out.to_targets.push_back(kUnreachable);
      continue;
    }
    out.to_targets.push_back(dist[g.cell(t)]);
  }
  return out;
}

std::int32_t LoopGraphModel::loop_at(Site a, Site b) const {
  if (!adjacent(a, b)) throw std::invalid_argument("sites are not adjacent");
  const Grid& g = region->grid();
  auto color = [&](Site v) { return !region->contains(v) || open.test(g.cell(v)); };
  if (color(a) == color(b)) return -1;
  // Either triangle holding both sites carries the loop through their common edge.
  for (const auto& [off, down] : kAround) {
    const Site u = a + off;
    const Site third = u + (down ? Site{1, -1} : Site{0, 1});
    if (!(u == b || u + Site{1, 0} == b || third == b)) continue;
    if (!g.inside(u) || !g.inside(u + Site{1, 0}) || !g.inside(third)) continue;
    return label[2 * g.cell(u) + (down ? 1u : 0u)];
  }
  throw std::out_of_range("edge outside the grid");
}

bool LoopGraphModel::in_infinite_proxy(std::int32_t loop) const {
  return component_sea_linked[static_cast<std::size_t>(component.at(static_cast<std::size_t>(loop)))];
}

LoopGraphModel build_loop_graph(const Configuration& cfg) {
  const Colors col(cfg);
  const Triangles tri(col);
  const Grid& g = cfg.grid();
  const std::size_t nt = tri.count();
  LoopGraphModel model;
  model.region = cfg.region_ptr();
  model.open = cfg.open_bits();
  Dsu dsu(nt);
  std::vector<bool> bi(nt, false);
  for (std::uint32_t t = 0; t < nt; ++t) bi[t] = tri.bichromatic(t);
  for (std::uint32_t t = 0; t < nt; ++t)
    if (bi[t]) tri.across(t, [&](std::uint32_t o) { dsu.unite(t, o); });
  model.label.assign(nt, -1);
  std::vector<bool> sea;
  for (std::uint32_t t = 0; t < nt; ++t) {
    if (!bi[t]) continue;
    const std::uint32_t r = dsu.find(t);
    if (model.label[r] < 0) {
      model.label[r] = static_cast<std::int32_t>(sea.size());
      sea.push_back(false);
    }
    model.label[t] = model.label[r];
    if (tri.touches_sea(t)) sea[static_cast<std::size_t>(model.label[t])] = true;
  }
  model.adjacency.resize(sea.size());
  std::vector<std::int32_t> corner;
  for (std::uint32_t c = 0; c < g.cells(); ++c) {
    corner.clear();
    tri.around(c, [&](std::uint32_t t) {
      if (model.label[t] >= 0) corner.push_back(model.label[t]);
    });
    std::sort(corner.begin(), corner.end());
    corner.erase(std::unique(corner.begin(), corner.end()), corner.end());
    for (std::size_t i = 0; i < corner.size(); ++i)
      for (std::size_t j = i + 1; j < corner.size(); ++j) {
        model.adjacency[static_cast<std::size_t>(corner[i])].push_back(corner[j]);
        model.adjacency[static_cast<std::size_t>(corner[j])].push_back(corner[i]);
      }
  }
  for (auto& a : model.adjacency) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  model.component = components_of(model.adjacency, std::vector<bool>(sea.size(), true));
  std::int32_t ncomp = 0;
  for (const std::int32_t k : model.component) ncomp = std::max(ncomp, k + 1);
  model.component_sea_linked.assign(static_cast<std::size_t>(ncomp), false);
  for (std::size_t i = 0; i < sea.size(); ++i)
    if (sea[i]) model.component_sea_linked[static_cast<std::size_t>(model.component[i])] = true;
  return model;
}

std::int64_t loop_distance(const LoopGraphModel& model, std::int32_t a, std::int32_t b) {
  for (const std::int32_t v : {a, b})
    if (v < 0 || static_cast<std::size_t>(v) >= model.loop_count()) throw std::invalid_argument("not a loop");
  if (model.component[static_cast<std::size_t>(a)] != model.component[static_cast<std::size_t>(b)]) return kUnreachable;
  return bfs_distance(model.adjacency, a, b);
}

std::optional<std::int32_t> innermost_loop_crossing(const Configuration& cfg, double n) {
  const Colors col(cfg);
  const Triangles tri(col);
  const Grid& g = cfg.grid();
  if (!cfg.region().contains(kOrigin)) throw std::invalid_argument("origin outside the region");
  std::set<std::int32_t> traced;
  for (std::int32_t k = 0;; ++k) {
    const Site a{k, 0}, b{k + 1, 0};
    if (!g.inside(b) || !g.inside(a + Site{0, 1})) return std::nullopt;
    if (col.open(g.cell(a)) == col.open(g.cell(b)) || traced.count(k)) continue;
    const std::uint32_t start = 2 * g.cell(a);
    std::uint32_t prev = start, cur = start + 1;
    int parity = 1;
    double closest = segment_distance(tri.center(start), tri.center(cur));
    traced.insert(k);
    for (std::size_t steps = 0; cur != start; ++steps) {
      if (steps > 2 * tri.count()) throw std::logic_error("loop trace did not close");
      std::uint32_t next = cur;
      tri.across(cur, [&](std::uint32_t o) {
        if (o != prev) next = o;
      });
      if (next / 2 == cur / 2) {
        const Site v = tri.anchor(cur);
        if (v.y == 0 && v.x >= 0) {
          parity ^= 1;
          traced.insert(v.x);
        }
      }
      closest = std::min(closest, segment_distance(tri.center(cur), tri.center(next)));
      prev = cur;
      cur = next;
    }
    if (parity == 1 && closest > n) return k;
  }
}

LoopDistances loop_distances(const Configuration& cfg, std::int32_t source, std::span<const std::int32_t> targets) {
  const Colors col(cfg);
  const Triangles tri(col);
  const Grid& g = cfg.grid();
  auto axis_triangle = [&](std::int32_t k) {
    const Site a{k, 0}, b{k + 1, 0};
    if (!g.inside(b) || !g.inside(a + Site{0, 1}) || col.open(g.cell(a)) == col.open(g.cell(b)))
      throw std::invalid_argument("no loop crosses this axis edge");
    return 2 * g.cell(a);
  };
  constexpr std::int32_t inf = std::numeric_limits<std::int32_t>::max();
  std::vector<std::int32_t> dist(tri.count(), inf);
  std::deque<std::uint32_t> queue;
  const std::uint32_t s = axis_triangle(source);
  dist[s] = 0;
  queue.push_back(s);
  LoopDistances out;
  while (!queue.empty()) {
    const std::uint32_t t = queue.front();
    queue.pop_front();
    const std::int32_t d = dist[t];
    if (tri.touches_sea(t)) {
      out.sea_linked = true;
      if (out.to_sea == kUnreachable || d < out.to_sea) out.to_sea = d;
    }
    tri.across(t, [&](std::uint32_t o) {
      if (d < dist[o]) {
        dist[o] = d;
        queue.push_front(o);
      }
    });
    for (const std::uint32_t c : tri.sites(t))
      tri.around(c, [&](std::uint32_t o) {
        if (d + 1 < dist[o] && tri.bichromatic(o)) {
          dist[o] = d + 1;
          queue.push_back(o);
        }
      });
  }
  for (const std::int32_t k : targets) {
    const std::uint32_t t = axis_triangle(k);
    out.to_targets.push_back(dist[t] == inf ? kUnreachable : dist[t]);
  }
  return out;
}


std::optional<std::int64_t> truncated_cluster_distance(const Configuration& cfg, double n) {
  const Grid& g = cfg.grid();
  const LatticeRegion& region = cfg.region();
  if (!region.contains(kOrigin) || !cfg.open(kOrigin)) throw std::invalid_argument("the origin must be open");
  const auto target = innermost_surrounding_site(cfg, n);
  const std::uint32_t t = target ? g.cell(*target) : ~0u;
  constexpr std::int32_t inf = std::numeric_limits<std::int32_t>::max();
  std::vector<std::int32_t> dist(g.cells(), inf);
  std::deque<std::uint32_t> queue{g.cell(kOrigin)};
  dist[queue.front()] = 0;
  // Pops come in non-decreasing distance, so the first hit is the answer.
  while (!queue.empty()) {
    const std::uint32_t c = queue.front();
    queue.pop_front();
    const std::int32_t d = dist[c];
    if (c == t || near_exterior(g, region, c)) return d;
    const bool c_open = cfg.open_cell(c);
    for (int k = 0; k < 6; ++k) {
      const std::uint32_t e = g.step(c, k);
      const bool e_open = cfg.open_cell(e);
      if (!c_open && !e_open) continue;
      const std::int32_t nd = d + (e_open ? 0 : 1);
      if (nd >= dist[e]) continue;
      dist[e] = nd;
      e_open ? queue.push_front(e) : queue.push_back(e);
    }
  }
  return std::nullopt;
}

std::optional<std::int64_t> truncated_loop_distance(const Configuration& cfg, double n) {
  const auto source = innermost_loop_crossing(cfg, 0);
  // No loop around 0 inside the frame: the first one is the exterior's, and so is L_n.
  if (!source) return 0;
  const auto target = innermost_loop_crossing(cfg, n);
  const Colors col(cfg);
  const Triangles tri(col);
  const Grid& g = cfg.grid();
  const std::uint32_t s = 2 * g.cell({*source, 0});
  const std::uint32_t t = target ? 2 * g.cell({*target, 0}) : ~0u;
  constexpr std::int32_t inf = std::numeric_limits<std::int32_t>::max();
  std::vector<std::int32_t> dist(tri.count(), inf);
  std::deque<std::uint32_t> queue{s};
  dist[s] = 0;
  while (!queue.empty()) {
    const std::uint32_t u = queue.front();
    queue.pop_front();
    const std::int32_t d = dist[u];
    if (u == t || tri.touches_sea(u)) return d;
    tri.across(u, [&](std::uint32_t o) {
      if (d < dist[o]) {
        dist[o] = d;
        queue.push_front(o);
      }
    });
    for (const std::uint32_t c : tri.sites(u))
      tri.around(c, [&](std::uint32_t o) {
        if (d + 1 < dist[o] && tri.bichromatic(o)) {
          dist[o] = d + 1;
          queue.push_back(o);
        }
      });
  }
  return std::nullopt;
}

}  // namespace fpplab
