#include "fpplab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fpplab {

Point embed(Site v) {
  return {v.x + 0.5 * v.y, v.y * (std::numbers::sqrt3 / 2.0)};
}

double distance(Site u, Site v) { return std::sqrt(static_cast<double>(norm2(v - u))); }

bool sublattice_adjacent(Site u, Site v) {
  const int d = direction_of(u, v);
  return d >= 0 && d != 2 && d != 5;
}

void check_coordinates(Site v) {
  if (v.x < -kCoordinateLimit || v.x > kCoordinateLimit || v.y < -kCoordinateLimit || v.y > kCoordinateLimit)
    throw std::out_of_range("site coordinate outside +-2^30");
}

namespace {
// Hexagon corners of the origin cell, in thirds of lattice units.
constexpr std::array<std::array<int, 2>, 6> kCorners{{{1, 1}, {-1, 2}, {-2, 1}, {-1, -1}, {1, -2}, {2, -1}}};
}  // namespace

std::int64_t corner_norm9(Site v) {
  __int128 best = 0;
  for (const auto& c : kCorners) {
    const __int128 a = 3 * static_cast<__int128>(v.x) + c[0];
    const __int128 b = 3 * static_cast<__int128>(v.y) + c[1];
    best = std::max(best, a * a + a * b + b * b);
  }
  constexpr auto cap = static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
  return static_cast<std::int64_t>(std::min(best, cap));
}

bool hexagon_in_ball(Site v, Site c, double r) {
  if (!(r >= 0)) return false;
  const long double bound = 9.0L * r * r * (1.0L + 1e-12L);
  return static_cast<long double>(corner_norm9(v - c)) <= bound;
}

Grid::Grid(std::int32_t xmin, std::int32_t xmax, std::int32_t ymin, std::int32_t ymax)
    : xmin_(xmin), ymin_(ymin) {
  if (xmax < xmin || ymax < ymin) {
    width_ = height_ = 0;
    return;
  }
  const std::int64_t w = static_cast<std::int64_t>(xmax) - xmin + 1;
  const std::int64_t h = static_cast<std::int64_t>(ymax) - ymin + 1;
  if (w * h >= (std::int64_t{1} << 32)) throw std::length_error("grid exceeds 2^32 cells");
  width_ = static_cast<std::uint32_t>(w);
  height_ = static_cast<std::uint32_t>(h);
  for (int d = 0; d < 6; ++d) {
    const Site s = kDirections[static_cast<std::size_t>(d)];
    offset_[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(s.y) * w + s.x;
  }
}

std::size_t BitGrid::count() const {
  std::size_t n = 0;
  for (const auto w : words_) n += static_cast<std::size_t>(__builtin_popcountll(w));
  return n;
}

namespace {
constexpr std::int32_t kPad = 2;

Grid ball_grid(Site c, double r) {
  const auto half = static_cast<std::int32_t>(std::ceil(2.0 * std::max(r, 0.0) / std::numbers::sqrt3)) + kPad;
  return Grid(c.x - half, c.x + half, c.y - half, c.y + half);
}
}  // namespace

void LatticeRegion::finalize() { size_ = members_.count(); }

LatticeRegion LatticeRegion::ball(Site center, double r) {
  check_coordinates(center);
  if (!(r >= 0) || !std::isfinite(r)) throw std::invalid_argument("ball radius must be finite and non-negative");
  LatticeRegion out;
  out.shape_ = RegionShape::Ball;
  out.center_ = center;
  out.R_ = r;
  out.grid_ = ball_grid(center, r);
  out.members_ = BitGrid(out.grid_.cells());
  const long double bound = 9.0L * r * r * (1.0L + 1e-12L);
  for (std::int32_t y = out.grid_.ymin() + kPad; y <= out.grid_.ymax() - kPad; ++y)
    for (std::int32_t x = out.grid_.xmin() + kPad; x <= out.grid_.xmax() - kPad; ++x) {
      const Site v{x, y};
      if (static_cast<long double>(corner_norm9(v - center)) <= bound) out.members_.set(out.grid_.cell(v));
    }
  out.finalize();
  return out;
}

LatticeRegion LatticeRegion::annulus(Site center, double r, double R) {
  if (!(r >= 0) || !(R >= r) || !std::isfinite(R)) throw std::invalid_argument("annulus needs 0 <= r <= R");
  LatticeRegion out = ball(center, R);
  out.shape_ = RegionShape::Annulus;
  out.r_ = r;
  out.R_ = R;
  const long double bound = 9.0L * r * r * (1.0L + 1e-12L);
  out.for_each_cell([&](std::uint32_t c) {
    if (static_cast<long double>(corner_norm9(out.grid_.site(c) - center)) <= bound) out.members_.reset(c);
  });
  out.finalize();
  return out;
}

LatticeRegion LatticeRegion::rhombus(Site origin, std::int32_t n) {
  if (n < 1) throw std::invalid_argument("rhombus side must be positive");
  check_coordinates(origin);
  check_coordinates(origin + Site{n, n});
  LatticeRegion out;
  out.shape_ = RegionShape::Rhombus;
  out.center_ = origin;
  out.n_ = n;
  out.grid_ = Grid(origin.x - kPad, origin.x + n - 1 + kPad, origin.y - kPad, origin.y + n - 1 + kPad);
  out.members_ = BitGrid(out.grid_.cells());
  for (std::int32_t j = 0; j < n; ++j)
    for (std::int32_t i = 0; i < n; ++i) out.members_.set(out.grid_.cell(origin + Site{i, j}));
  out.finalize();
  return out;
}

LatticeRegion LatticeRegion::custom(std::span<const Site> sites) {
  LatticeRegion out;
  out.shape_ = RegionShape::Custom;
  if (sites.empty()) {
    out.grid_ = Grid(0, 0, 0, 0);
    out.members_ = BitGrid(out.grid_.cells());
    return out;
  }
  std::int32_t xmin = sites[0].x, xmax = sites[0].x, ymin = sites[0].y, ymax = sites[0].y;
  for (const Site s : sites) {
    check_coordinates(s);
    xmin = std::min(xmin, s.x);
    xmax = std::max(xmax, s.x);
    ymin = std::min(ymin, s.y);
    ymax = std::max(ymax, s.y);
  }
  out.grid_ = Grid(xmin - kPad, xmax + kPad, ymin - kPad, ymax + kPad);
  out.members_ = BitGrid(out.grid_.cells());
  for (const Site s : sites) out.members_.set(out.grid_.cell(s));
  out.finalize();
  return out;
}

std::vector<Site> LatticeRegion::sites() const {
  std::vector<Site> out;
  out.reserve(size_);
  for_each_cell([&](std::uint32_t c) { out.push_back(grid_.site(c)); });
  return out;
}

bool LatticeRegion::contains_with_margin(const LatticeRegion& other, int margin) const {
  if (shape_ == RegionShape::Ball && (other.shape_ == RegionShape::Ball) && center_ == other.center_)
    return R_ >= other.R_ + margin;
  bool ok = true;
  std::vector<Site> frontier;
  other.for_each_cell([&](std::uint32_t c) {
    if (!ok) return;
    const Site v = other.grid_.site(c);
    if (!contains(v)) ok = false;
    for (const Site w : neighbors(v))
      if (!other.contains(w)) frontier.push_back(w);
  });
  if (!ok) return false;
  std::sort(frontier.begin(), frontier.end());
  frontier.erase(std::unique(frontier.begin(), frontier.end()), frontier.end());
  std::unordered_set<std::uint64_t> seen;
  for (const Site v : frontier) seen.insert(pack(v));
  for (int layer = 0; layer < margin; ++layer) {
    std::vector<Site> next;
    for (const Site v : frontier) {
      if (!contains(v)) return false;
      if (layer + 1 < margin)
        for (const Site w : neighbors(v))
          if (!other.contains(w) && seen.insert(pack(w)).second) next.push_back(w);
    }
    frontier.swap(next);
  }
  return true;
}

bool operator==(const LatticeRegion& a, const LatticeRegion& b) {
  if (a.shape_ != b.shape_ || !(a.center_ == b.center_) || a.r_ != b.r_ || a.R_ != b.R_ || a.n_ != b.n_ ||
      a.size_ != b.size_)
    return false;
  bool same = true;
  a.for_each_cell([&](std::uint32_t c) {
    if (same && !b.contains(a.grid_.site(c))) same = false;
  });
  return same;
}

void rotate_to_min(std::vector<Site>& cycle) {
  if (cycle.empty()) return;
  std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
}

bool is_circuit(std::span<const Site> cycle) {
  if (cycle.size() < 3) return false;
  std::vector<Site> sorted(cycle.begin(), cycle.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
  for (std::size_t i = 0; i < cycle.size(); ++i)
    if (!adjacent(cycle[i], cycle[(i + 1) % cycle.size()])) return false;
  return true;
}

int winding_number(std::span<const Site> cycle, Point center) {
  if (cycle.empty()) return 0;
  double total = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const Point a = embed(cycle[i]);
    const Point b = embed(cycle[(i + 1) % cycle.size()]);
    const double ta = std::atan2(a.y - center.y, a.x - center.x);
    const double tb = std::atan2(b.y - center.y, b.x - center.x);
    double d = tb - ta;
    while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
    while (d < -std::numbers::pi) d += 2 * std::numbers::pi;
    total += d;
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

std::vector<Site> boundary(std::span<const Site> W, BoundaryKind kind, const LatticeRegion& frame) {
  const Grid& g = frame.grid();
  BitGrid inW(g.cells());
  for (const Site w : W) {
    if (!frame.contains(w)) throw std::invalid_argument("W is not contained in the frame");
    inW.set(g.cell(w));
  }
  // Every site within two steps of W must be a frame site.
  for (const Site w : W)
    for (const Site a : neighbors(w)) {
      if (!frame.contains(a)) throw std::invalid_argument("frame margin around W is too thin");
      for (const Site b : neighbors(a))
        if (!frame.contains(b)) throw std::invalid_argument("frame margin around W is too thin");
    }

  std::vector<Site> out;
  if (kind == BoundaryKind::Internal) {
    for (const Site w : W)
      for (const Site a : neighbors(w))
        if (!inW.test(g.cell(a))) {
          out.push_back(w);
          break;
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  BitGrid outer(g.cells());
  for (const Site w : W)
    for (const Site a : neighbors(w))
      if (!inW.test(g.cell(a)) && outer.claim(g.cell(a))) out.push_back(a);
  std::sort(out.begin(), out.end());
  if (kind == BoundaryKind::External) return out;

  // Exterior component of frame minus (W and its boundary), flooded from the frame rim.
  BitGrid ext(g.cells());
  std::vector<std::uint32_t> stack;
  frame.for_each_cell([&](std::uint32_t c) {
    if (inW.test(c) || outer.test(c)) return;
    for (int d = 0; d < 6; ++d)
      if (!frame.contains_cell(g.step(c, d))) {
        if (ext.claim(c)) stack.push_back(c);
        break;
      }
  });
  while (!stack.empty()) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    for (int d = 0; d < 6; ++d) {
      const std::uint32_t e = g.step(c, d);
      if (frame.contains_cell(e) && !inW.test(e) && !outer.test(e) && ext.claim(e)) stack.push_back(e);
    }
  }
  std::vector<Site> exterior_sites;
  for (const Site v : out)
    for (int d = 0; d < 6; ++d)
      if (ext.test(g.cell(neighbor(v, d)))) {
        exterior_sites.push_back(v);
        break;
      }
  if (exterior_sites.empty()) return exterior_sites;

  const Site start = exterior_sites.front();
  int d0 = 0;
  while (!ext.test(g.cell(neighbor(start, d0)))) ++d0;
  auto inside = [&](Site v) { return g.inside(v) && frame.contains(v) && !ext.test(g.cell(v)); };
  std::vector<Site> walk = trace_boundary(start, d0, inside, 64 * (exterior_sites.size() + 8));
  std::vector<Site> sorted = walk;
  std::sort(sorted.begin(), sorted.end());
  if (sorted == exterior_sites && is_circuit(walk)) {
    rotate_to_min(walk);
    return walk;
  }
  return exterior_sites;
}

}  // namespace fpplab
