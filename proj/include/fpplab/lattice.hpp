#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpplab {

/// A vertex of the triangular lattice, embedded at x + y*exp(i*pi/3).
struct Site {
  std::int32_t x = 0;
  std::int32_t y = 0;

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
  constexpr Site operator+(Site o) const { return {x + o.x, y + o.y}; }
  constexpr Site operator-(Site o) const { return {x - o.x, y - o.y}; }
};

inline constexpr Site kOrigin{0, 0};

/// Coordinates are confined to |x|,|y| <= 2^30 so that a site packs into one word.
inline constexpr std::int32_t kCoordinateLimit = std::int32_t{1} << 30;

/// Unit steps in counterclockwise order, starting on the positive real axis.
inline constexpr std::array<Site, 6> kDirections{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};

constexpr int wrap_direction(int d) { return ((d % 6) + 6) % 6; }

constexpr Site neighbor(Site v, int d) { return v + kDirections[static_cast<std::size_t>(wrap_direction(d))]; }

constexpr std::array<Site, 6> neighbors(Site v) {
  std::array<Site, 6> out{};
  for (int d = 0; d < 6; ++d) out[static_cast<std::size_t>(d)] = neighbor(v, d);
  return out;
}

/// Index d with neighbor(from, d) == to, or -1.
constexpr int direction_of(Site from, Site to) {
  const Site s = to - from;
  for (int d = 0; d < 6; ++d)
    if (kDirections[static_cast<std::size_t>(d)] == s) return d;
  return -1;
}

constexpr bool adjacent(Site u, Site v) { return direction_of(u, v) >= 0; }

/// Squared Euclidean norm of the embedded point.
constexpr std::int64_t norm2(Site v) {
  const std::int64_t x = v.x, y = v.y;
  return x * x + x * y + y * y;
}

struct Point {
  double x = 0;
  double y = 0;
};

Point embed(Site v);
double distance(Site u, Site v);

/// Adjacency in the parallelogram sublattice, which drops the +-(-1,1) bonds.
bool sublattice_adjacent(Site u, Site v);

constexpr std::uint64_t pack(Site v) {
  const auto ux = static_cast<std::uint32_t>(static_cast<std::int64_t>(v.x) + kCoordinateLimit);
  const auto uy = static_cast<std::uint32_t>(static_cast<std::int64_t>(v.y) + kCoordinateLimit);
  return (std::uint64_t{ux} << 32) | uy;
}
constexpr Site unpack(std::uint64_t key) {
  return {static_cast<std::int32_t>(static_cast<std::int64_t>(key >> 32) - kCoordinateLimit),
          static_cast<std::int32_t>(static_cast<std::int64_t>(key & 0xffffffffu) - kCoordinateLimit)};
}
void check_coordinates(Site v);

/// Nine times the squared distance of the farthest hexagon corner of v from the origin.
std::int64_t corner_norm9(Site v);

/// True when every corner of the hexagon at v lies in the closed disc of radius r about c.
bool hexagon_in_ball(Site v, Site c, double r);

enum class BoundaryKind { External, Internal, ExteriorSite };

/// Rectangular cell box in lattice coordinates with row-major cell numbering.
class Grid {
 public:
  Grid() = default;
  Grid(std::int32_t xmin, std::int32_t xmax, std::int32_t ymin, std::int32_t ymax);

  std::int32_t xmin() const { return xmin_; }
  std::int32_t ymin() const { return ymin_; }
  std::int32_t xmax() const { return xmin_ + static_cast<std::int32_t>(width_) - 1; }
  std::int32_t ymax() const { return ymin_ + static_cast<std::int32_t>(height_) - 1; }
  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  std::size_t cells() const { return static_cast<std::size_t>(width_) * height_; }

  bool inside(Site v) const {
    return v.x >= xmin_ && v.y >= ymin_ && v.x - xmin_ < static_cast<std::int64_t>(width_) &&
           v.y - ymin_ < static_cast<std::int64_t>(height_);
  }
  std::uint32_t cell(Site v) const {
    return static_cast<std::uint32_t>(v.y - ymin_) * width_ + static_cast<std::uint32_t>(v.x - xmin_);
  }
  Site site(std::uint32_t c) const {
    return {xmin_ + static_cast<std::int32_t>(c % width_), ymin_ + static_cast<std::int32_t>(c / width_)};
  }
  /// Caller guarantees the neighbor is inside the grid.
  std::uint32_t step(std::uint32_t c, int d) const {
    return static_cast<std::uint32_t>(static_cast<std::int64_t>(c) + offset_[static_cast<std::size_t>(wrap_direction(d))]);
  }
  friend bool operator==(const Grid& a, const Grid& b) {
    return a.xmin_ == b.xmin_ && a.ymin_ == b.ymin_ && a.width_ == b.width_ && a.height_ == b.height_;
  }

 private:
  std::int32_t xmin_ = 0;
  std::int32_t ymin_ = 0;
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::array<std::int64_t, 6> offset_{};
};

/// Dense bit per grid cell.
class BitGrid {
 public:
  BitGrid() = default;
  explicit BitGrid(std::size_t cells) : words_((cells + 63) / 64, 0) {}

  bool test(std::uint32_t c) const { return (words_[c >> 6] >> (c & 63)) & 1u; }
  void set(std::uint32_t c) { words_[c >> 6] |= std::uint64_t{1} << (c & 63); }
  void reset(std::uint32_t c) { words_[c >> 6] &= ~(std::uint64_t{1} << (c & 63)); }
  void assign(std::uint32_t c, bool b) { b ? set(c) : reset(c); }
  /// Sets the bit and reports whether it was clear before.
  bool claim(std::uint32_t c) {
    std::uint64_t& w = words_[c >> 6];
    const std::uint64_t m = std::uint64_t{1} << (c & 63);
    if (w & m) return false;
    w |= m;
    return true;
  }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }
  std::size_t count() const;
  const std::vector<std::uint64_t>& words() const { return words_; }
  std::vector<std::uint64_t>& words() { return words_; }
  friend bool operator==(const BitGrid&, const BitGrid&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

enum class RegionShape : std::uint8_t { Ball = 1, Annulus = 2, Rhombus = 3, Custom = 4 };

/// A finite set of sites with its shape descriptor. The grid leaves a two-cell margin
/// around the sites so that neighbors of member cells can be addressed directly.
class LatticeRegion {
 public:
  static LatticeRegion ball(Site center, double r);
  static LatticeRegion annulus(Site center, double r, double R);
  /// Sites origin + (i, j) with 0 <= i, j < n.
  static LatticeRegion rhombus(Site origin, std::int32_t n);
  static LatticeRegion custom(std::span<const Site> sites);

  RegionShape shape() const { return shape_; }
  Site center() const { return center_; }
  double inner_radius() const { return r_; }
  double outer_radius() const { return R_; }
  std::int32_t side() const { return n_; }

  bool contains(Site v) const { return grid_.inside(v) && members_.test(grid_.cell(v)); }
  bool contains_cell(std::uint32_t c) const { return members_.test(c); }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const Grid& grid() const { return grid_; }
  const BitGrid& members() const { return members_; }

  /// Sites ordered by (y, x) ascending.
  std::vector<Site> sites() const;
  template <class F>
  void for_each_cell(F&& f) const {
    const auto& w = members_.words();
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::uint64_t bits = w[i];
      while (bits) {
        const int b = __builtin_ctzll(bits);
        bits &= bits - 1;
        f(static_cast<std::uint32_t>(i * 64 + static_cast<std::size_t>(b)));
      }
    }
  }

  /// True when every site within two steps of `other` lies in this region.
  bool contains_with_margin(const LatticeRegion& other, int margin = 2) const;

  friend bool operator==(const LatticeRegion& a, const LatticeRegion& b);

 private:
  LatticeRegion() = default;
  void finalize();

  RegionShape shape_ = RegionShape::Custom;
  Site center_{};
  double r_ = 0;
  double R_ = 0;
  std::int32_t n_ = 0;
  Grid grid_;
  BitGrid members_;
  std::size_t size_ = 0;
};

using RegionPtr = std::shared_ptr<const LatticeRegion>;

/// Boundaries of W inside frame. Sets come back sorted; ExteriorSite comes back as a
/// counterclockwise circuit starting at its smallest site when W is connected.
std::vector<Site> boundary(std::span<const Site> W, BoundaryKind kind, const LatticeRegion& frame);

/// Walks the boundary of the hexagon union {inside} counterclockwise from state (start, d),
/// where inside(start) holds and inside(neighbor(start, d)) fails. Returns the inside cells
/// met along the walk, each listed once per visit.
template <class Inside>
std::vector<Site> trace_boundary(Site start, int d, Inside&& inside, std::size_t max_steps = 1u << 30) {
  std::vector<Site> out{start};
  Site a = start;
  int dir = wrap_direction(d);
  for (std::size_t step = 0; step < max_steps; ++step) {
    const Site b = neighbor(a, dir + 1);
    if (inside(b)) {
      a = b;
      dir = wrap_direction(dir - 1);
      if (a == start && dir == wrap_direction(d)) break;
      if (!(a == out.back())) out.push_back(a);
    } else {
      dir = wrap_direction(dir + 1);
      if (a == start && dir == wrap_direction(d)) break;
    }
  }
  if (out.size() > 1 && out.back() == out.front()) out.pop_back();
  return out;
}

/// Rotates a cyclic sequence so it starts at its smallest element.
void rotate_to_min(std::vector<Site>& cycle);

/// True when consecutive entries (cyclically) are adjacent and all entries differ.
bool is_circuit(std::span<const Site> cycle);

/// Winding number of a closed lattice polygon around the point at `center`.
int winding_number(std::span<const Site> cycle, Point center);

/// Sites of the connected component of `allowed` containing some seed, breadth-first.
template <class Allowed>
std::vector<Site> flood(std::span<const Site> seeds, Allowed&& allowed);

}  // namespace fpplab

#include "fpplab/detail/flood.hpp"
