#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <set>

#include "fpplab/lattice.hpp"
#include "oracles.hpp"

using namespace fpplab;

TEST_CASE("neighbors of the origin in counterclockwise order") {
  const auto nb = neighbors(kOrigin);
  const std::array<Site, 6> expected{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
  CHECK(nb == expected);
  for (int d = 0; d < 6; ++d) {
    const Point p = embed(nb[static_cast<std::size_t>(d)]);
    CHECK(std::atan2(p.y, p.x) == doctest::Approx(std::remainder(d * std::numbers::pi / 3, 2 * std::numbers::pi)));
    CHECK(std::hypot(p.x, p.y) == doctest::Approx(1.0));
  }
}

TEST_CASE("norm matches the embedding") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> u(-1000, 1000);
  for (int i = 0; i < 1000; ++i) {
    const Site v{u(rng), u(rng)};
    const Point p = embed(v);
    CHECK(static_cast<double>(norm2(v)) == doctest::Approx(p.x * p.x + p.y * p.y));
  }
}

TEST_CASE("small balls") {
  CHECK(LatticeRegion::ball(kOrigin, 0.5).empty());
  CHECK(LatticeRegion::ball(kOrigin, 1.0).sites() == std::vector<Site>{kOrigin});
  CHECK(LatticeRegion::ball(kOrigin, 1 / std::numbers::sqrt3 + 1e-9).sites() == std::vector<Site>{kOrigin});
  CHECK(LatticeRegion::ball(kOrigin, 1 / std::numbers::sqrt3 - 1e-6).empty());
  CHECK(LatticeRegion::ball(kOrigin, 0.0).empty());
  CHECK_THROWS_AS(LatticeRegion::ball(kOrigin, -1.0), std::invalid_argument);
}

TEST_CASE("ball membership agrees with floating point corners") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ur(0.3, 40.0);
  for (int t = 0; t < 40; ++t) {
    const double r = ur(rng);
    const auto ball = LatticeRegion::ball(kOrigin, r);
    for (int x = -50; x <= 50; ++x)
      for (int y = -50; y <= 50; ++y) {
        const Site v{x, y};
        // Skip sites whose farthest corner sits within rounding distance of r.
        const double far = std::sqrt(corner_norm9(v) / 9.0);
        if (std::abs(far - r) < 1e-7) continue;
        CHECK(ball.contains(v) == oracle::hexagon_in_disc(v, r));
      }
  }
}

TEST_CASE("annulus and rhombus shapes") {
  const auto a = LatticeRegion::annulus(kOrigin, 1.0, 2.0);
  CHECK_FALSE(a.contains(kOrigin));
  for (const Site v : neighbors(kOrigin)) CHECK(a.contains(v));
  const auto rh = LatticeRegion::rhombus({3, -2}, 4);
  CHECK(rh.size() == 16);
  CHECK(rh.contains({3, -2}));
  CHECK(rh.contains({6, 1}));
  CHECK_FALSE(rh.contains({7, 1}));
  const auto s = rh.sites();
  CHECK(std::is_sorted(s.begin(), s.end(), [](Site p, Site q) { return std::pair(p.y, p.x) < std::pair(q.y, q.x); }));
}

TEST_CASE("pack round trip and coordinate limits") {
  for (const Site v : {Site{0, 0}, Site{-kCoordinateLimit, kCoordinateLimit}, Site{12345, -678}})
    CHECK(unpack(pack(v)) == v);
  CHECK_THROWS_AS(check_coordinates({kCoordinateLimit + 1, 0}), std::out_of_range);
}

TEST_CASE("sublattice drops one bond pair") {
  int count = 0;
  for (const Site w : neighbors(kOrigin)) count += sublattice_adjacent(kOrigin, w);
  CHECK(count == 4);
  CHECK_FALSE(sublattice_adjacent(kOrigin, {-1, 1}));
  CHECK_FALSE(sublattice_adjacent(kOrigin, {1, -1}));
  CHECK_FALSE(sublattice_adjacent(kOrigin, {2, 0}));
}

TEST_CASE("boundaries of a single site") {
  const auto frame = LatticeRegion::ball(kOrigin, 6);
  const std::vector<Site> W{kOrigin};
  auto ext = boundary(W, BoundaryKind::External, frame);
  auto nb = neighbors(kOrigin);
  std::vector<Site> sorted(nb.begin(), nb.end());
  std::sort(sorted.begin(), sorted.end());
  CHECK(ext == sorted);
  CHECK(boundary(W, BoundaryKind::Internal, frame) == W);
  const auto circ = boundary(W, BoundaryKind::ExteriorSite, frame);
  CHECK(circ.size() == 6);
  CHECK(is_circuit(circ));
  CHECK(circ.front() == sorted.front());
  CHECK(winding_number(circ, embed(kOrigin)) == 1);
}

TEST_CASE("boundary rejects a thin frame") {
  const auto frame = LatticeRegion::ball(kOrigin, 1.5);
  const std::vector<Site> W{kOrigin};
  CHECK_THROWS_AS(boundary(W, BoundaryKind::External, frame), std::invalid_argument);
}

namespace {
// Delta-infinity by definition: sites of the outer boundary from which the frame rim is
// reachable without touching W or its boundary again.
std::vector<Site> slow_exterior(const std::vector<Site>& W, const LatticeRegion& frame) {
  std::set<Site> w(W.begin(), W.end()), dw;
  for (const Site v : W)
    for (const Site n : neighbors(v))
      if (!w.count(n)) dw.insert(n);
  std::vector<Site> out;
  for (const Site s : dw) {
    std::set<Site> seen{s};
    std::vector<Site> stack{s};
    bool escaped = false;
    while (!stack.empty() && !escaped) {
      const Site v = stack.back();
      stack.pop_back();
      for (const Site n : neighbors(v)) {
        if (!frame.contains(n)) {
          escaped = true;
          break;
        }
        if (w.count(n) || dw.count(n) || seen.count(n)) continue;
        seen.insert(n);
        stack.push_back(n);
      }
    }
    if (escaped) out.push_back(s);
  }
  return out;
}
}  // namespace

TEST_CASE("exterior boundary is a circuit and matches the slow definition") {
  std::mt19937 rng(3);
  const auto frame = LatticeRegion::ball(kOrigin, 30);
  for (int t = 0; t < 60; ++t) {
    // Random connected W grown from the origin.
    std::set<Site> w{kOrigin};
    std::vector<Site> list{kOrigin};
    const int target = 5 + static_cast<int>(rng() % 400);
    while (static_cast<int>(list.size()) < target) {
      const Site v = list[rng() % list.size()];
      const Site n = neighbor(v, static_cast<int>(rng() % 6));
      if (distance(kOrigin, n) > 20) continue;
      if (w.insert(n).second) list.push_back(n);
    }
    auto fast = boundary(list, BoundaryKind::ExteriorSite, frame);
    auto slow = slow_exterior(list, frame);
    CHECK(is_circuit(fast));
    CHECK(winding_number(fast, embed(kOrigin)) == 1);
    std::sort(fast.begin(), fast.end());
    CHECK(fast == slow);
  }
}

TEST_CASE("trace_boundary of a pair") {
  const std::set<Site> s{kOrigin, {0, 1}};
  auto walk = trace_boundary(kOrigin, 0, [&](Site v) { return s.count(v) > 0; });
  CHECK(walk == std::vector<Site>{kOrigin, {0, 1}});
}
