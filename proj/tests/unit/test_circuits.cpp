#include <doctest.h>

#include <map>
#include <set>

#include "fpplab/circuits.hpp"
#include "fpplab/passage.hpp"
#include "oracles.hpp"

using namespace fpplab;

namespace {
RegionPtr ball(double r) { return std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, r)); }

// All open except the outer boundary layer of B(a), which is closed.
Configuration ring_config(double R, double a) {
  Configuration cfg(ball(R), 0.5, true);
  for (const Site v : cfg.region().sites()) {
    if (hexagon_in_ball(v, kOrigin, a)) continue;
    for (const Site w : neighbors(v))
      if (hexagon_in_ball(w, kOrigin, a)) cfg.set_open(v, false);
  }
  return cfg;
}

bool strictly_inside(const std::vector<Site>& inner, const std::vector<Site>& outer) {
  const std::set<Site> o(outer.begin(), outer.end());
  for (const Site v : inner) {
    if (o.count(v)) return false;
    if (winding_number(outer, embed(v)) != 1) return false;
  }
  return true;
}
}  // namespace

TEST_CASE("trivial peels") {
  const Configuration blue(ball(20), 1.0, true);
  CHECK(rho(blue, 2, 16) == 0);
  const Configuration ring = ring_config(20, 7);
  const auto dec = peel(ring, 2, 16);
  CHECK(dec.count() == 1);
  CHECK(is_circuit(dec.circuits[0]));
  CHECK(peel(ring, 2, 16, PeelOrder::OutermostFirst).count() == 1);
  CHECK(annulus_crossing(ring, 2, 16).time == 1);
  CHECK_THROWS_AS(peel(blue, 5, 5), std::invalid_argument);
  CHECK_THROWS_AS(peel(blue, 2, 21), std::invalid_argument);
}

TEST_CASE("duality: circuit count equals the annulus crossing time") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const double p = 0.3 + 0.4 * static_cast<double>(seed % 5) / 4;
    const double r = 1 + static_cast<double>(seed % 3), R = 8 + static_cast<double>(seed % 11);
    const Configuration cfg = oracle::random_config(ball(R + 3), p, seed);
    const auto inner = peel(cfg, r, R);
    const auto outer = peel(cfg, r, R, PeelOrder::OutermostFirst);
    const auto cross = annulus_crossing(cfg, r, R);
    REQUIRE(inner.count() == static_cast<std::size_t>(cross.time));
    CHECK(outer.count() == inner.count());

    // Nested, closed, counterclockwise and disjoint.
    for (std::size_t i = 0; i < inner.count(); ++i) {
      const auto& c = inner.circuits[i];
      CHECK(is_circuit(c));
      CHECK(winding_number(c, embed(kOrigin)) == 1);
      for (const Site v : c) CHECK_FALSE(cfg.open(v));
      if (i + 1 < inner.count()) CHECK(strictly_inside(c, inner.circuits[i + 1]));
      if (i + 1 < outer.count()) CHECK(strictly_inside(outer.circuits[i + 1], outer.circuits[i]));
    }

    // Closed geodesic sites sit on distinct circuits, one each.
    std::map<Site, std::size_t> owner;
    for (std::size_t i = 0; i < inner.count(); ++i)
      for (const Site v : inner.circuits[i]) owner[v] = i;
    std::set<std::size_t> used;
    for (const Site v : cross.geodesic) {
      if (cfg.open(v)) continue;
      REQUIRE(owner.count(v));
      CHECK(used.insert(owner[v]).second);
    }
  }
}

TEST_CASE("open circuit is the negation of a closed arm") {
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const double r = 1 + static_cast<double>(seed % 4), R = r + 2 + static_cast<double>(seed % 9);
    const Configuration cfg = oracle::random_config(ball(R + 3), 0.5, 9000 + seed);
    const bool circuit = detect_event(cfg, {ArmEvent::OpenCircuit, kOrigin, r, R});
    const bool arm = detect_event(cfg, {ArmEvent::OneArmClosed, kOrigin, r, R});
    CHECK(circuit != arm);
  }
  const Configuration blue(ball(10), 1.0, true);
  CHECK(detect_event(blue, {ArmEvent::OneArmBlue, kOrigin, 1, 6}));
  CHECK(detect_event(blue, {ArmEvent::OpenCircuit, kOrigin, 1, 6}));
  CHECK_FALSE(detect_event(blue, {ArmEvent::OneArmClosed, kOrigin, 1, 6}));
}

TEST_CASE("one-arm reach matches single detections") {
  const std::vector<double> Rs{3, 5, 8, 13, 20};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Configuration cfg = oracle::random_config(ball(23), 0.5, 500 + seed);
    const auto events = one_arm_events(cfg, 1, Rs);
    for (std::size_t i = 0; i < Rs.size(); ++i)
      CHECK(events[i] == detect_event(cfg, {ArmEvent::OneArmBlue, kOrigin, 1, Rs[i]}));
  }
}

TEST_CASE("pivotal sites") {
  // A single open column joined through the origin: the origin is pivotal.
  Configuration cfg(ball(12), 0.5, false);
  for (int x = -4; x <= 4; ++x) cfg.set_open({x, 0}, true);
  CHECK(detect_event(cfg, {ArmEvent::FourArmPivotal, kOrigin, 1, 4}));
  cfg.set_open({0, 1}, true);
  cfg.set_open({-1, 1}, true);
  CHECK_FALSE(detect_event(cfg, {ArmEvent::FourArmPivotal, kOrigin, 1, 4}));
}

TEST_CASE("loop counts") {
  const Configuration blue(ball(20), 1.0, true);
  CHECK(loop_count(blue, 2, 16, true).count == 0);
  // One closed ring in a blue sea gives its outer loop and the loop of the blue disc inside.
  const Configuration ring = ring_config(20, 7);
  const auto lc = loop_count(ring, 2, 16, true);
  CHECK(lc.count == 2);
  const auto loops = surrounding_loops(ring, 16, true);
  REQUIRE(loops.size() == 2);
  CHECK_FALSE(loops[0].counterclockwise);
  CHECK(loops[1].counterclockwise);
}

TEST_CASE("color switching") {
  std::set<std::vector<bool>> images;
  std::size_t instances = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const double r = 1 + static_cast<double>(seed % 3), R = 10 + static_cast<double>(seed % 7);
    const Configuration cfg = oracle::random_config(ball(R + 3), 0.5, 77000 + seed);
    const auto dec = peel(cfg, r, R, PeelOrder::OutermostFirst);
    const Configuration sw = color_switch(cfg, dec);
    CHECK(loop_count(sw, r, R, true).count == dec.count());
    // Unchanged outside the first domain.
    if (dec.count() > 0) {
      const auto& c1 = dec.circuits[0];
      const std::set<Site> on(c1.begin(), c1.end());
      for (const Site v : cfg.region().sites())
        if (!on.count(v) && winding_number(c1, embed(v)) == 0) CHECK(sw.open(v) == cfg.open(v));
    }
    if (R == 10 && r == 1) {
      std::vector<bool> key;
      for (const Site v : cfg.region().sites())
        if (hexagon_in_ball(v, kOrigin, R)) key.push_back(sw.open(v));
      images.insert(key);
      ++instances;
    }
  }
  CHECK(images.size() == instances);
  const Configuration cfg = oracle::random_config(ball(13), 0.5, 1);
  CHECK_THROWS_AS(color_switch(cfg, peel(cfg, 1, 10)), std::invalid_argument);
}

TEST_CASE("nesting profile") {
  const Configuration blue(ball(66), 1.0, true);
  const auto prof = nesting_profile(blue, 1.0 / 8, 8, 1);
  REQUIRE(prof.size() == 1);
  CHECK(prof[0].indices.empty());
  // A ring inside the shell A(1, 8) and nothing else.
  const Configuration ring = ring_config(66, 4);
  const auto p2 = nesting_profile(ring, 1.0 / 8, 8, 1);
  CHECK(p2[0].indices == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(nesting_profile(blue, 1.0 / 8, 8, 2), std::invalid_argument);
}

TEST_CASE("lazy one-arm events agree with dense ones") {
  const auto region = std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, 40));
  const std::vector<double> Rs{4, 9, 16, 25, 38};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const double p = 0.45 + 0.05 * static_cast<double>(seed % 3);
    const double r = 1 + static_cast<double>(seed % 3);
    const CouplingField field(region, 400 + seed);
    CHECK(one_arm_events(field, p, r, Rs) == one_arm_events(threshold(field, p), r, Rs));
  }
}
