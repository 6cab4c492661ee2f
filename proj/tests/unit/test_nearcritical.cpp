#include <doctest.h>

#include <cmath>
#include <queue>
#include <set>

#include "fpplab/nearcritical.hpp"
#include "fpplab/passage.hpp"

using namespace fpplab;

namespace {
RegionPtr rhombus(std::int32_t n) { return std::make_shared<LatticeRegion>(LatticeRegion::rhombus(kOrigin, n)); }

// Breadth-first search on a std::set, colors given by a predicate; from side x = 0 to x = n-1
// (horizontal) or from y = 0 to y = n-1.
template <class Color>
bool crosses(std::int32_t n, Color&& color, bool horizontal) {
  std::set<Site> seen;
  std::queue<Site> q;
  for (std::int32_t k = 0; k < n; ++k) {
    const Site s = horizontal ? Site{0, k} : Site{k, 0};
    if (color(s)) {
      seen.insert(s);
      q.push(s);
    }
  }
  while (!q.empty()) {
    const Site v = q.front();
    q.pop();
    if ((horizontal ? v.x : v.y) == n - 1) return true;
    for (const Site w : neighbors(v))
      if (w.x >= 0 && w.y >= 0 && w.x < n && w.y < n && color(w) && seen.insert(w).second) q.push(w);
  }
  return false;
}
}  // namespace

TEST_CASE("rhombus crossings against a set-based search, and self-duality") {
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const std::int32_t n = 2 + static_cast<std::int32_t>(seed % 19);
    const Configuration cfg = sample_configuration(rhombus(n), 0.3 + 0.1 * static_cast<double>(seed % 5), seed);
    const bool blue = crosses(n, [&](Site v) { return cfg.open(v); }, true);
    CHECK(has_crossing(cfg) == blue);
    // Exactly one of: blue left-right, yellow top-bottom.
    CHECK(blue != crosses(n, [&](Site v) { return !cfg.open(v); }, false));
  }
  CHECK(has_crossing(Configuration(rhombus(9), 1.0, true)));
  CHECK_FALSE(has_crossing(Configuration(rhombus(9), 0.0, false)));
}

TEST_CASE("crossing probability") {
  CHECK(crossing_probability(1.0, 12, 50, 1).estimate == 1.0);
  CHECK(crossing_probability(0.0, 12, 50, 1).estimate == 0.0);
  // Same fields as a direct count.
  for (const double p : {0.45, 0.5, 0.62}) {
    const std::int32_t n = 11;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 300; ++i) {
      const CouplingField field(rhombus(n), derive_seed(77, i));
      hits += crosses(n, [&](Site v) { return field.bits(v) <= probability_threshold(p); }, true);
    }
    const auto e = crossing_probability(p, n, 300, 77);
    CHECK(e.estimate == static_cast<double>(hits) / 300);
    CHECK(e.stderr_ == doctest::Approx(std::sqrt(e.estimate * (1 - e.estimate) / 300)));
  }
  const auto half = crossing_probability(0.5, 16, 4000, 5);
  CHECK(std::abs(half.estimate - 0.5) < 3 * half.stderr_);
}

TEST_CASE("threshold study matches single-p estimates") {
  CrossingStudy study(9, 400, 0.5, 0.7);
  double prev = 0;
  for (const double p : {0.5, 0.55, 0.6, 0.65, 0.7}) {
    for (const std::int32_t n : {3, 8, 20}) {
      const auto a = study.estimate(p, n), b = crossing_probability(p, n, 400, 9);
      CHECK(a.estimate == b.estimate);
    }
    const double e = study.estimate(p, 20).estimate;
    CHECK(e >= prev);
    prev = e;
  }
  CHECK_THROWS_AS(study.estimate(0.45, 8), std::invalid_argument);
}

TEST_CASE("correlation length") {
  CHECK(size_grid({100, 4, 16, 2}) == std::vector<std::int32_t>{4, 6, 8, 11, 16});
  CorrelationBudget budget;
  budget.samples = 400;
  budget.n_max = 128;
  const auto far = correlation_length(0.9, 0.02, 3, budget);
  CHECK(far.bracketed);
  CHECK(far.L_hat <= 8);
  CHECK_THROWS_AS(correlation_length(0.5, 0.02, 3, budget), std::invalid_argument);
  const std::vector<double> ps{0.6, 0.65, 0.7, 0.8};
  const auto all = correlation_lengths(ps, 0.02, 4, budget);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto one = correlation_length(ps[i], 0.02, 4, budget);
    CHECK(one.L_hat == all[i].L_hat);
    CHECK(all[i].bracketed);
    if (i > 0) CHECK(all[i].L_hat <= all[i - 1].L_hat);
    // The reported length meets the level; the grid point below does not.
    const auto grid = size_grid(budget);
    for (const auto& pt : all[i].curve) {
      if (pt.n == all[i].L_hat) CHECK(pt.estimate >= 0.98);
      if (pt.n < all[i].L_hat) CHECK(pt.estimate < 0.98);
    }
  }
  // Below 1/2 the level is P <= epsilon, and the length is close to that of 1 - p.
  const auto sub = correlation_length(0.3, 0.02, 5, budget);
  REQUIRE(sub.bracketed);
  for (const auto& pt : sub.curve) CHECK((pt.estimate <= 0.02) == (pt.n >= sub.L_hat));
  const auto super = correlation_length(0.7, 0.02, 6, budget);
  CHECK(std::abs(std::log(static_cast<double>(sub.L_hat) / super.L_hat)) <= std::log(2.0));
  // Too small a grid leaves the estimate unbracketed.
  budget.n_max = 4;
  CHECK_FALSE(correlation_length(0.55, 0.02, 3, budget).bracketed);
}

TEST_CASE("time to the infinite-cluster proxy") {
  const auto region = std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, 45));
  const CouplingField one(region, 1);
  CHECK(time_to_infinite_cluster(one, 1.0, 5) == 0);
  CHECK_THROWS_AS(time_to_infinite_cluster(one, 0.5, 5), std::invalid_argument);
  CHECK_THROWS_AS(time_to_infinite_cluster(one, 0.7, 6), std::invalid_argument);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const CouplingField field(region, seed);
    std::optional<std::int64_t> prev;
    for (const double p : {0.55, 0.6, 0.7, 0.8, 0.95}) {
      const auto t = time_to_infinite_cluster(field, p, 5);
      if (prev && t) CHECK(*t <= *prev);
      if (t) prev = t;
    }
  }
}

TEST_CASE("coupled sweep") {
  const std::vector<double> ps{0.8, 0.9};
  const std::vector<std::int32_t> L{3, 2};
  const auto a = coupled_sweep(12, ps, L, 40);
  const auto b = coupled_sweep(12, ps, L, 40);
  REQUIRE(a.points.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.points[i].mean_abs_gap == b.points[i].mean_abs_gap);
    CHECK(a.points[i].samples + a.points[i].excluded == 40);
  }
  CHECK(a.points[1].mean_time_p <= 3);
  CHECK(a.points[1].mean_time_half <= 3);
  // One field carries every p.
  const auto region = std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, 27));
  const CouplingField field(region, derive_seed(12, 0));
  const auto pts = coupled_sample(field, ps, L);
  CHECK(pts[0].time_half == exit_time(threshold(field, 0.5), 3, false).time);
}
