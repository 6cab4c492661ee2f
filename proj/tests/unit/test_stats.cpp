#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "fpplab/stats.hpp"

using namespace fpplab::stats;

TEST_CASE("summaries") {
  const std::vector<double> xs{1, 2, 3, 4, 10};
  const Summary s = summarize(xs);
  CHECK(s.mean == doctest::Approx(4.0));
  // sum of squared deviations 9+4+1+0+36 = 50
  CHECK(s.variance == doctest::Approx(12.5));
  CHECK(s.stderr_ == doctest::Approx(std::sqrt(12.5 / 5)));
  CHECK(summarize(std::vector<double>{3}).variance == 0);
  CHECK(variance_stderr(std::vector<double>(10, 2.0)) == 0);
}

TEST_CASE("line fits") {
  const std::vector<double> x{0, 1, 2, 3};
  const std::vector<double> y{1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(f.slope_stderr == doctest::Approx(0).scale(1));
  // Weights only matter off the line: an outlier with tiny weight is ignored.
  const std::vector<double> y2{1, 3, 5, 100};
  const std::vector<double> w{1, 1, 1, 1e-12};
  CHECK(fit_line(x, y2, w).slope == doctest::Approx(2).epsilon(1e-6));
  // Hand computation: x = 0,1,2, y = 0,2,1: slope 0.5, residuals -0.5, 1, -0.5, rss 1.5,
  // se = sqrt(1.5 / 1 / 2); t(1) quantile 12.7062.
  const std::vector<double> x3{0, 1, 2}, y3{0, 2, 1};
  const LineFit g = fit_line(x3, y3);
  CHECK(g.slope == doctest::Approx(0.5));
  CHECK(g.slope_stderr == doctest::Approx(std::sqrt(0.75)));
  CHECK(g.ci_high - g.slope == doctest::Approx(12.7062 * std::sqrt(0.75)).epsilon(1e-4));
  CHECK_THROWS_AS(fit_line(std::vector<double>{1, 1}, std::vector<double>{0, 1}), std::invalid_argument);
}

TEST_CASE("normal distance") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(3, 2);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = N(rng);
  CHECK(ks_normal(xs) < 0.05);
  // All mass on one point: distance 1/2.
  CHECK(ks_normal(std::vector<double>(100, 1.0)) == doctest::Approx(0.5));
  std::exponential_distribution<double> E(1);
  for (auto& x : xs) x = E(rng);
  CHECK(ks_normal(xs) > 0.05);
}

TEST_CASE("proportions") {
  const Proportion p = proportion(25, 100);
  CHECK(p.estimate == 0.25);
  CHECK(p.stderr_ == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
  CHECK_THROWS_AS(proportion(3, 2), std::invalid_argument);
}

TEST_CASE("log-linear binomial fit") {
  // Counts exactly on P = 2^{-x}: the maximum is the generating model.
  std::vector<double> x;
  std::vector<std::size_t> h;
  for (int i = 1; i <= 12; ++i) {
    x.push_back(i);
    h.push_back(std::size_t{1} << (20 - i));
  }
  const auto f = loglinear_binomial(x, h, std::size_t{1} << 20);
  CHECK(f.points == 12);
  CHECK(f.slope == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
  CHECK(f.intercept == doctest::Approx(0.0).scale(1).epsilon(1e-8));
  CHECK(f.ci_low < f.slope);
  CHECK(f.ci_high > f.slope);

  // Zero counts: compare with a brute-force maximization of the same likelihood.
  const std::vector<double> xs{1, 2, 3, 4, 5, 6};
  const std::vector<std::size_t> hs{500, 40, 3, 0, 0, 0};
  const double n = 1000;
  const auto ll = [&](double a, double b) {
    double l = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double P = std::exp(a + b * xs[i]);
      if (P >= 1) return -1e300;
      l += static_cast<double>(hs[i]) * std::log(P) + (n - static_cast<double>(hs[i])) * std::log(1 - P);
    }
    return l;
  };
  double ba = 0, bb = 0, best = -1e301, span = 4;
  double ca = 1, cb = -2;
  for (int round = 0; round < 40; ++round, span /= 2) {
    for (int i = -20; i <= 20; ++i)
      for (int j = -20; j <= 20; ++j) {
        const double a = ca + span * i / 20, b = cb + span * j / 20, v = ll(a, b);
        if (v > best) best = v, ba = a, bb = b;
      }
    ca = ba;
    cb = bb;
  }
  const auto g = loglinear_binomial(xs, hs, 1000);
  CHECK(g.slope == doctest::Approx(bb).epsilon(1e-6));
  CHECK(g.intercept == doctest::Approx(ba).epsilon(1e-6));
  CHECK(g.ci_high < 0);

  // A cliff after the first point has no finite maximum.
  const std::vector<std::size_t> cliff{500, 0, 0};
  CHECK(loglinear_binomial(std::vector<double>{1, 2, 3}, cliff, 1000).points == 0);
  CHECK_THROWS_AS(loglinear_binomial(std::vector<double>{1}, std::vector<std::size_t>{1}, 10), std::invalid_argument);
}
