#include <doctest.h>

#include <complex>
#include <cmath>
#include <numbers>
#include <random>

#include "fpplab/cle.hpp"

using namespace fpplab::cle;
namespace cle = fpplab::cle;

namespace {
const double kPi = std::numbers::pi;

// Direct transcription with complex arithmetic, no branch selection.
double lambda_complex(double l) {
  const std::complex<double> s = std::sqrt(std::complex<double>(1.0 / 9 + 4 * l / 3, 0));
  return std::log(1.0 / (2.0 * std::cos(kPi * s))).real();
}

// Golden-section maximization of l x - lambda(l) on a window: independent of lambda_prime.
double conjugate_golden(double x, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  auto f = [&](double l) { return l * x - lambda(l); };
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 300 && b - a > 1e-13; ++i) {
    if (f(c) > f(d)) b = d; else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return f((a + b) / 2);
}
}  // namespace

TEST_CASE("lambda closed form") {
  CHECK(std::abs(lambda(0)) < 1e-12);
  CHECK(std::abs(lambda(-1.0 / 12) + std::log(2.0)) < 1e-12);
  CHECK(lambda(kLambdaMax - 1e-6) > lambda(kLambdaMax - 1e-4));
  CHECK(lambda(kLambdaMax - 1e-6) > 5);
  CHECK_THROWS_AS(lambda(kLambdaMax), DomainError);
  for (double l = -3; l < 0.1; l += 0.0137) CHECK(std::abs(lambda(l) - lambda_complex(l)) < 1e-12);
  // Large negative arguments stay finite.
  CHECK(std::isfinite(lambda(-1e6)));
}

TEST_CASE("lambda derivative and convexity") {
  const double h = 1e-5;
  const double fd = (lambda(h) - lambda(-h)) / (2 * h);
  CHECK(std::abs(fd - 2 * std::sqrt(3.0) * kPi) < 1e-6);
  CHECK(std::abs(lambda_prime(0) - 2 * std::sqrt(3.0) * kPi) < 1e-12);
  for (double l = -5; l < 0.095; l += 0.01) {
    const double d = (lambda(l + 1e-6) - lambda(l - 1e-6)) / 2e-6;
    CHECK(std::abs(lambda_prime(l) - d) < 1e-5 * std::max(1.0, std::abs(d)));
    CHECK(lambda(l + 0.005) - 2 * lambda(l) + lambda(l - 0.005) > 0);
  }
  // Continuous across the branch point.
  CHECK(std::abs(lambda_prime(-1.0 / 12 + 1e-12) - lambda_prime(-1.0 / 12 - 1e-12)) < 1e-8);
}

TEST_CASE("conjugate") {
  CHECK(lambda_star(2 * std::sqrt(3.0) * kPi).value < 1e-12);
  CHECK_THROWS_AS(lambda_star(0), DomainError);
  for (int i = 1; i <= 100; ++i) {
    const double x = 0.2 * i;
    const Conjugate c = lambda_star(x);
    CHECK(c.value >= 0);
    CHECK_FALSE(c.truncated);
    CHECK(std::abs(c.value - conjugate_golden(x, -1e4, kLambdaMax - 1e-12)) < 1e-9);
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.05, 40);
  for (int i = 0; i < 200; ++i) {
    const double a = U(rng), b = U(rng);
    CHECK(lambda_star((a + b) / 2).value <= (lambda_star(a).value + lambda_star(b).value) / 2 + 1e-10);
  }
  // Biconjugate: sup_x { x l - Lambda*(x) } recovers lambda.
  for (double l = -2; l < 0.09; l += 0.1) {
    double best = -1e300;
    const double x0 = lambda_prime(l);
    for (int k = -200; k <= 200; ++k) {
      const double x = x0 * (1 + k * 1e-5);
      best = std::max(best, x * l - lambda_star(x, 1e-13).value);
    }
    CHECK(std::abs(best - lambda(l)) < 1e-8);
  }
}

TEST_CASE("gamma and nu1") {
  CHECK(cle::gamma(0) == 5.0 / 48);
  CHECK(std::abs(cle::gamma(typical_rate())) < 1e-8);
  CHECK(std::abs(typical_rate() - 0.0918881) < 1e-7);
  CHECK_THROWS_AS(cle::gamma(-0.1), DomainError);
  // Decreasing then increasing around the zero.
  double prev = cle::gamma(1e-4);
  bool turned = false;
  for (double nu = 2e-3; nu < 0.5; nu += 2e-3) {
    const double g = cle::gamma(nu);
    if (!turned && g > prev) turned = nu > typical_rate();
    if (turned) CHECK(g >= prev);
    else CHECK(g <= prev + 1e-12);
    prev = g;
  }
  CHECK(turned);
  // Approach to 5/48 with shrinking gap.
  double gap = 1;
  for (const double nu : {1e-1, 1e-2, 1e-3}) {
    const double d = std::abs(cle::gamma(nu) - 5.0 / 48);
    CHECK(d < gap);
    gap = d;
  }
  const double n1 = nu1();
  CHECK(std::abs(cle::gamma(n1) - 1) < 1e-8);
  CHECK(n1 > typical_rate());
  CHECK(std::abs(nu1(1e-12, 5e-11) - n1) < 1e-6);
}
