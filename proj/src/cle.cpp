#include "fpplab/cle.hpp"

#include <cmath>
#include <numbers>

namespace fpplab::cle {

namespace {
constexpr double kPi = std::numbers::pi;

// tan(pi s) / s and tanh(pi u) / u near zero.
double tan_ratio(double s) {
  if (std::abs(s) < 1e-6) return kPi * (1 + kPi * kPi * s * s / 3);
  return std::tan(kPi * s) / s;
}
double tanh_ratio(double u) {
  if (u < 1e-6) return kPi * (1 - kPi * kPi * u * u / 3);
  return std::tanh(kPi * u) / u;
}

void check(double l) {
  if (!(l < kLambdaMax)) throw DomainError("lambda must be below 5/48");
}
}  // namespace

double lambda(double l) {
  check(l);
  const double a = 1.0 / 9 + 4 * l / 3;
  if (a >= 0) return -std::log(2 * std::cos(kPi * std::sqrt(a)));
  const double t = kPi * std::sqrt(-a);
  // log cosh t without overflow.
  const double log_cosh = t + std::log1p(std::exp(-2 * t)) - std::numbers::ln2;
  return -std::numbers::ln2 - log_cosh;
}

double lambda_prime(double l) {
  check(l);
  const double a = 1.0 / 9 + 4 * l / 3;
  if (a >= 0) return 2 * kPi * tan_ratio(std::sqrt(a)) / 3;
  return 2 * kPi * tanh_ratio(std::sqrt(-a)) / 3;
}

Conjugate lambda_star(double x, double tolerance) {
  if (!(x > 0)) throw DomainError("Lambda* needs x > 0");
  double lo = kLambdaFloor, hi = kLambdaMax - kLambdaCeilGap;
  Conjugate out;
  if (lambda_prime(lo) >= x) {
    // Flat exit: the objective still increases to the left of the window.
    out.truncated = true;
    out.argmax = lo;
  } else if (lambda_prime(hi) <= x) {
    out.truncated = true;
    out.argmax = hi;
  } else {
    while (hi - lo > tolerance) {
      const double mid = lo + (hi - lo) / 2;
      if (mid == lo || mid == hi) break;
      (lambda_prime(mid) < x ? lo : hi) = mid;
    }
    out.argmax = lo + (hi - lo) / 2;
  }
  out.value = out.argmax * x - lambda(out.argmax);
  // The sup is at least the value at 0.
  if (out.value < 0) out.value = 0;
  return out;
}

double gamma(double nu, double tolerance) {
  if (nu < 0 || std::isnan(nu)) throw DomainError("gamma needs nu >= 0");
  if (nu == 0) return kLambdaMax;
  return nu * lambda_star(1 / nu, tolerance).value;
}

double typical_rate() { return 1 / (2 * std::sqrt(3.0) * kPi); }

double nu1(double tolerance, double max_tolerance) {
  double lo = typical_rate(), hi = 2 * lo;
  while (gamma(hi, max_tolerance) < 1) {
    lo = hi;
    hi *= 2;
    if (hi > 1e6) throw std::runtime_error("nu1: no bracket");
  }
  if (gamma(lo, max_tolerance) > 1) throw std::runtime_error("nu1: no bracket");
  while (hi - lo > tolerance) {
    const double mid = lo + (hi - lo) / 2;
    if (mid == lo || mid == hi) break;
    (gamma(mid, max_tolerance) < 1 ? lo : hi) = mid;
  }
  return lo + (hi - lo) / 2;
}

std::vector<GammaRow> gamma_table(std::span<const double> nus) {
  std::vector<GammaRow> out;
  for (const double nu : nus) {
    if (nu == 0) {
      out.push_back({0, kLambdaMax, kLambdaMax});
      continue;
    }
    const Conjugate c = lambda_star(1 / nu);
    out.push_back({nu, nu * c.value, c.argmax});
  }
  return out;
}

}  // namespace fpplab::cle
