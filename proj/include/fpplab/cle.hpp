#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace fpplab::cle {

inline constexpr double kLambdaMax = 5.0 / 48.0;

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// log E[exp(lambda Z)] for the log conformal radius increment of nested CLE6 loops:
/// -log 2 - log cos(pi sqrt(1/9 + 4 lambda / 3)), continued through cosh below -1/12.
double lambda(double l);
/// Derivative of lambda(), closed form.
double lambda_prime(double l);

struct Conjugate {
  double value = 0;
  double argmax = 0;
  bool truncated = false;  // the sup was not attained inside the search interval
};

/// Default search interval for the maximizer.
inline constexpr double kLambdaFloor = -1e6;
inline constexpr double kLambdaCeilGap = 1e-12;

/// Lambda*(x) = sup_l { l x - lambda(l) } by bisection on lambda'(l) = x.
Conjugate lambda_star(double x, double tolerance = 1e-10);

/// gamma(nu) = nu Lambda*(1/nu), and 5/48 at nu = 0.
double gamma(double nu, double tolerance = 1e-10);

/// The zero of gamma: 1/lambda'(0) = 1/(2 sqrt(3) pi).
double typical_rate();

/// The nu > typical_rate() with gamma(nu) = 1.
double nu1(double tolerance = 1e-12, double max_tolerance = 1e-10);

struct GammaRow {
  double nu;
  double gamma;
  double argmax;
};
std::vector<GammaRow> gamma_table(std::span<const double> nus);

}  // namespace fpplab::cle
