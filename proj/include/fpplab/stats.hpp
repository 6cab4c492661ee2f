#pragma once

#include <cstddef>
#include <span>

namespace fpplab::stats {

struct Summary {
  std::size_t samples = 0;
  double mean = 0;
  double variance = 0;  // unbiased
  double stderr_ = 0;   // sqrt(variance / samples)
};
Summary summarize(std::span<const double> xs);

/// Streaming mean and variance (Welford); merging is exact up to rounding and order-fixed.
class Accumulator {
 public:
  void add(double x);
  Summary summary() const;
  std::size_t count() const { return n_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

/// Standard error of the sample variance, from the fourth central moment.
double variance_stderr(std::span<const double> xs);

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_stderr = 0;
  double ci_low = 0;   // 95% Student t interval on the slope
  double ci_high = 0;
  std::size_t points = 0;
};
/// Least squares of y on x with weights w (1/stderr^2); the slope error is scaled by the
/// residual mean square. Empty weights mean unweighted.
LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

/// Maximum-likelihood fit of P(x) = exp(intercept + slope x) to binomial counts hits[i] out of
/// `trials`, zero counts included. Errors from the observed information, 95% normal interval.
/// points is 0 when the likelihood has no finite maximum.
LineFit loglinear_binomial(std::span<const double> x, std::span<const std::size_t> hits, std::size_t trials);

/// Kolmogorov distance between the standardized sample and N(0,1).
double ks_normal(std::span<const double> xs);

/// Binomial proportion and its standard error.
struct Proportion {
  double estimate = 0;
  double stderr_ = 0;
  std::size_t samples = 0;
};
Proportion proportion(std::size_t hits, std::size_t samples);

}  // namespace fpplab::stats
