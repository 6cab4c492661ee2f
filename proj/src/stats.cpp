#include "fpplab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fpplab::stats {

void Accumulator::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

Summary Accumulator::summary() const {
  Summary s;
  s.samples = n_;
  s.mean = mean_;
  s.variance = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0;
  s.stderr_ = n_ > 0 ? std::sqrt(s.variance / static_cast<double>(n_)) : 0;
  return s;
}

Summary summarize(std::span<const double> xs) {
  Accumulator acc;
  for (const double x : xs) acc.add(x);
  return acc.summary();
}

double variance_stderr(std::span<const double> xs) {
  const Summary s = summarize(xs);
  if (s.samples < 2) return 0;
  double m4 = 0;
  for (const double x : xs) m4 += std::pow(x - s.mean, 4);
  const auto n = static_cast<double>(s.samples);
  m4 /= n;
  const double v = s.variance;
  return std::sqrt(std::max(0.0, (m4 - v * v * (n - 3) / (n - 1)) / n));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  const std::size_t k = x.size();
  if (y.size() != k || (!w.empty() && w.size() != k)) throw std::invalid_argument("fit_line: length mismatch");
  if (k < 2) throw std::invalid_argument("fit_line: need two points");
  auto weight = [&](std::size_t i) { return w.empty() ? 1.0 : w[i]; };
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(weight(i) > 0)) throw std::invalid_argument("fit_line: weights must be positive");
    sw += weight(i);
    sx += weight(i) * x[i];
    sy += weight(i) * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += weight(i) * (x[i] - mx) * (x[i] - mx);
    sxy += weight(i) * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("fit_line: x values are all equal");
  LineFit f;
  f.points = k;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (k > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += weight(i) * r * r;
    }
    f.slope_stderr = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
    const boost::math::students_t t(static_cast<double>(k - 2));
    const double q = boost::math::quantile(boost::math::complement(t, 0.025));
    f.ci_low = f.slope - q * f.slope_stderr;
    f.ci_high = f.slope + q * f.slope_stderr;
  } else {
    f.ci_low = f.ci_high = f.slope;
  }
  return f;
}

LineFit loglinear_binomial(std::span<const double> x, std::span<const std::size_t> hits, std::size_t trials) {
  const std::size_t k = x.size();
  if (hits.size() != k) throw std::invalid_argument("loglinear_binomial: length mismatch");
  if (k < 2 || trials == 0) throw std::invalid_argument("loglinear_binomial: need two points and some trials");
  const double n = static_cast<double>(trials);
  const auto loglik = [&](double a, double b) -> double {
    double l = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double eta = a + b * x[i];
      if (!(eta < 0)) return -INFINITY;
      const double h = static_cast<double>(hits[i]);
      if (h > 0) l += h * eta;
      if (h < n) l += (n - h) * std::log1p(-std::exp(eta));
    }
    return l;
  };
  // Start from the two extreme points with hits, flattened if needed.
  std::size_t lo = k, hi = k;
  for (std::size_t i = 0; i < k; ++i)
    if (hits[i] > 0) (lo == k ? lo : hi) = i;
  LineFit fit;
  if (lo == k) return fit;
  double b = hi == k ? -1.0 : (std::log(static_cast<double>(hits[hi])) - std::log(static_cast<double>(hits[lo]))) / (x[hi] - x[lo]);
  double a = std::log(std::min(static_cast<double>(hits[lo]), n - 0.5) / n) - b * x[lo];
  for (std::size_t i = 0; i < k; ++i) a = std::min(a, -1e-3 - b * x[i]);
  double l = loglik(a, b);
  double Iaa = 0, Iab = 0, Ibb = 0;
  for (int it = 0; it < 200; ++it) {
    double ga = 0, gb = 0;
    Iaa = Iab = Ibb = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const double P = std::exp(a + b * x[i]), h = static_cast<double>(hits[i]);
      const double g = h - (n - h) * P / (1 - P);
      const double c = (n - h) * P / ((1 - P) * (1 - P));
      ga += g;
      gb += g * x[i];
      Iaa += c;
      Iab += c * x[i];
      Ibb += c * x[i] * x[i];
    }
    const double det = Iaa * Ibb - Iab * Iab;
    if (!(det > 0)) return fit;
    const double da = (Ibb * ga - Iab * gb) / det, db = (Iaa * gb - Iab * ga) / det;
    double t = 1, next = -INFINITY;
    for (; t > 1e-12; t /= 2)
      if ((next = loglik(a + t * da, b + t * db)) >= l) break;
    if (t <= 1e-12) break;
    a += t * da;
    b += t * db;
    const bool done = std::abs(t * db) < 1e-12 * (1 + std::abs(b)) && next - l < 1e-12 * (1 + std::abs(l));
    l = next;
    if (done) break;
  }
  const double det = Iaa * Ibb - Iab * Iab;
  // A runaway slope means the counts fit no finite log-linear model.
  if (!(det > 0) || std::abs(b) > 1e6) return fit;
  fit.slope = b;
  fit.intercept = a;
  fit.slope_stderr = std::sqrt(Iaa / det);
  fit.ci_low = b - 1.959963984540054 * fit.slope_stderr;
  fit.ci_high = b + 1.959963984540054 * fit.slope_stderr;
  fit.points = k;
  return fit;
}

double ks_normal(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("ks_normal: no samples");
  const Summary s = summarize(xs);
  const auto n = static_cast<double>(xs.size());
  std::vector<double> z(xs.begin(), xs.end());
  std::sort(z.begin(), z.end());
  const double sd = std::sqrt(s.variance);
  double d = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    // A degenerate sample sits on one point: all mass at the mean.
    const double u = sd > 0 ? (z[i] - s.mean) / sd : 0;
    const double phi = 0.5 * std::erfc(-u / std::sqrt(2.0));
    d = std::max({d, static_cast<double>(i + 1) / n - phi, phi - static_cast<double>(i) / n});
  }
  return d;
}

Proportion proportion(std::size_t hits, std::size_t samples) {
  if (samples == 0 || hits > samples) throw std::invalid_argument("proportion: bad counts");
  Proportion p;
  p.samples = samples;
  p.estimate = static_cast<double>(hits) / static_cast<double>(samples);
  p.stderr_ = std::sqrt(p.estimate * (1 - p.estimate) / static_cast<double>(samples));
  return p;
}

}  // namespace fpplab::stats
