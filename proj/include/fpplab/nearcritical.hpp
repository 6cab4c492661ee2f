#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "fpplab/config.hpp"

namespace fpplab {

/// Open left-right crossing of the rhombus {0 <= x, y < n} (sides along 1 and e^{i pi/3}).
bool has_crossing(const Configuration& cfg);

struct CrossingEstimate {
  double p = 0;
  std::int32_t n = 0;
  std::size_t samples = 0;
  double estimate = 0;
  double stderr_ = 0;
};

/// Sample i uses the field with seed derive_seed(seed, i) on the rhombus anchored at 0.
CrossingEstimate crossing_probability(double p, std::int32_t n, std::size_t samples, std::uint64_t seed);

/// Per-sample crossing thresholds for rhombi, shared by every p inside a window. The threshold
/// of a sample is the least field value (in bits) at which it crosses; values outside the
/// window are clamped, which is exact for queries inside it.
class CrossingStudy {
 public:
  CrossingStudy(std::uint64_t seed, std::size_t samples, double p_low, double p_high);

  CrossingEstimate estimate(double p, std::int32_t n);
  const std::vector<std::uint64_t>& thresholds(std::int32_t n);
  std::size_t samples() const { return samples_; }

 private:
  std::uint64_t seed_;
  std::size_t samples_;
  std::uint64_t low_, high_;
  double p_low_, p_high_;
  std::map<std::int32_t, std::vector<std::uint64_t>> cache_;
};

struct CorrelationBudget {
  std::size_t samples = 2000;
  std::int32_t n_min = 2;
  std::int32_t n_max = 1024;
  int steps_per_octave = 8;
};

/// Geometric grid n_k = round(n_min 2^{k / steps}), duplicates removed, up to n_max.
std::vector<std::int32_t> size_grid(const CorrelationBudget& budget);

struct CorrelationLengthEstimate {
  double p = 0;
  double epsilon = 0;
  std::int32_t L_hat = -1;  // -1 when the grid top was reached without meeting 1 - epsilon
  bool bracketed = false;
  std::size_t samples = 0;
  std::vector<CrossingEstimate> curve;  // points visited, increasing n
};

/// Smallest grid n with crossing estimate >= 1 - epsilon (<= epsilon when p < 1/2), by
/// bisection over the grid index.
CorrelationLengthEstimate correlation_length(double p, double epsilon, std::uint64_t seed,
                                             const CorrelationBudget& budget = {});
CorrelationLengthEstimate correlation_length(CrossingStudy& study, double p, double epsilon,
                                             const CorrelationBudget& budget);
/// Several p on one study: identical to separate calls, computed once.
std::vector<CorrelationLengthEstimate> correlation_lengths(std::span<const double> ps, double epsilon,
                                                           std::uint64_t seed, const CorrelationBudget& budget = {});

/// Passage time from 0 to the open cluster carrying the innermost open circuit around
/// B(4L) inside B(8L), on the field thresholded at p. Empty when no such circuit exists.
std::optional<std::int64_t> time_to_infinite_cluster(const CouplingField& field, double p, std::int32_t L_hat);

struct CoupledPoint {
  double p = 0;
  std::int32_t L_hat = 0;
  std::optional<std::int64_t> time_p;  // T_p(0, proxy)
  std::int64_t time_half = 0;          // T_{1/2}(0, complement of B(L_hat))
};
/// Both quantities for every p from one field on a ball of radius frame_factor * max L_hat.
std::vector<CoupledPoint> coupled_sample(const CouplingField& field, std::span<const double> ps,
                                         std::span<const std::int32_t> L_hats);

struct CoupledSummary {
  double p = 0;
  std::int32_t L_hat = 0;
  std::size_t samples = 0;
  std::size_t excluded = 0;  // proxy absent
  double mean_time_p = 0;
  double mean_time_half = 0;
  double mean_abs_gap = 0;
  double gap_stderr = 0;  // of mean_abs_gap
  double variance_gap = 0;  // Var T_p - Var T_half over the kept samples
};
struct CoupledSweepResult {
  std::uint64_t seed = 0;
  std::vector<CoupledSummary> points;
};
inline constexpr double kFrameFactor = 8;
/// Ball of radius kFrameFactor * max L_hat + 3, the frame of every coupled sample.
RegionPtr coupled_region(std::span<const std::int32_t> L_hats);
/// Aggregation in sample order; proxy-less samples are counted as excluded.
CoupledSweepResult summarize_coupled(std::uint64_t seed, std::span<const double> ps, std::span<const std::int32_t> L_hats,
                                     const std::vector<std::vector<CoupledPoint>>& per_sample);
CoupledSweepResult coupled_sweep(std::uint64_t seed, std::span<const double> ps, std::span<const std::int32_t> L_hats,
                                 std::size_t samples);

}  // namespace fpplab
