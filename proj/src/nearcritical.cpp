#include "fpplab/nearcritical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fpplab/circuits.hpp"
#include "fpplab/passage.hpp"
#include "fpplab/stats.hpp"

namespace fpplab {

namespace {

constexpr std::uint64_t kNever = ~std::uint64_t{0};

struct Dsu {
  std::vector<std::uint32_t> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

// Least bits value at which the n x n rhombus of the field crosses from left to right,
// clamped to `low` below and kNever above `high`.
std::uint64_t rhombus_threshold(std::uint64_t field_seed, std::int32_t n, std::uint64_t low, std::uint64_t high) {
  const SiteHash hash(field_seed);
  const auto N = static_cast<std::uint32_t>(n);
  const std::uint32_t left = N * N, right = left + 1;
  Dsu dsu(N * N + 2);
  std::vector<std::uint64_t> bits(N * N);
  std::vector<std::uint8_t> open(N * N, 0);
  std::vector<std::uint32_t> pending;
  auto open_site = [&](std::uint32_t k) {
    open[k] = 1;
    const auto x = static_cast<std::int32_t>(k % N), y = static_cast<std::int32_t>(k / N);
    if (x == 0) dsu.unite(k, left);
    if (x == n - 1) dsu.unite(k, right);
    for (const Site d : kDirections) {
      const std::int32_t a = x + d.x, b = y + d.y;
      if (a < 0 || b < 0 || a >= n || b >= n) continue;
      const auto j = static_cast<std::uint32_t>(b) * N + static_cast<std::uint32_t>(a);
      if (open[j]) dsu.unite(k, j);
    }
  };
  for (std::uint32_t k = 0; k < N * N; ++k) {
    bits[k] = hash(Site{static_cast<std::int32_t>(k % N), static_cast<std::int32_t>(k / N)});
    if (bits[k] <= low) open_site(k);
    else if (bits[k] <= high) pending.push_back(k);
  }
  if (dsu.find(left) == dsu.find(right)) return low;
  std::sort(pending.begin(), pending.end(), [&](std::uint32_t a, std::uint32_t b) { return bits[a] < bits[b]; });
  for (const std::uint32_t k : pending) {
    open_site(k);
    if (dsu.find(left) == dsu.find(right)) return bits[k];
  }
  return kNever;
}

void check_p(double p) {
  if (!(p >= 0 && p <= 1)) throw std::invalid_argument("p outside [0, 1]");
}

}  // namespace

bool has_crossing(const Configuration& cfg) {
  const LatticeRegion& region = cfg.region();
  if (region.shape() != RegionShape::Rhombus) throw std::invalid_argument("crossings are defined on rhombi");
  const Site o = region.center();
  const std::int32_t n = region.side();
  std::vector<Site> seeds;
  for (std::int32_t y = 0; y < n; ++y)
    if (cfg.open(o + Site{0, y})) seeds.push_back(o + Site{0, y});
  const auto reached = flood(seeds, [&](Site v) { return region.contains(v) && cfg.open(v); });
  return std::any_of(reached.begin(), reached.end(), [&](Site v) { return v.x == o.x + n - 1; });
}

CrossingEstimate crossing_probability(double p, std::int32_t n, std::size_t samples, std::uint64_t seed) {
  CrossingStudy study(seed, samples, p, p);
  return study.estimate(p, n);
}

CrossingStudy::CrossingStudy(std::uint64_t seed, std::size_t samples, double p_low, double p_high)
    : seed_(seed), samples_(samples), p_low_(p_low), p_high_(p_high) {
  check_p(p_low);
  check_p(p_high);
  if (p_low > p_high) throw std::invalid_argument("empty p window");
  if (samples == 0) throw std::invalid_argument("need at least one sample");
  low_ = probability_threshold(p_low);
  high_ = probability_threshold(p_high);
}

const std::vector<std::uint64_t>& CrossingStudy::thresholds(std::int32_t n) {
  if (n < 2) throw std::invalid_argument("rhombus side must be at least 2");
  auto it = cache_.find(n);
  if (it != cache_.end()) return it->second;
  std::vector<std::uint64_t> t(samples_);
  for (std::size_t i = 0; i < samples_; ++i) t[i] = rhombus_threshold(derive_seed(seed_, i), n, low_, high_);
  return cache_.emplace(n, std::move(t)).first->second;
}

CrossingEstimate CrossingStudy::estimate(double p, std::int32_t n) {
  check_p(p);
  if (p < p_low_ || p > p_high_) throw std::invalid_argument("p outside the study window");
  const std::uint64_t t = probability_threshold(p);
  const auto& th = thresholds(n);
  // kNever exceeds every t below 2^64 - 1; at p = 1 every rhombus crosses.
  const auto hits =
      static_cast<std::size_t>(std::count_if(th.begin(), th.end(), [&](std::uint64_t x) { return x <= t; }));
  const stats::Proportion pr = stats::proportion(hits, samples_);
  return {p, n, samples_, pr.estimate, pr.stderr_};
}

std::vector<std::int32_t> size_grid(const CorrelationBudget& budget) {
  if (budget.n_min < 2 || budget.n_max < budget.n_min || budget.steps_per_octave < 1)
    throw std::invalid_argument("bad size grid");
  std::vector<std::int32_t> out;
  for (int k = 0;; ++k) {
    const double v = budget.n_min * std::exp2(static_cast<double>(k) / budget.steps_per_octave);
    const auto n = static_cast<std::int32_t>(std::lround(v));
    if (n > budget.n_max) break;
    if (out.empty() || n != out.back()) out.push_back(n);
  }
  return out;
}

CorrelationLengthEstimate correlation_length(CrossingStudy& study, double p, double epsilon,
                                             const CorrelationBudget& budget) {
  if (p == 0.5) throw std::invalid_argument("the correlation length is infinite at p = 1/2");
  if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon outside (0, 1)");
  const std::vector<std::int32_t> grid = size_grid(budget);
  CorrelationLengthEstimate out;
  out.p = p;
  out.epsilon = epsilon;
  out.samples = study.samples();
  std::map<std::size_t, CrossingEstimate> seen;
  auto meets = [&](std::size_t k) {
    auto it = seen.find(k);
    if (it == seen.end()) it = seen.emplace(k, study.estimate(p, grid[k])).first;
    // Below 1/2 the rhombus is crossed by closed paths the other way: P <= epsilon.
    return p > 0.5 ? it->second.estimate >= 1 - epsilon : it->second.estimate <= epsilon;
  };
  // Bracket by doubling the index, then bisect.
  std::size_t lo = 0, hi = 0;
  bool found = meets(0);
  if (!found) {
    std::size_t step = 1;
    while (!found) {
      lo = hi;
      if (hi == grid.size() - 1) break;
      hi = std::min(grid.size() - 1, hi + step);
      step *= 2;
      found = meets(hi);
    }
    if (found) {
      while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (meets(mid) ? hi : lo) = mid;
      }
    }
  }
  out.bracketed = found;
  out.L_hat = found ? grid[hi] : -1;
  for (const auto& [k, e] : seen) out.curve.push_back(e);
  return out;
}

CorrelationLengthEstimate correlation_length(double p, double epsilon, std::uint64_t seed,
                                             const CorrelationBudget& budget) {
  check_p(p);
  CrossingStudy study(seed, budget.samples, p, p);
  return correlation_length(study, p, epsilon, budget);
}

std::vector<CorrelationLengthEstimate> correlation_lengths(std::span<const double> ps, double epsilon,
                                                           std::uint64_t seed, const CorrelationBudget& budget) {
  if (ps.empty()) return {};
  const auto [lo, hi] = std::minmax_element(ps.begin(), ps.end());
  CrossingStudy study(seed, budget.samples, *lo, *hi);
  std::vector<CorrelationLengthEstimate> out;
  for (const double p : ps) out.push_back(correlation_length(study, p, epsilon, budget));
  return out;
}

std::optional<std::int64_t> time_to_infinite_cluster(const CouplingField& field, double p, std::int32_t L_hat) {
  if (!(p > 0.5 && p <= 1)) throw std::invalid_argument("the proxy needs p > 1/2");
  if (L_hat < 1) throw std::invalid_argument("L_hat must be positive");
  const LatticeRegion& region = field.region();
  const double R = kFrameFactor * L_hat;
  if (!region.contains_with_margin(LatticeRegion::ball(kOrigin, R)))
    throw std::invalid_argument("frame smaller than 8 L_hat");
  const Configuration cfg = threshold(field, p);
  const auto dec = peel_colored(cfg, R / 2, R, PeelOrder::InnermostFirst, true, 1);
  if (dec.count() == 0) return std::nullopt;
  const Grid& g = region.grid();
  BitGrid cluster(g.cells());
  std::vector<std::uint32_t> stack{g.cell(dec.circuits[0].front())};
  cluster.set(stack.back());
  while (!stack.empty()) {
    const std::uint32_t c = stack.back();
    stack.pop_back();
    for (int d = 0; d < 6; ++d) {
      const std::uint32_t e = g.step(c, d);
      if (region.contains_cell(e) && cfg.open_cell(e) && cluster.claim(e)) stack.push_back(e);
    }
  }
  const Site origin[] = {kOrigin};
  return passage_time(
             cfg, origin, [&](Site v) { return cluster.test(g.cell(v)); }, {}, false)
      .time;
}

std::vector<CoupledPoint> coupled_sample(const CouplingField& field, std::span<const double> ps,
                                         std::span<const std::int32_t> L_hats) {
  if (ps.size() != L_hats.size()) throw std::invalid_argument("one L_hat per p");
  std::vector<double> radii(L_hats.begin(), L_hats.end());
  const std::vector<std::int64_t> half = exit_times(field, 0.5, radii);
  std::vector<CoupledPoint> out;
  for (std::size_t i = 0; i < ps.size(); ++i)
    out.push_back({ps[i], L_hats[i], time_to_infinite_cluster(field, ps[i], L_hats[i]), half[i]});
  return out;
}

RegionPtr coupled_region(std::span<const std::int32_t> L_hats) {
  if (L_hats.empty()) throw std::invalid_argument("no L_hat");
  const std::int32_t top = *std::max_element(L_hats.begin(), L_hats.end());
  return std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, kFrameFactor * top + 3));
}

CoupledSweepResult summarize_coupled(std::uint64_t seed, std::span<const double> ps, std::span<const std::int32_t> L_hats,
                                     const std::vector<std::vector<CoupledPoint>>& per_sample) {
  std::vector<std::vector<double>> tp(ps.size()), th(ps.size()), gap(ps.size());
  std::vector<std::size_t> excluded(ps.size(), 0);
  for (const auto& pts : per_sample) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!pts[i].time_p) {
        ++excluded[i];
        continue;
      }
      tp[i].push_back(static_cast<double>(*pts[i].time_p));
      th[i].push_back(static_cast<double>(pts[i].time_half));
      gap[i].push_back(std::abs(static_cast<double>(*pts[i].time_p - pts[i].time_half)));
    }
  }
  CoupledSweepResult out;
  out.seed = seed;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CoupledSummary c;
    c.p = ps[i];
    c.L_hat = L_hats[i];
    c.samples = tp[i].size();
    c.excluded = excluded[i];
    if (c.samples > 0) {
      const auto a = stats::summarize(tp[i]), b = stats::summarize(th[i]), g = stats::summarize(gap[i]);
      c.mean_time_p = a.mean;
      c.mean_time_half = b.mean;
      c.mean_abs_gap = g.mean;
      c.gap_stderr = g.stderr_;
      c.variance_gap = a.variance - b.variance;
    }
    out.points.push_back(c);
  }
  return out;
}

CoupledSweepResult coupled_sweep(std::uint64_t seed, std::span<const double> ps, std::span<const std::int32_t> L_hats,
                                 std::size_t samples) {
  if (ps.size() != L_hats.size() || ps.empty()) throw std::invalid_argument("one L_hat per p");
  for (const double p : ps)
    if (!(p > 0.5)) throw std::invalid_argument("coupled sweeps need p > 1/2");
  const RegionPtr region = coupled_region(L_hats);
  std::vector<std::vector<CoupledPoint>> per_sample;
  per_sample.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) per_sample.push_back(coupled_sample(CouplingField(region, derive_seed(seed, s)), ps, L_hats));
  return summarize_coupled(seed, ps, L_hats, per_sample);
}

}  // namespace fpplab
