#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "fpplab/stats.hpp"

namespace fpplab::harness {

enum class Kind {
  ConstantCn,
  ConstantA0n,
  DualityAudit,
  ClusterGraphDistance,
  CorrelationLength,
  CoupledSweep,
  NestingProfile,
  CleTable,
  DoubleCircuitAudit,
  LoopGraphDistance,
};

std::string kind_name(Kind kind);
Kind parse_kind(const std::string& name);

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Everything a run depends on. Parallelism is deliberately not part of it.
struct ExperimentSpec {
  Kind kind = Kind::ConstantCn;
  std::vector<double> sizes;  // n grid
  std::size_t samples = 0;
  std::vector<double> ps{0.5};
  std::uint64_t seed = 1;
  std::string out = "out";

  // constant-a0n, cluster-graph-distance, loop-graph-distance: frame radius = factor * n
  double frame_factor = 2;
  // duality-audit
  std::vector<double> inner_radii{2, 4, 8};
  std::vector<double> outer_radii{16, 32, 64};
  // correlation-length, coupled-sweep
  double epsilon = 0.02;
  std::int32_t max_size = 1024;
  int steps_per_octave = 8;
  std::size_t crossing_samples = 2000;
  std::vector<std::int32_t> L_hats;  // coupled-sweep; estimated when empty
  // nesting-profile
  double nesting_eps = 0.125;
  double nesting_M = 2;
  int nesting_k = 1;
  std::vector<double> nus{0.5, 1, 1.5};
  double nesting_delta = 0.5;
  // cle-table
  std::vector<double> table_nus;
  // double-circuit-audit, and the distance tail of cluster-graph-distance
  double frame = 64;
  std::int32_t tail_k = 0;  // 0: no tail table
  // declared bands, checked into the summary: name -> [low, high]
  std::map<std::string, std::pair<double, double>> bands;
};

/// Reads a UTF-8 JSON object; unknown keys and ill-typed or out-of-range values are errors.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);
std::string spec_json(const ExperimentSpec& spec);
void validate(const ExperimentSpec& spec);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
};

struct Check {
  std::string name;
  double value = 0;
  double low = 0;
  double high = 0;
  bool pass = false;
};

struct Fit {
  std::string name;
  stats::LineFit line;
};

struct EstimatorSummary {
  std::vector<Fit> fits;
  std::map<std::string, double> values;  // scalar results, e.g. violation counts
  std::vector<Check> checks;            // one per declared band whose value exists

  const Fit* fit(const std::string& name) const;
  double value(const std::string& name) const;  // throws if absent
  bool passed() const;
};

struct RunResult {
  std::vector<Table> tables;
  EstimatorSummary summary;
  std::string summary_json() const;
};

RunResult run(const ExperimentSpec& spec, unsigned threads = 1);

/// Tables as CSV, summary.json and manifest.json (spec echo, versions, wall time) under dir.
void write_artifacts(const ExperimentSpec& spec, const RunResult& result, const std::filesystem::path& dir,
                     double wall_seconds, unsigned threads);

struct CltDiagnostic {
  double n = 0;
  std::size_t samples = 0;
  double mean = 0;
  double sd = 0;
  double sup_distance = 0;
};
inline constexpr std::size_t kCltMinSamples = 1000;
CltDiagnostic clt_diagnostic(std::span<const double> samples, double n);

/// out[i] = f(i) for i < count, computed on up to `threads` workers. The result does not depend
/// on the worker count; the first exception (lowest index) is rethrown.
template <class F>
auto parallel_map(std::size_t count, unsigned threads, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
  using T = decltype(f(std::size_t{}));
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (n == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace fpplab::harness
