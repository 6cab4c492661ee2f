// Command-line driver: every subcommand runs one experiment spec and writes its artifacts.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "fpplab/clustergraph.hpp"
#include "fpplab/config.hpp"
#include "fpplab/harness.hpp"

using namespace fpplab;
using namespace fpplab::harness;

namespace {

struct Common {
  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> out;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--spec", c.spec_path, "experiment spec (JSON)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--samples", c.samples, "sample count");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
}

ExperimentSpec default_spec(Kind kind) {
  ExperimentSpec s;
  s.kind = kind;
  switch (kind) {
    case Kind::ConstantCn:
      s.sizes = {64, 128, 256, 512, 1024, 2048, 4096};
      s.samples = 500;
      break;
    case Kind::ConstantA0n:
      s.sizes = {1024};
      s.samples = 1000;
      break;
    case Kind::CorrelationLength:
      s.ps = {0.53, 0.54, 0.55, 0.56, 0.57, 0.58, 0.59, 0.6};
      s.samples = 2000;
      break;
    case Kind::CoupledSweep:
      s.ps = {0.54, 0.56, 0.58};
      s.samples = 200;
      break;
    case Kind::ClusterGraphDistance:
    case Kind::LoopGraphDistance:
      s.sizes = {32, 64, 128, 256, 512, 1024};
      s.samples = 500;
      break;
    case Kind::DualityAudit:
      s.ps = {0.3, 0.5, 0.7};
      s.samples = 10000;
      break;
    case Kind::DoubleCircuitAudit:
      s.ps = {0.15, 0.2, 0.25};
      s.samples = 1000;
      break;
    case Kind::NestingProfile:
      s.samples = 200;
      break;
    case Kind::CleTable:
      break;
  }
  return s;
}

int execute(const Common& c, std::optional<Kind> fallback, const std::set<Kind>& allowed) {
  ExperimentSpec spec;
  if (!c.spec_path.empty()) {
    spec = load_spec(c.spec_path);
  } else if (fallback) {
    spec = default_spec(*fallback);
  } else {
    throw ValidationError("--spec is required");
  }
  if (!allowed.empty() && !allowed.count(spec.kind))
    throw ValidationError("spec kind '" + kind_name(spec.kind) + "' does not belong to this subcommand");
  if (c.seed) spec.seed = *c.seed;
  if (c.samples) spec.samples = *c.samples;
  if (c.out) spec.out = *c.out;
  validate(spec);

  const auto start = std::chrono::steady_clock::now();
  const RunResult result = run(spec, c.threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_artifacts(spec, result, spec.out, wall, c.threads);

  std::printf("%s: %.1f s, artifacts in %s\n", kind_name(spec.kind).c_str(), wall, spec.out.c_str());
  for (const auto& f : result.summary.fits)
    std::printf("  %s = %.6g  [%.6g, %.6g]\n", f.name.c_str(), f.line.slope, f.line.ci_low, f.line.ci_high);
  for (const auto& [k, v] : result.summary.values) std::printf("  %s = %.10g\n", k.c_str(), v);
  for (const auto& ch : result.summary.checks)
    std::printf("  %s %s = %.6g in [%.6g, %.6g]\n", ch.pass ? "PASS" : "FAIL", ch.name.c_str(), ch.value, ch.low,
                ch.high);
  return result.summary.passed() ? 0 : 1;
}

void export_graph(double radius, double p, std::uint64_t seed, const std::string& dir) {
  const auto region = std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, radius));
  const Configuration cfg = sample_configuration(region, p, seed);
  const auto part = clusters(cfg);
  const auto model = build_cluster_graph(cfg, part);
  std::filesystem::create_directories(dir);
  std::ofstream adjacency(std::filesystem::path(dir) / "cluster_graph.txt");
  std::ofstream metadata(std::filesystem::path(dir) / "cluster_metadata.txt");
  export_cluster_graph(part, model, adjacency, metadata);
  std::printf("cluster graph of %zu open clusters, %zu edges, in %s\n", model.vertices.size(), model.edge_count(),
              dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernoulli first-passage percolation laboratory"};
  app.require_subcommand(1);
  std::map<std::string, Common> common;

  auto* simulate = app.add_subcommand("simulate", "run any experiment spec");
  add_common(simulate, common["simulate"]);
  auto* estimate = app.add_subcommand("estimate", "time constants: constant-cn, constant-a0n");
  add_common(estimate, common["estimate"]);
  auto* corrlen = app.add_subcommand("corrlen", "correlation lengths");
  add_common(corrlen, common["corrlen"]);
  auto* sweep = app.add_subcommand("sweep", "coupled near-critical sweep");
  add_common(sweep, common["sweep"]);
  auto* graph = app.add_subcommand("clustergraph", "cluster and loop graph distances, graph export");
  add_common(graph, common["clustergraph"]);
  double export_radius = 0, export_p = 0.5;
  std::uint64_t export_seed = 1;
  graph->add_option("--export-radius", export_radius, "export the cluster graph of one ball of this radius");
  graph->add_option("--export-p", export_p, "parameter of the exported configuration");
  graph->add_option("--export-seed", export_seed, "seed of the exported configuration");
  auto* cle_cmd = app.add_subcommand("cle", "nesting rate table");
  add_common(cle_cmd, common["cle"]);
  std::vector<double> nus;
  cle_cmd->add_option("--nu", nus, "nu values");
  auto* audit = app.add_subcommand("audit", "exact checks: duality-audit, double-circuit-audit");
  add_common(audit, common["audit"]);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*simulate) return execute(common["simulate"], std::nullopt, {});
    if (*estimate) return execute(common["estimate"], Kind::ConstantCn, {Kind::ConstantCn, Kind::ConstantA0n});
    if (*corrlen) return execute(common["corrlen"], Kind::CorrelationLength, {Kind::CorrelationLength});
    if (*sweep) return execute(common["sweep"], Kind::CoupledSweep, {Kind::CoupledSweep});
    if (*graph) {
      auto& c = common["clustergraph"];
      if (export_radius > 0) {
        export_graph(export_radius, export_p, export_seed, c.out.value_or("out"));
        return 0;
      }
      return execute(c, Kind::ClusterGraphDistance,
                     {Kind::ClusterGraphDistance, Kind::LoopGraphDistance, Kind::DoubleCircuitAudit});
    }
    if (*cle_cmd) {
      auto& c = common["cle"];
      if (c.spec_path.empty() && !nus.empty()) {
        // Build the spec inline so --nu works without a file.
        ExperimentSpec s = default_spec(Kind::CleTable);
        s.table_nus = nus;
        s.out = c.out.value_or(s.out);
        validate(s);
        const auto start = std::chrono::steady_clock::now();
        const auto r = run(s);
        write_artifacts(s, r, s.out, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1);
        std::cout << r.tables.front().csv();
        return 0;
      }
      return execute(c, Kind::CleTable, {Kind::CleTable});
    }
    if (*audit) return execute(common["audit"], Kind::DualityAudit, {Kind::DualityAudit, Kind::DoubleCircuitAudit});
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "invalid spec: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
