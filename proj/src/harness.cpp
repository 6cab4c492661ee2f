#include "fpplab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "fpplab/circuits.hpp"
#include "fpplab/cle.hpp"
#include "fpplab/clustergraph.hpp"
#include "fpplab/config.hpp"
#include "fpplab/nearcritical.hpp"
#include "fpplab/passage.hpp"

namespace fpplab::harness {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

const std::vector<std::pair<Kind, std::string>>& kind_names() {
  static const std::vector<std::pair<Kind, std::string>> names{
      {Kind::ConstantCn, "constant-cn"},
      {Kind::ConstantA0n, "constant-a0n"},
      {Kind::DualityAudit, "duality-audit"},
      {Kind::ClusterGraphDistance, "cluster-graph-distance"},
      {Kind::CorrelationLength, "correlation-length"},
      {Kind::CoupledSweep, "coupled-sweep"},
      {Kind::NestingProfile, "nesting-profile"},
      {Kind::CleTable, "cle-table"},
      {Kind::DoubleCircuitAudit, "double-circuit-audit"},
      {Kind::LoopGraphDistance, "loop-graph-distance"},
  };
  return names;
}

// Shortest form that reads back to the same double.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}
std::string num(std::size_t x) { return std::to_string(x); }
std::string num(std::int32_t x) { return std::to_string(x); }
std::string num(bool x) { return x ? "1" : "0"; }

RegionPtr ball(double r) { return std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, r)); }

// Fit names carry the p value when a spec has several.
std::string tagged(const std::string& base, const ExperimentSpec& spec, double p) {
  return spec.ps.size() > 1 ? base + "[p=" + num(p) + "]" : base;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

// --- constant-cn ---------------------------------------------------------------------

RunResult run_constant_cn(const ExperimentSpec& spec, unsigned threads) {
  const double top = *std::max_element(spec.sizes.begin(), spec.sizes.end());
  const RegionPtr region = ball(top + 3);
  const auto per_sample = parallel_map(spec.samples, threads, [&](std::size_t i) {
    const CouplingField field(region, derive_seed(spec.seed, i));
    std::vector<std::vector<std::int64_t>> out;
    for (const double p : spec.ps) out.push_back(exit_times(field, p, spec.sizes));
    return out;
  });

  RunResult result;
  Table t{"cn", {"p", "n", "samples", "mean", "variance", "stderr", "variance_stderr", "p_zero", "p_zero_stderr"}, {}};
  for (std::size_t k = 0; k < spec.ps.size(); ++k) {
    const double p = spec.ps[k];
    std::vector<double> x, mean, wm, var, wv, lp, wl;
    bool arm_fit = true;
    for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
      std::vector<double> c;
      std::size_t zeros = 0;
      for (const auto& s : per_sample) {
        c.push_back(static_cast<double>(s[k][j]));
        zeros += s[k][j] == 0;
      }
      const auto sm = stats::summarize(c);
      const double vse = stats::variance_stderr(c);
      const auto pz = stats::proportion(zeros, c.size());
      t.rows.push_back({num(p), num(spec.sizes[j]), num(sm.samples), num(sm.mean), num(sm.variance), num(sm.stderr_),
                        num(vse), num(pz.estimate), num(pz.stderr_)});
      x.push_back(std::log(spec.sizes[j]));
      mean.push_back(sm.mean);
      wm.push_back(sm.stderr_ > 0 ? 1 / (sm.stderr_ * sm.stderr_) : 1);
      var.push_back(sm.variance);
      wv.push_back(vse > 0 ? 1 / (vse * vse) : 1);
      if (zeros == 0 || zeros == c.size()) {
        arm_fit = false;
      } else {
        lp.push_back(std::log(pz.estimate));
        // Delta method: Var log P = (1 - P) / (N P).
        wl.push_back(static_cast<double>(c.size()) * pz.estimate / (1 - pz.estimate));
      }
    }
    if (x.size() >= 3) {
      result.summary.fits.push_back({tagged("slope", spec, p), stats::fit_line(x, mean, wm)});
      result.summary.fits.push_back({tagged("variance_slope", spec, p), stats::fit_line(x, var, wv)});
      if (arm_fit) result.summary.fits.push_back({tagged("one_arm_slope", spec, p), stats::fit_line(x, lp, wl)});
    }
  }
  result.tables.push_back(std::move(t));

  if (spec.samples >= kCltMinSamples) {
    std::vector<double> c;
    for (const auto& s : per_sample) c.push_back(static_cast<double>(s[0].back()));
    const auto d = clt_diagnostic(c, spec.sizes.back());
    result.summary.values["clt_n"] = d.n;
    result.summary.values["clt_sup_distance"] = d.sup_distance;
  }
  return result;
}

// --- constant-a0n --------------------------------------------------------------------

RunResult run_constant_a0n(const ExperimentSpec& spec, unsigned threads) {
  std::vector<RegionPtr> regions;
  for (const double n : spec.sizes) regions.push_back(ball(std::max(spec.frame_factor * n, n + 3)));
  struct Pair {
    std::int64_t a, c;
  };
  // Sample i reuses its seed at every n, so the sizes are coupled.
  const auto per_sample = parallel_map(spec.samples, threads, [&](std::size_t i) {
    std::vector<Pair> out;
    for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
      const CouplingField field(regions[j], derive_seed(spec.seed, i));
      const auto n = static_cast<std::int32_t>(spec.sizes[j]);
      const double r[1] = {spec.sizes[j]};
      for (const double p : spec.ps) out.push_back({point_to_point(field, p, n), exit_times(field, p, r)[0]});
    }
    return out;
  });

  RunResult result;
  Table t{"a0n",
          {"p", "n", "frame", "samples", "mean_a0n", "stderr_a0n", "mean_cn", "stderr_cn", "ratio", "ratio_stderr"},
          {}};
  for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
    for (std::size_t k = 0; k < spec.ps.size(); ++k) {
      std::vector<double> a, c;
      for (const auto& s : per_sample) {
        a.push_back(static_cast<double>(s[j * spec.ps.size() + k].a));
        c.push_back(static_cast<double>(s[j * spec.ps.size() + k].c));
      }
      const auto sa = stats::summarize(a), sc = stats::summarize(c);
      double cov = 0;
      for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - sa.mean) * (c[i] - sc.mean);
      cov /= static_cast<double>(std::max<std::size_t>(a.size(), 2) - 1);
      const double ratio = sc.mean > 0 ? sa.mean / sc.mean : std::numeric_limits<double>::quiet_NaN();
      // Delta method for a ratio of correlated means.
      const double rv = (sa.variance + ratio * ratio * sc.variance - 2 * ratio * cov) /
                        (sc.mean * sc.mean * static_cast<double>(a.size()));
      const double rse = std::sqrt(std::max(0.0, rv));
      t.rows.push_back({num(spec.ps[k]), num(spec.sizes[j]), num(regions[j]->outer_radius()), num(sa.samples),
                        num(sa.mean), num(sa.stderr_), num(sc.mean), num(sc.stderr_), num(ratio), num(rse)});
      if (j + 1 == spec.sizes.size() && k == 0) {
        result.summary.values["ratio"] = ratio;
        result.summary.values["ratio_stderr"] = rse;
      }
    }
  }
  result.tables.push_back(std::move(t));
  return result;
}

// --- duality-audit -------------------------------------------------------------------

struct Combo {
  double p, r, R;
};

std::uint64_t disc_hash(const Configuration& cfg, double R) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  std::uint64_t word = 0;
  int bits = 0;
  for (const Site v : cfg.region().sites()) {
    if (!hexagon_in_ball(v, kOrigin, R)) continue;
    word = (word << 1) | (cfg.open(v) ? 1 : 0);
    if (++bits == 64) {
      h = mix64(h ^ word);
      word = 0;
      bits = 0;
    }
  }
  return mix64(h ^ word ^ (static_cast<std::uint64_t>(bits) << 58));
}

RunResult run_duality_audit(const ExperimentSpec& spec, unsigned threads) {
  std::vector<Combo> combos;
  for (const double p : spec.ps)
    for (const double r : spec.inner_radii)
      for (const double R : spec.outer_radii)
        if (r < R) combos.push_back({p, r, R});
  require(!combos.empty(), "duality-audit needs some inner radius below some outer radius");
  std::map<double, RegionPtr> regions;
  for (const auto& c : combos)
    if (!regions.count(c.R)) regions[c.R] = ball(c.R + 3);

  struct Audit {
    bool duality, incidence, switching;
    std::size_t rho;
    std::uint64_t original, image;
  };
  const auto audits = parallel_map(spec.samples, threads, [&](std::size_t i) {
    const Combo& k = combos[i % combos.size()];
    const Configuration cfg = threshold(CouplingField(regions.at(k.R), derive_seed(spec.seed, i)), k.p);
    const auto inner = peel(cfg, k.r, k.R);
    const auto cross = annulus_crossing(cfg, k.r, k.R);
    Audit a{};
    a.rho = inner.count();
    a.duality = static_cast<std::int64_t>(inner.count()) == cross.time;

    std::unordered_map<std::uint64_t, std::size_t> owner;
    for (std::size_t c = 0; c < inner.count(); ++c)
      for (const Site v : inner.circuits[c]) owner[pack(v)] = c;
    std::set<std::size_t> used;
    a.incidence = true;
    for (const Site v : cross.geodesic) {
      if (cfg.open(v)) continue;
      const auto it = owner.find(pack(v));
      if (it == owner.end() || !used.insert(it->second).second) a.incidence = false;
    }

    const auto outer = peel(cfg, k.r, k.R, PeelOrder::OutermostFirst);
    const Configuration sw = color_switch(cfg, outer);
    a.switching = loop_count(sw, k.r, k.R, true).count == outer.count();
    a.original = disc_hash(cfg, k.R);
    a.image = disc_hash(sw, k.R);
    return a;
  });

  RunResult result;
  Table t{"duality",
          {"p", "r", "R", "samples", "duality_violations", "incidence_violations", "switching_violations",
           "injectivity_violations", "mean_rho"},
          {}};
  std::size_t dv = 0, iv = 0, sv = 0, jv = 0;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    std::size_t n = 0, d = 0, inc = 0, s = 0, inj = 0;
    double rho = 0;
    std::unordered_map<std::uint64_t, std::uint64_t> preimage;
    for (std::size_t i = c; i < audits.size(); i += combos.size()) {
      const Audit& a = audits[i];
      ++n;
      d += !a.duality;
      inc += !a.incidence;
      s += !a.switching;
      rho += static_cast<double>(a.rho);
      const auto [it, fresh] = preimage.emplace(a.image, a.original);
      if (!fresh && it->second != a.original) ++inj;
    }
    t.rows.push_back({num(combos[c].p), num(combos[c].r), num(combos[c].R), num(n), num(d), num(inc), num(s), num(inj),
                      num(n ? rho / static_cast<double>(n) : 0.0)});
    dv += d;
    iv += inc;
    sv += s;
    jv += inj;
  }
  result.tables.push_back(std::move(t));
  result.summary.values["duality_violations"] = static_cast<double>(dv);
  result.summary.values["incidence_violations"] = static_cast<double>(iv);
  result.summary.values["switching_violations"] = static_cast<double>(sv);
  result.summary.values["injectivity_violations"] = static_cast<double>(jv);
  return result;
}

// --- cluster-graph-distance / loop-graph-distance ------------------------------------

void graph_distances(const ExperimentSpec& spec, unsigned threads, bool loops, RunResult& result) {
  std::vector<RegionPtr> regions;
  for (const double n : spec.sizes) regions.push_back(ball(std::max(spec.frame_factor * n, n + 3)));
  // Entry (j, k): size j, parameter k; the origin is forced open so that C_0 exists.
  const auto per_sample = parallel_map(spec.samples, threads, [&](std::size_t i) {
    std::vector<std::optional<std::int64_t>> out;
    for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
      const CouplingField field(regions[j], derive_seed(spec.seed, i));
      for (const double p : spec.ps) {
        Configuration cfg = threshold(field, p);
        cfg.set_open(kOrigin, true);
        out.push_back(loops ? truncated_loop_distance(cfg, spec.sizes[j])
                            : truncated_cluster_distance(cfg, spec.sizes[j]));
      }
    }
    return out;
  });

  Table t{loops ? "loop_distance" : "cluster_distance",
          {"p", "n", "frame", "samples", "excluded", "mean", "variance", "stderr"},
          {}};
  for (std::size_t k = 0; k < spec.ps.size(); ++k) {
    std::vector<double> x, y, w;
    for (std::size_t j = 0; j < spec.sizes.size(); ++j) {
      std::vector<double> d;
      std::size_t excluded = 0;
      for (const auto& s : per_sample) {
        const auto& v = s[j * spec.ps.size() + k];
        if (v)
          d.push_back(static_cast<double>(*v));
        else
          ++excluded;
      }
      const auto sm = stats::summarize(d);
      t.rows.push_back({num(spec.ps[k]), num(spec.sizes[j]), num(regions[j]->outer_radius()), num(sm.samples),
                        num(excluded), num(sm.mean), num(sm.variance), num(sm.stderr_)});
      if (sm.samples < 2) continue;
      x.push_back(std::log(spec.sizes[j]));
      y.push_back(sm.mean);
      w.push_back(sm.stderr_ > 0 ? 1 / (sm.stderr_ * sm.stderr_) : 1);
    }
    if (x.size() >= 3) result.summary.fits.push_back({tagged("slope", spec, spec.ps[k]), stats::fit_line(x, y, w)});
  }
  result.tables.push_back(std::move(t));
}

// P[dist(0, proxy) >= k] on fixed frames, with its own seed stream.
void distance_tail(const ExperimentSpec& spec, unsigned threads, RunResult& result) {
  const RegionPtr frame = ball(spec.frame);
  const double p = spec.ps.front();
  const std::uint64_t tail_seed = mix64(spec.seed ^ 0x7461696c00000000ULL);
  const auto dist = parallel_map(spec.samples, threads, [&](std::size_t i) {
    return distance_to_infinite_component(threshold(CouplingField(frame, derive_seed(tail_seed, i)), p));
  });
  Table tail{"tail", {"k", "samples", "hits", "probability", "stderr"}, {}};
  std::vector<double> x;
  std::vector<std::size_t> hits;
  for (std::int32_t k = 1; k <= spec.tail_k; ++k) {
    hits.push_back(static_cast<std::size_t>(
        std::count_if(dist.begin(), dist.end(), [&](double d) { return d >= static_cast<double>(k); })));
    x.push_back(k);
    const auto pr = stats::proportion(hits.back(), dist.size());
    tail.rows.push_back({num(k), num(dist.size()), num(hits.back()), num(pr.estimate), num(pr.stderr_)});
  }
  // Binomial likelihood, so the k with no hits still constrain the slope.
  result.summary.values["tail_points_with_hits"] =
      static_cast<double>(std::count_if(hits.begin(), hits.end(), [](std::size_t h) { return h > 0; }));
  if (x.size() >= 2) {
    const auto fit = stats::loglinear_binomial(x, hits, dist.size());
    if (fit.points > 0) {
      result.summary.fits.push_back({"tail_slope", fit});
      result.summary.values["tail_slope_ci_high"] = fit.ci_high;
    }
  }
  result.tables.push_back(std::move(tail));
}

RunResult run_graph_distance(const ExperimentSpec& spec, unsigned threads, bool loops) {
  RunResult result;
  if (!spec.sizes.empty()) graph_distances(spec, threads, loops, result);
  if (!loops && spec.tail_k > 0) distance_tail(spec, threads, result);
  return result;
}

// --- correlation-length / coupled-sweep ----------------------------------------------

CorrelationBudget budget_of(const ExperimentSpec& spec, std::size_t samples) {
  CorrelationBudget b;
  b.samples = samples;
  b.n_max = spec.max_size;
  b.steps_per_octave = spec.steps_per_octave;
  return b;
}

RunResult run_correlation_length(const ExperimentSpec& spec) {
  const auto est = correlation_lengths(spec.ps, spec.epsilon, spec.seed, budget_of(spec, spec.samples));
  RunResult result;
  Table t{"corrlen", {"p", "epsilon", "L_hat", "bracketed", "samples", "crossing", "crossing_stderr"}, {}};
  std::vector<double> x, y;
  for (const auto& e : est) {
    double cr = std::numeric_limits<double>::quiet_NaN(), se = cr;
    for (const auto& c : e.curve)
      if (c.n == e.L_hat) {
        cr = c.estimate;
        se = c.stderr_;
      }
    t.rows.push_back({num(e.p), num(e.epsilon), num(e.L_hat), num(e.bracketed), num(e.samples), num(cr), num(se)});
    if (e.L_hat > 0) {
      x.push_back(std::log(std::abs(e.p - 0.5)));
      y.push_back(std::log(static_cast<double>(e.L_hat)));
    }
  }
  result.summary.values["unbracketed"] =
      static_cast<double>(std::count_if(est.begin(), est.end(), [](const auto& e) { return e.L_hat < 0; }));
  if (x.size() >= 3) result.summary.fits.push_back({"slope", stats::fit_line(x, y)});
  result.tables.push_back(std::move(t));
  return result;
}

RunResult run_coupled_sweep(const ExperimentSpec& spec, unsigned threads) {
  std::vector<std::int32_t> L = spec.L_hats;
  RunResult result;
  if (L.empty()) {
    const auto est = correlation_lengths(spec.ps, spec.epsilon, mix64(spec.seed ^ 0x636f72726c656e00ULL),
                                         budget_of(spec, spec.crossing_samples));
    for (const auto& e : est) {
      if (e.L_hat < 0) throw std::runtime_error("correlation length not bracketed at p = " + num(e.p));
      L.push_back(e.L_hat);
    }
  }
  const RegionPtr region = coupled_region(L);
  const auto per_sample = parallel_map(spec.samples, threads, [&](std::size_t i) {
    return coupled_sample(CouplingField(region, derive_seed(spec.seed, i)), spec.ps, L);
  });
  const auto sweep = summarize_coupled(spec.seed, spec.ps, L, per_sample);
  Table t{"sweep",
          {"p", "L_hat", "samples", "excluded", "mean_time_p", "mean_time_half", "mean_abs_gap", "gap_stderr",
           "variance_gap"},
          {}};
  double worst = 0;
  for (const auto& c : sweep.points) {
    t.rows.push_back({num(c.p), num(c.L_hat), num(c.samples), num(c.excluded), num(c.mean_time_p),
                      num(c.mean_time_half), num(c.mean_abs_gap), num(c.gap_stderr), num(c.variance_gap)});
    worst = std::max(worst, c.mean_abs_gap);
  }
  result.summary.values["max_mean_abs_gap"] = worst;
  // Growth toward criticality: the gap nearest 1/2 minus the one farthest, in standard errors.
  const auto by_distance = [](const CoupledSummary& a, const CoupledSummary& b) {
    return std::abs(a.p - 0.5) < std::abs(b.p - 0.5);
  };
  const auto& nearest = *std::min_element(sweep.points.begin(), sweep.points.end(), by_distance);
  const auto& farthest = *std::max_element(sweep.points.begin(), sweep.points.end(), by_distance);
  const double growth = nearest.mean_abs_gap - farthest.mean_abs_gap;
  const double se = std::hypot(nearest.gap_stderr, farthest.gap_stderr);
  result.summary.values["gap_growth"] = growth;
  result.summary.values["gap_growth_z"] = se > 0 ? growth / se : (growth > 0 ? INFINITY : 0.0);
  result.tables.push_back(std::move(t));
  return result;
}

// --- nesting-profile -----------------------------------------------------------------

RunResult run_nesting_profile(const ExperimentSpec& spec, unsigned threads) {
  const double top = std::pow(spec.nesting_M / spec.nesting_eps, spec.nesting_k);
  const RegionPtr region = ball(top + 3);
  const double p = spec.ps.front();
  const auto per_sample = parallel_map(spec.samples, threads, [&](std::size_t i) {
    return nesting_profile(threshold(CouplingField(region, derive_seed(spec.seed, i)), p), spec.nesting_eps,
                           spec.nesting_M, spec.nesting_k);
  });
  RunResult result;
  Table t{"nesting",
          {"level", "R", "nu", "delta", "samples", "outer_loop_ok", "events", "probability", "stderr",
           "mean_shell_circuits"},
          {}};
  for (int j = 0; j < spec.nesting_k; ++j) {
    std::size_t ok = 0;
    double shell = 0;
    for (const auto& s : per_sample) {
      ok += s[static_cast<std::size_t>(j)].outer_loop_ok;
      shell += static_cast<double>(s[static_cast<std::size_t>(j)].indices.size());
    }
    for (const double nu : spec.nus) {
      std::size_t events = 0;
      for (const auto& s : per_sample)
        events += nesting_event(s[static_cast<std::size_t>(j)], spec.nesting_eps, nu, spec.nesting_delta);
      const auto pr = stats::proportion(events, per_sample.size());
      t.rows.push_back({num(static_cast<std::int32_t>(j + 1)), num(per_sample.front()[static_cast<std::size_t>(j)].R),
                        num(nu), num(spec.nesting_delta), num(per_sample.size()), num(ok), num(events),
                        num(pr.estimate), num(pr.stderr_), num(shell / static_cast<double>(per_sample.size()))});
    }
  }
  result.tables.push_back(std::move(t));
  return result;
}

// --- cle-table -----------------------------------------------------------------------

RunResult run_cle_table(const ExperimentSpec& spec) {
  std::vector<double> nus = spec.table_nus;
  if (nus.empty())
    for (int i = 0; i <= 20; ++i) nus.push_back(0.05 * i);
  RunResult result;
  Table t{"cle", {"nu", "gamma", "argmax"}, {}};
  for (const auto& row : cle::gamma_table(nus)) t.rows.push_back({num(row.nu), num(row.gamma), num(row.argmax)});
  result.tables.push_back(std::move(t));
  result.summary.values["gamma_at_zero"] = cle::gamma(0);
  result.summary.values["typical_rate"] = cle::typical_rate();
  result.summary.values["nu1"] = cle::nu1();
  return result;
}

// --- double-circuit-audit ------------------------------------------------------------

RunResult run_double_circuit_audit(const ExperimentSpec& spec, unsigned threads) {
  const RegionPtr region = ball(spec.frame);
  struct Audit {
    bool finite, surrounded;
    std::size_t circuits, invalid, bridge_failures;
  };
  const auto audits = parallel_map(spec.samples, threads, [&](std::size_t i) {
    const double p = spec.ps[i % spec.ps.size()];
    Configuration cfg = threshold(CouplingField(region, derive_seed(spec.seed, i)), p);
    cfg.set_open(kOrigin, true);
    const auto part = clusters(cfg);
    const auto model = build_cluster_graph(cfg, part);
    const std::int32_t c0 = part.cluster_of(kOrigin);
    const auto dcs = find_double_circuits(cfg, part, c0);
    Audit a{!model.in_infinite_proxy(c0), !dcs.empty(), dcs.size(), 0, 0};
    for (const auto& dc : dcs) {
      if (!verify_double_circuit(cfg, dc)) ++a.invalid;
      try {
        const auto bridged = sublattice_bridge(dc);
        const std::set<Site> both = [&] {
          std::set<Site> s(dc.inner.begin(), dc.inner.end());
          s.insert(dc.outer.begin(), dc.outer.end());
          return s;
        }();
        const std::set<Site> b(bridged.begin(), bridged.end());
        bool ok = std::all_of(dc.inner.begin(), dc.inner.end(), [&](Site v) { return b.count(v) > 0; });
        ok = ok && std::all_of(bridged.begin(), bridged.end(), [&](Site v) { return both.count(v) > 0; });
        if (!ok) ++a.bridge_failures;
      } catch (const BridgeError&) {
        ++a.bridge_failures;
      }
    }
    return a;
  });

  RunResult result;
  Table t{"double_circuits",
          {"p", "samples", "finite", "surrounded", "disagreements", "double_circuits", "invalid", "bridge_failures"},
          {}};
  std::size_t dis = 0, inv = 0, bf = 0, fin = 0, inf = 0;
  for (std::size_t k = 0; k < spec.ps.size(); ++k) {
    std::size_t n = 0, f = 0, s = 0, d = 0, c = 0, iv = 0, b = 0;
    for (std::size_t i = k; i < audits.size(); i += spec.ps.size()) {
      const Audit& a = audits[i];
      ++n;
      f += a.finite;
      s += a.surrounded;
      d += a.finite != a.surrounded;
      c += a.circuits;
      iv += a.invalid;
      b += a.bridge_failures;
    }
    t.rows.push_back({num(spec.ps[k]), num(n), num(f), num(s), num(d), num(c), num(iv), num(b)});
    dis += d;
    inv += iv;
    bf += b;
    fin += f;
    inf += n - f;
  }
  result.tables.push_back(std::move(t));
  result.summary.values["disagreements"] = static_cast<double>(dis);
  result.summary.values["invalid_double_circuits"] = static_cast<double>(inv);
  result.summary.values["bridge_failures"] = static_cast<double>(bf);
  result.summary.values["finite"] = static_cast<double>(fin);
  result.summary.values["infinite"] = static_cast<double>(inf);
  return result;
}

void apply_bands(const ExperimentSpec& spec, EstimatorSummary& summary) {
  for (const auto& [name, band] : spec.bands) {
    Check c{name, std::numeric_limits<double>::quiet_NaN(), band.first, band.second, false};
    if (const Fit* f = summary.fit(name))
      c.value = f->line.slope;
    else if (summary.values.count(name))
      c.value = summary.values.at(name);
    c.pass = c.value >= band.first && c.value <= band.second;
    summary.checks.push_back(c);
  }
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("spec field '") + key + "': " + e.what());
  }
}

}  // namespace

std::string kind_name(Kind kind) {
  for (const auto& [k, name] : kind_names())
    if (k == kind) return name;
  throw std::logic_error("unnamed kind");
}

Kind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kind_names())
    if (n == name) return k;
  throw ValidationError("unknown experiment kind '" + name + "'");
}

ExperimentSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("spec must be a JSON object");
  ExperimentSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") s.kind = parse_kind(get<std::string>(j, "kind"));
    else if (key == "sizes") s.sizes = get<std::vector<double>>(j, "sizes");
    else if (key == "samples") s.samples = get<std::size_t>(j, "samples");
    else if (key == "p") s.ps = value.is_array() ? get<std::vector<double>>(j, "p") : std::vector<double>{get<double>(j, "p")};
    else if (key == "seed") s.seed = get<std::uint64_t>(j, "seed");
    else if (key == "out") s.out = get<std::string>(j, "out");
    else if (key == "frame_factor") s.frame_factor = get<double>(j, "frame_factor");
    else if (key == "inner_radii") s.inner_radii = get<std::vector<double>>(j, "inner_radii");
    else if (key == "outer_radii") s.outer_radii = get<std::vector<double>>(j, "outer_radii");
    else if (key == "epsilon") s.epsilon = get<double>(j, "epsilon");
    else if (key == "max_size") s.max_size = get<std::int32_t>(j, "max_size");
    else if (key == "steps_per_octave") s.steps_per_octave = get<int>(j, "steps_per_octave");
    else if (key == "crossing_samples") s.crossing_samples = get<std::size_t>(j, "crossing_samples");
    else if (key == "L_hat") s.L_hats = get<std::vector<std::int32_t>>(j, "L_hat");
    else if (key == "nesting_eps") s.nesting_eps = get<double>(j, "nesting_eps");
    else if (key == "nesting_M") s.nesting_M = get<double>(j, "nesting_M");
    else if (key == "nesting_k") s.nesting_k = get<int>(j, "nesting_k");
    else if (key == "nu") s.nus = get<std::vector<double>>(j, "nu");
    else if (key == "nesting_delta") s.nesting_delta = get<double>(j, "nesting_delta");
    else if (key == "table_nu") s.table_nus = get<std::vector<double>>(j, "table_nu");
    else if (key == "frame") s.frame = get<double>(j, "frame");
    else if (key == "tail_k") s.tail_k = get<std::int32_t>(j, "tail_k");
    else if (key == "bands") {
      if (!value.is_object()) throw ValidationError("bands must be an object of [low, high] pairs");
      for (const auto& [name, band] : value.items()) {
        if (!band.is_array() || band.size() != 2 || !band[0].is_number() || !band[1].is_number())
          throw ValidationError("band '" + name + "' must be [low, high]");
        s.bands[name] = {band[0].get<double>(), band[1].get<double>()};
      }
    } else {
      throw ValidationError("unknown spec field '" + key + "'");
    }
  }
  if (!j.contains("kind")) throw ValidationError("spec field 'kind' is required");
  validate(s);
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string spec_json(const ExperimentSpec& s) {
  json j;
  j["kind"] = kind_name(s.kind);
  j["sizes"] = s.sizes;
  j["samples"] = s.samples;
  j["p"] = s.ps;
  j["seed"] = s.seed;
  j["out"] = s.out;
  j["frame_factor"] = s.frame_factor;
  j["inner_radii"] = s.inner_radii;
  j["outer_radii"] = s.outer_radii;
  j["epsilon"] = s.epsilon;
  j["max_size"] = s.max_size;
  j["steps_per_octave"] = s.steps_per_octave;
  j["crossing_samples"] = s.crossing_samples;
  j["L_hat"] = s.L_hats;
  j["nesting_eps"] = s.nesting_eps;
  j["nesting_M"] = s.nesting_M;
  j["nesting_k"] = s.nesting_k;
  j["nu"] = s.nus;
  j["nesting_delta"] = s.nesting_delta;
  j["table_nu"] = s.table_nus;
  j["frame"] = s.frame;
  j["tail_k"] = s.tail_k;
  json bands = json::object();
  for (const auto& [name, b] : s.bands) bands[name] = {b.first, b.second};
  j["bands"] = bands;
  return j.dump(2);
}

void validate(const ExperimentSpec& s) {
  for (const double p : s.ps) require(p >= 0 && p <= 1, "p must lie in [0, 1]");
  require(!s.ps.empty(), "at least one p is required");
  for (const auto& [name, b] : s.bands) require(b.first <= b.second, "band '" + name + "' is empty");
  const bool sized = s.kind == Kind::ConstantCn || s.kind == Kind::ConstantA0n ||
                     s.kind == Kind::ClusterGraphDistance || s.kind == Kind::LoopGraphDistance;
  if (sized) {
    // The distance tail alone needs no size grid.
    const bool tail_only = s.kind == Kind::ClusterGraphDistance && s.tail_k > 0;
    require(tail_only || !s.sizes.empty(), "sizes must not be empty");
    for (const double n : s.sizes) require(n >= 1 && n <= 1 << 16, "sizes must lie in [1, 65536]");
    require(std::is_sorted(s.sizes.begin(), s.sizes.end()), "sizes must be increasing");
    require(s.frame_factor >= 1, "frame_factor must be at least 1");
  }
  if (s.kind == Kind::ConstantA0n)
    for (const double n : s.sizes) require(n == std::floor(n), "a0n sizes must be integers");
  if (s.kind != Kind::CleTable) require(s.samples >= 1, "samples must be positive");
  switch (s.kind) {
    case Kind::ConstantCn:
    case Kind::ConstantA0n:
      require(s.samples >= 2, "at least two samples are needed for a variance");
      break;
    case Kind::ClusterGraphDistance:
    case Kind::LoopGraphDistance:
      require(s.tail_k >= 0, "tail_k must be non-negative");
      if (s.tail_k > 0) require(s.frame > s.tail_k + 2, "frame must exceed tail_k");
      break;
    case Kind::DualityAudit:
      require(!s.inner_radii.empty() && !s.outer_radii.empty(), "radii must not be empty");
      for (const double r : s.inner_radii) require(r >= 0, "radii must be non-negative");
      break;
    case Kind::CorrelationLength:
    case Kind::CoupledSweep:
      require(s.epsilon > 0 && s.epsilon < 1, "epsilon must lie in (0, 1)");
      require(s.max_size >= 4 && s.steps_per_octave >= 1, "bad size budget");
      for (const double p : s.ps) require(p != 0.5, "p = 1/2 has no finite correlation length");
      if (s.kind == Kind::CoupledSweep) {
        for (const double p : s.ps) require(p > 0.5, "coupled sweeps need p > 1/2");
        require(s.L_hats.empty() || s.L_hats.size() == s.ps.size(), "one L_hat per p");
        for (const auto L : s.L_hats) require(L >= 1, "L_hat must be positive");
        require(!s.L_hats.empty() || s.crossing_samples >= 1, "crossing_samples must be positive");
      }
      break;
    case Kind::NestingProfile:
      require(s.nesting_eps > 0 && s.nesting_eps < 1 && s.nesting_M > 1 && s.nesting_k >= 1, "bad nesting parameters");
      require(std::pow(s.nesting_M / s.nesting_eps, s.nesting_k) <= 2048, "nesting profile radius exceeds 2048");
      require(!s.nus.empty() && s.nesting_delta > 0, "nesting needs nu values and delta > 0");
      break;
    case Kind::CleTable:
      for (const double nu : s.table_nus) require(nu >= 0, "nu must be non-negative");
      break;
    case Kind::DoubleCircuitAudit:
      require(s.frame >= 4, "frame must be at least 4");
      break;
  }
}

std::string Table::csv() const {
  std::string out;
  const auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

const Fit* EstimatorSummary::fit(const std::string& name) const {
  for (const auto& f : fits)
    if (f.name == name) return &f;
  return nullptr;
}

double EstimatorSummary::value(const std::string& name) const {
  const auto it = values.find(name);
  if (it == values.end()) throw std::out_of_range("no summary value '" + name + "'");
  return it->second;
}

bool EstimatorSummary::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string RunResult::summary_json() const {
  json j;
  json fits = json::array();
  for (const auto& f : summary.fits)
    fits.push_back({{"name", f.name},
                    {"slope", f.line.slope},
                    {"intercept", f.line.intercept},
                    {"slope_stderr", f.line.slope_stderr},
                    {"ci_low", f.line.ci_low},
                    {"ci_high", f.line.ci_high},
                    {"points", f.line.points}});
  j["fits"] = fits;
  json values = json::object();
  for (const auto& [k, v] : summary.values) values[k] = v;
  j["values"] = values;
  json checks = json::array();
  for (const auto& c : summary.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"low", c.low}, {"high", c.high}, {"pass", c.pass}});
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

RunResult run(const ExperimentSpec& spec, unsigned threads) {
  validate(spec);
  RunResult r;
  switch (spec.kind) {
    case Kind::ConstantCn: r = run_constant_cn(spec, threads); break;
    case Kind::ConstantA0n: r = run_constant_a0n(spec, threads); break;
    case Kind::DualityAudit: r = run_duality_audit(spec, threads); break;
    case Kind::ClusterGraphDistance: r = run_graph_distance(spec, threads, false); break;
    case Kind::LoopGraphDistance: r = run_graph_distance(spec, threads, true); break;
    case Kind::CorrelationLength: r = run_correlation_length(spec); break;
    case Kind::CoupledSweep: r = run_coupled_sweep(spec, threads); break;
    case Kind::NestingProfile: r = run_nesting_profile(spec, threads); break;
    case Kind::CleTable: r = run_cle_table(spec); break;
    case Kind::DoubleCircuitAudit: r = run_double_circuit_audit(spec, threads); break;
  }
  apply_bands(spec, r.summary);
  return r;
}

void write_artifacts(const ExperimentSpec& spec, const RunResult& result, const std::filesystem::path& dir,
                     double wall_seconds, unsigned threads) {
  std::filesystem::create_directories(dir);
  const auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  json outputs = json::array();
  for (const auto& t : result.tables) {
    put(t.name + ".csv", t.csv());
    outputs.push_back(t.name + ".csv");
  }
  put("summary.json", result.summary_json());
  outputs.push_back("summary.json");
  json m;
  m["spec"] = json::parse(spec_json(spec));
  m["versions"] = {{"fpplab", kVersion}, {"compiler", __VERSION__}, {"cxx", __cplusplus}};
  m["threads"] = threads;
  m["wall_seconds"] = wall_seconds;
  m["outputs"] = outputs;
  put("manifest.json", m.dump(2) + "\n");
}

CltDiagnostic clt_diagnostic(std::span<const double> samples, double n) {
  if (samples.size() < kCltMinSamples)
    throw std::invalid_argument("the normality diagnostic needs at least " + std::to_string(kCltMinSamples) +
                                " samples");
  const auto s = stats::summarize(samples);
  return {n, s.samples, s.mean, std::sqrt(s.variance), stats::ks_normal(samples)};
}

}  // namespace fpplab::harness
