#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fpplab/clustergraph.hpp"
#include "fpplab/harness.hpp"
#include "fpplab/nearcritical.hpp"
#include "fpplab/passage.hpp"

using namespace fpplab;
using namespace fpplab::harness;

namespace {
ExperimentSpec make(Kind kind, std::vector<double> sizes, std::size_t samples, std::uint64_t seed = 7) {
  ExperimentSpec s;
  s.kind = kind;
  s.sizes = std::move(sizes);
  s.samples = samples;
  s.seed = seed;
  return s;
}

std::string all_csv(const RunResult& r) {
  std::string out;
  for (const auto& t : r.tables) out += t.name + "\n" + t.csv();
  return out;
}

std::vector<std::string> column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  REQUIRE(it != t.columns.end());
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(row[static_cast<std::size_t>(it - t.columns.begin())]);
  return out;
}
}  // namespace

TEST_CASE("spec parsing and validation") {
  const auto s = parse_spec(R"({"kind": "constant-cn", "sizes": [4, 8], "samples": 10, "p": 0.5, "seed": 3,
                                "bands": {"slope": [0.06, 0.12]}})");
  CHECK(s.kind == Kind::ConstantCn);
  CHECK(s.sizes == std::vector<double>{4, 8});
  CHECK(s.ps == std::vector<double>{0.5});
  CHECK(s.seed == 3);
  CHECK(s.bands.at("slope").second == 0.12);
  CHECK(spec_json(parse_spec(spec_json(s))) == spec_json(s));

  CHECK_THROWS_AS(parse_spec("{"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"sizes": [4]})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "nope"})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "constant-cn", "sizes": [4], "samples": 3, "colour": 1})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "constant-cn", "sizes": [8, 4], "samples": 3})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "constant-cn", "sizes": [4], "samples": 3, "p": 1.5})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "constant-cn", "sizes": [4], "samples": "3"})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "correlation-length", "samples": 3, "p": [0.5]})"), ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "coupled-sweep", "samples": 3, "p": [0.6], "L_hat": [2, 3]})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_spec(R"({"kind": "cle-table", "bands": {"nu1": [2, 1]}})"), ValidationError);
  CHECK_NOTHROW(parse_spec(R"({"kind": "cle-table"})"));
  // Validation runs before any compute.
  auto bad = make(Kind::ConstantCn, {}, 10);
  CHECK_THROWS_AS(run(bad), ValidationError);
}

TEST_CASE("parallel map is order-fixed") {
  const auto f = [](std::size_t i) { return mix64(i) % 1000; };
  CHECK(parallel_map(200, 1, f) == parallel_map(200, 4, f));
  CHECK(parallel_map(0, 3, f).empty());
  const auto g = [](std::size_t i) -> int {
    if (i == 5 || i == 9) throw std::runtime_error(std::to_string(i));
    return 0;
  };
  try {
    parallel_map(20, 3, g);
    FAIL("no exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "5");
  }
}

TEST_CASE("constant-cn matches dense exit times") {
  const auto spec = make(Kind::ConstantCn, {3, 6, 12}, 40);
  const auto r1 = run(spec, 1);
  CHECK(all_csv(r1) == all_csv(run(spec, 3)));
  const auto region = std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, 15));
  const auto& t = r1.tables[0];
  for (std::size_t j = 0; j < 3; ++j) {
    double sum = 0;
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < spec.samples; ++i) {
      const Configuration cfg = threshold(CouplingField(region, derive_seed(spec.seed, i)), 0.5);
      const auto c = exit_time(cfg, spec.sizes[j], false).time;
      sum += static_cast<double>(c);
      zeros += c == 0;
    }
    CHECK(std::stod(column(t, "mean")[j]) == doctest::Approx(sum / 40).epsilon(1e-12));
    CHECK(std::stod(column(t, "p_zero")[j]) == doctest::Approx(static_cast<double>(zeros) / 40).epsilon(1e-12));
  }
  REQUIRE(r1.summary.fit("slope"));
  CHECK(r1.summary.fit("slope")->line.points == 3);
  CHECK(r1.summary.fit("variance_slope"));
  CHECK_FALSE(r1.summary.values.count("clt_sup_distance"));
}

TEST_CASE("constant-a0n ratio") {
  auto spec = make(Kind::ConstantA0n, {4, 8}, 30);
  const auto r = run(spec, 2);
  CHECK(all_csv(r) == all_csv(run(spec, 1)));
  const auto& t = r.tables[0];
  const double ratio = std::stod(column(t, "ratio")[1]);
  CHECK(ratio == doctest::Approx(std::stod(column(t, "mean_a0n")[1]) / std::stod(column(t, "mean_cn")[1])));
  CHECK(r.summary.value("ratio") == doctest::Approx(ratio));
  CHECK(column(t, "frame")[1] == "16");
}

TEST_CASE("duality audit") {
  ExperimentSpec spec = make(Kind::DualityAudit, {}, 90);
  spec.ps = {0.3, 0.5, 0.7};
  spec.inner_radii = {1, 2};
  spec.outer_radii = {6, 9};
  const auto r = run(spec, 2);
  CHECK(r.summary.value("duality_violations") == 0);
  CHECK(r.summary.value("incidence_violations") == 0);
  CHECK(r.summary.value("switching_violations") == 0);
  CHECK(r.summary.value("injectivity_violations") == 0);
  CHECK(r.tables[0].rows.size() == 12);
  CHECK(all_csv(r) == all_csv(run(spec, 1)));
}

TEST_CASE("graph distances match direct computation") {
  auto spec = make(Kind::ClusterGraphDistance, {2, 4, 8}, 30);
  spec.tail_k = 3;
  spec.frame = 12;
  const auto r = run(spec, 3);
  CHECK(all_csv(r) == all_csv(run(spec, 1)));
  REQUIRE(r.tables.size() == 2);
  const auto region = std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, 16));
  double sum = 0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < spec.samples; ++i) {
    Configuration cfg = threshold(CouplingField(region, derive_seed(spec.seed, i)), 0.5);
    cfg.set_open(kOrigin, true);
    if (const auto d = truncated_cluster_distance(cfg, 8)) {
      sum += static_cast<double>(*d);
      ++kept;
    }
  }
  CHECK(std::stod(column(r.tables[0], "mean")[2]) == doctest::Approx(sum / static_cast<double>(kept)));
  CHECK(column(r.tables[1], "k") == std::vector<std::string>{"1", "2", "3"});
  const auto hits = column(r.tables[1], "hits");
  CHECK(std::stoul(hits[0]) >= std::stoul(hits[1]));

  spec.kind = Kind::LoopGraphDistance;
  const auto l = run(spec, 2);
  CHECK(l.tables.size() == 1);
  CHECK(l.tables[0].name == "loop_distance");
  CHECK(all_csv(l) == all_csv(run(spec, 1)));
}

TEST_CASE("correlation length and coupled sweep") {
  ExperimentSpec spec = make(Kind::CorrelationLength, {}, 150);
  spec.ps = {0.6, 0.65, 0.7};
  spec.epsilon = 0.1;
  spec.max_size = 64;
  const auto r = run(spec);
  CorrelationBudget b;
  b.samples = 150;
  b.n_max = 64;
  const auto direct = correlation_lengths(spec.ps, 0.1, spec.seed, b);
  const auto L = column(r.tables[0], "L_hat");
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::stoi(L[i]) == direct[i].L_hat);

  ExperimentSpec sw = make(Kind::CoupledSweep, {}, 12);
  sw.ps = {0.6, 0.7};
  sw.L_hats = {3, 2};
  const auto s = run(sw, 3);
  const auto ref = coupled_sweep(sw.seed, sw.ps, sw.L_hats, 12);
  const auto gap = column(s.tables[0], "mean_abs_gap");
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::stod(gap[i]) == doctest::Approx(ref.points[i].mean_abs_gap));
  CHECK(all_csv(s) == all_csv(run(sw, 1)));
  CHECK(s.summary.value("max_mean_abs_gap") >= 0);
}

TEST_CASE("nesting and cle tables") {
  ExperimentSpec n = make(Kind::NestingProfile, {}, 6);
  n.nesting_eps = 0.25;
  n.nesting_M = 2;
  n.nus = {0.5, 1};
  const auto r = run(n, 2);
  CHECK(r.tables[0].rows.size() == 2);
  CHECK(column(r.tables[0], "R")[0] == "8");

  ExperimentSpec c;
  c.kind = Kind::CleTable;
  c.table_nus = {0, 0.5};
  const auto t = run(c);
  CHECK(std::stod(column(t.tables[0], "gamma")[0]) == 5.0 / 48);
  CHECK(t.summary.value("gamma_at_zero") == 5.0 / 48);
  CHECK(t.summary.value("nu1") > t.summary.value("typical_rate"));
}

TEST_CASE("double-circuit audit") {
  ExperimentSpec spec = make(Kind::DoubleCircuitAudit, {}, 40);
  spec.ps = {0.15, 0.25};
  spec.frame = 20;
  const auto r = run(spec, 2);
  CHECK(r.summary.value("disagreements") == 0);
  CHECK(r.summary.value("bridge_failures") == 0);
  CHECK(r.summary.value("invalid_double_circuits") == 0);
  CHECK(r.summary.value("finite") > 0);
  CHECK(r.summary.value("infinite") > 0);
}

TEST_CASE("bands and artifacts") {
  ExperimentSpec c;
  c.kind = Kind::CleTable;
  c.table_nus = {0};
  c.bands = {{"nu1", {0, 10}}, {"gamma_at_zero", {0, 0.1}}, {"missing", {0, 1}}};
  const auto r = run(c);
  REQUIRE(r.summary.checks.size() == 3);
  std::map<std::string, bool> pass;
  for (const auto& ch : r.summary.checks) pass[ch.name] = ch.pass;
  CHECK(pass["nu1"]);
  CHECK_FALSE(pass["gamma_at_zero"]);
  CHECK_FALSE(pass["missing"]);
  CHECK_FALSE(r.summary.passed());

  const auto dir = std::filesystem::temp_directory_path() / "fpplab_harness_test";
  std::filesystem::remove_all(dir);
  write_artifacts(c, r, dir, 0.5, 2);
  CHECK(std::filesystem::exists(dir / "cle.csv"));
  CHECK(std::filesystem::exists(dir / "summary.json"));
  std::ifstream in(dir / "manifest.json");
  const auto m = nlohmann::json::parse(in);
  CHECK(m["spec"]["kind"] == "cle-table");
  CHECK(m["threads"] == 2);
  CHECK(m["outputs"].size() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("normality diagnostic") {
  std::vector<double> few(999, 1.0);
  CHECK_THROWS_AS(clt_diagnostic(few, 8), std::invalid_argument);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> z(3, 2);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = z(rng);
  const auto d = clt_diagnostic(xs, 8);
  CHECK(d.sup_distance < 0.05);
  CHECK(d.mean == doctest::Approx(3).epsilon(0.05));
  const std::vector<double> flat(1000, 2.0);
  CHECK(clt_diagnostic(flat, 8).sup_distance == doctest::Approx(0.5));
}
