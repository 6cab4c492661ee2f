#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fpplab/config.hpp"

using namespace fpplab;

namespace {
RegionPtr ball(double r) { return std::make_shared<LatticeRegion>(LatticeRegion::ball(kOrigin, r)); }

std::size_t open_count(const Configuration& cfg) {
  std::size_t n = 0;
  cfg.region().for_each_cell([&](std::uint32_t c) { n += cfg.open_cell(c); });
  return n;
}
}  // namespace

TEST_CASE("threshold extremes") {
  const CouplingField field(ball(20), 99);
  CHECK(open_count(threshold(field, 0.0)) == 0);
  CHECK(open_count(threshold(field, 1.0)) == field.region().size());
  CHECK_THROWS_AS(threshold(field, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(threshold(field, -0.1), std::invalid_argument);
}

TEST_CASE("probability threshold is floor(p 2^64)") {
  CHECK(probability_threshold(0.5) == (std::uint64_t{1} << 63));
  CHECK(probability_threshold(0.25) == (std::uint64_t{1} << 62));
  CHECK(probability_threshold(1.0) == ~std::uint64_t{0});
  CHECK(probability_threshold(0.0) == 0);
}

TEST_CASE("monotone coupling") {
  const CouplingField field(ball(40), 5);
  const Configuration lo = threshold(field, 0.4), hi = threshold(field, 0.6);
  bool ok = true;
  field.region().for_each_cell([&](std::uint32_t c) {
    if (lo.open_cell(c) && !hi.open_cell(c)) ok = false;
  });
  CHECK(ok);
}

TEST_CASE("site frequencies at p = 1/2") {
  const CouplingField field(ball(200), 12345);
  const auto n = static_cast<double>(field.region().size());
  const double k = static_cast<double>(open_count(threshold(field, 0.5)));
  // Five standard deviations.
  CHECK(std::abs(k - n / 2) < 5 * std::sqrt(n / 4));
  // Horizontal neighbor pairs are uncorrelated.
  double both = 0, pairs = 0;
  const Configuration cfg = threshold(field, 0.5);
  for (const Site v : field.region().sites()) {
    const Site w = neighbor(v, 0);
    if (!field.region().contains(w)) continue;
    pairs += 1;
    both += cfg.open(v) && cfg.open(w);
  }
  CHECK(std::abs(both - pairs / 4) < 5 * std::sqrt(pairs * 3.0 / 16));
}

TEST_CASE("field values are reproducible and seed dependent") {
  const CouplingField a(ball(5), 1), b(ball(5), 1), c(ball(5), 2);
  CHECK(a.bits({2, 1}) == b.bits({2, 1}));
  CHECK(a.bits({2, 1}) != c.bits({2, 1}));
  CHECK(a.value({0, 0}) >= 0.0);
  CHECK(a.value({0, 0}) < 1.0);
  CHECK(derive_seed(7, 0) != derive_seed(7, 1));
  CHECK(derive_seed(7, 0) != derive_seed(8, 0));
}

TEST_CASE("configuration file round trip") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "fpplab_roundtrip.fppc";
  for (const RegionPtr& region :
       std::vector<RegionPtr>{ball(17.5), std::make_shared<LatticeRegion>(LatticeRegion::annulus({2, -3}, 3, 9)),
        std::make_shared<LatticeRegion>(LatticeRegion::rhombus({-4, 1}, 13))}) {
    const Configuration cfg = sample_configuration(region, 0.37, 77);
    save(cfg, path);
    CHECK(load_configuration(path) == cfg);
  }
  std::vector<Site> custom{{0, 0}, {5, 5}, {-3, 2}};
  Configuration cfg(std::make_shared<LatticeRegion>(LatticeRegion::custom(custom)), 0.5);
  cfg.set_open({5, 5}, true);
  save(cfg, path);
  const Configuration back = load_configuration(path);
  CHECK(back == cfg);
  CHECK(back.open({5, 5}));
  CHECK_FALSE(back.open({0, 0}));

  const CouplingField field(ball(9), 4242);
  save(field, path);
  CHECK(load_field(path) == field);
  CHECK_THROWS_AS(load_configuration(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt and foreign files are rejected") {
  const Configuration cfg = sample_configuration(ball(8), 0.5, 3);
  std::string bytes = encode(cfg);
  CHECK(decode_configuration(bytes) == cfg);
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  CHECK_THROWS_AS(decode_configuration(flipped), FormatError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_configuration(magic), FormatError);
  CHECK_THROWS_AS(decode_configuration(bytes.substr(0, 10)), FormatError);
}
