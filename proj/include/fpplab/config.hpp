#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "fpplab/lattice.hpp"

namespace fpplab {

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for sample `index` of a run keyed by `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master ^ 0x5851f42d4c957f2dULL) + index * 0x9e3779b97f4a7c15ULL);
}

/// Counter-based uniform bits for a site: U_v = bits / 2^64.
class SiteHash {
 public:
  explicit constexpr SiteHash(std::uint64_t seed) : key_(mix64(seed ^ 0x9e3779b97f4a7c15ULL)) {}
  constexpr std::uint64_t operator()(Site v) const {
    const std::uint64_t z = mix64(pack(v) + key_);
    return mix64(z ^ ((key_ << 32) | (key_ >> 32)));
  }

 private:
  std::uint64_t key_;
};

/// floor(p * 2^64), saturated; a site is open iff its bits do not exceed this value.
std::uint64_t probability_threshold(double p);

/// The coupling field U on a region. Values are recomputed on demand from the seed.
class CouplingField {
 public:
  CouplingField(RegionPtr region, std::uint64_t seed);

  const LatticeRegion& region() const { return *region_; }
  const RegionPtr& region_ptr() const { return region_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t bits(Site v) const { return hash_(v); }
  double value(Site v) const;

  friend bool operator==(const CouplingField& a, const CouplingField& b) {
    return a.seed_ == b.seed_ && *a.region_ == *b.region_;
  }

 private:
  RegionPtr region_;
  std::uint64_t seed_;
  SiteHash hash_;
};

struct Provenance {
  std::uint64_t seed = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Open (blue, passage time 0) or closed (yellow, passage time 1) state of each region site.
class Configuration {
 public:
  Configuration(RegionPtr region, double p, bool all_open = false);

  const LatticeRegion& region() const { return *region_; }
  const RegionPtr& region_ptr() const { return region_; }
  const Grid& grid() const { return region_->grid(); }
  double p() const { return p_; }

  bool open(Site v) const;
  bool open_cell(std::uint32_t c) const { return open_.test(c); }
  int weight(Site v) const { return open(v) ? 0 : 1; }
  void set_open(Site v, bool is_open);
  void set_open_cell(std::uint32_t c, bool is_open) { open_.assign(c, is_open); }
  const BitGrid& open_bits() const { return open_; }

  std::optional<Provenance> provenance;

  friend bool operator==(const Configuration& a, const Configuration& b);

 private:
  RegionPtr region_;
  double p_;
  BitGrid open_;
};

Configuration threshold(const CouplingField& field, double p);
/// Fresh field on `region` thresholded at p.
Configuration sample_configuration(RegionPtr region, double p, std::uint64_t seed);

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void save(const Configuration& cfg, const std::filesystem::path& path);
void save(const CouplingField& field, const std::filesystem::path& path);
Configuration load_configuration(const std::filesystem::path& path);
CouplingField load_field(const std::filesystem::path& path);

std::string encode(const Configuration& cfg);
std::string encode(const CouplingField& field);
Configuration decode_configuration(const std::string& bytes);
CouplingField decode_field(const std::string& bytes);

}  // namespace fpplab
