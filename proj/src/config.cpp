#include "fpplab/config.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fpplab {

std::uint64_t probability_threshold(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  if (p >= 1.0) return ~std::uint64_t{0};
  // p * 2^64 is exact in binary64, and below 2^64 here.
  return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

CouplingField::CouplingField(RegionPtr region, std::uint64_t seed)
    : region_(std::move(region)), seed_(seed), hash_(seed) {
  if (!region_) throw std::invalid_argument("null region");
}

double CouplingField::value(Site v) const { return std::ldexp(static_cast<double>(hash_(v) >> 11), -53); }

Configuration::Configuration(RegionPtr region, double p, bool all_open)
    : region_(std::move(region)), p_(p) {
  if (!region_) throw std::invalid_argument("null region");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
  open_ = BitGrid(region_->grid().cells());
  if (all_open) open_ = region_->members();
}

bool Configuration::open(Site v) const {
  if (!region_->contains(v)) throw std::out_of_range("site outside configuration region");
  return open_.test(grid().cell(v));
}

void Configuration::set_open(Site v, bool is_open) {
  if (!region_->contains(v)) throw std::out_of_range("site outside configuration region");
  open_.assign(grid().cell(v), is_open);
}

bool operator==(const Configuration& a, const Configuration& b) {
  if (a.p_ != b.p_ || a.provenance != b.provenance || !(*a.region_ == *b.region_)) return false;
  bool same = true;
  a.region_->for_each_cell([&](std::uint32_t c) {
    if (same && a.open_.test(c) != b.open(a.grid().site(c))) same = false;
  });
  return same;
}

Configuration threshold(const CouplingField& field, double p) {
  const std::uint64_t cut = probability_threshold(p);
  Configuration cfg(field.region_ptr(), p);
  const Grid& g = field.region().grid();
  const BitGrid& members = field.region().members();
  const SiteHash hash(field.seed());
  for (std::uint32_t row = 0; row < g.height(); ++row) {
    const std::int32_t y = g.ymin() + static_cast<std::int32_t>(row);
    const std::uint32_t base = row * g.width();
    for (std::uint32_t col = 0; col < g.width(); ++col) {
      const std::uint32_t c = base + col;
      if (!members.test(c)) continue;
      if (hash(Site{g.xmin() + static_cast<std::int32_t>(col), y}) <= cut) cfg.set_open_cell(c, true);
    }
  }
  cfg.provenance = Provenance{field.seed()};
  return cfg;
}

Configuration sample_configuration(RegionPtr region, double p, std::uint64_t seed) {
  return threshold(CouplingField(std::move(region), seed), p);
}

// ---- binary format ----

namespace {

constexpr char kMagic[4] = {'F', 'P', 'P', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint8_t kFlagField = 1;
constexpr std::uint8_t kFlagProvenance = 2;

class Writer {
 public:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& s, std::size_t end) : s_(s), end_(end) {}
  std::uint8_t u8() {
    if (pos_ >= end_) throw FormatError("truncated configuration file");
    return static_cast<std::uint8_t>(s_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{u8()} << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{u8()} << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == end_; }

 private:
  const std::string& s_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::int32_t narrow(std::int64_t v) {
  if (v < -kCoordinateLimit || v > kCoordinateLimit) throw FormatError("coordinate out of range");
  return static_cast<std::int32_t>(v);
}

void write_region(Writer& w, const LatticeRegion& r) {
  w.u64(static_cast<std::uint64_t>(r.shape()));
  switch (r.shape()) {
    case RegionShape::Ball:
      w.i64(r.center().x), w.i64(r.center().y), w.f64(r.outer_radius());
      break;
    case RegionShape::Annulus:
      w.i64(r.center().x), w.i64(r.center().y), w.f64(r.inner_radius()), w.f64(r.outer_radius());
      break;
    case RegionShape::Rhombus:
      w.i64(r.center().x), w.i64(r.center().y), w.i64(r.side());
      break;
    case RegionShape::Custom: {
      const auto sites = r.sites();
      w.u64(sites.size());
      for (const Site s : sites) w.i64(s.x), w.i64(s.y);
      break;
    }
  }
}

RegionPtr read_region(Reader& rd) {
  const std::uint64_t tag = rd.u64();
  switch (tag) {
    case static_cast<std::uint64_t>(RegionShape::Ball): {
      const Site c{narrow(rd.i64()), narrow(rd.i64())};
      return std::make_shared<LatticeRegion>(LatticeRegion::ball(c, rd.f64()));
    }
    case static_cast<std::uint64_t>(RegionShape::Annulus): {
      const Site c{narrow(rd.i64()), narrow(rd.i64())};
      const double r = rd.f64();
      return std::make_shared<LatticeRegion>(LatticeRegion::annulus(c, r, rd.f64()));
    }
    case static_cast<std::uint64_t>(RegionShape::Rhombus): {
      const Site o{narrow(rd.i64()), narrow(rd.i64())};
      return std::make_shared<LatticeRegion>(LatticeRegion::rhombus(o, narrow(rd.i64())));
    }
    case static_cast<std::uint64_t>(RegionShape::Custom): {
      const std::uint64_t n = rd.u64();
      std::vector<Site> sites;
      for (std::uint64_t i = 0; i < n; ++i) sites.push_back({narrow(rd.i64()), narrow(rd.i64())});
      return std::make_shared<LatticeRegion>(LatticeRegion::custom(sites));
    }
    default:
      throw FormatError("unknown region shape tag");
  }
}

std::uint32_t crc_of(const std::string& s, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(n)));
}

std::string finish(Writer& w) {
  w.u32(crc_of(w.str(), w.str().size()));
  return std::move(w.str());
}

Reader open_payload(const std::string& bytes, std::uint8_t& flags) {
  if (bytes.size() < 13 || bytes.compare(0, 4, kMagic, 4) != 0) throw FormatError("bad magic");
  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= std::uint32_t{static_cast<std::uint8_t>(bytes[body + i])} << (8 * i);
  if (stored != crc_of(bytes, body)) throw FormatError("checksum mismatch");
  Reader rd(bytes, body);
  for (int i = 0; i < 4; ++i) rd.u8();
  if (rd.u32() != kVersion) throw FormatError("unsupported format version");
  flags = rd.u8();
  return rd;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string encode(const Configuration& cfg) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.u8(cfg.provenance ? kFlagProvenance : 0);
  write_region(w, cfg.region());
  w.f64(cfg.p());
  if (cfg.provenance) w.u64(cfg.provenance->seed);
  std::uint8_t byte = 0;
  int nbits = 0;
  cfg.region().for_each_cell([&](std::uint32_t c) {
    if (cfg.open_cell(c)) byte |= static_cast<std::uint8_t>(1u << nbits);
    if (++nbits == 8) w.u8(byte), byte = 0, nbits = 0;
  });
  if (nbits) w.u8(byte);
  return finish(w);
}

std::string encode(const CouplingField& field) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.u8(kFlagField | kFlagProvenance);
  write_region(w, field.region());
  w.f64(0.0);
  w.u64(field.seed());
  field.region().for_each_cell([&](std::uint32_t c) { w.u64(field.bits(field.region().grid().site(c))); });
  return finish(w);
}

Configuration decode_configuration(const std::string& bytes) {
  std::uint8_t flags = 0;
  Reader rd = open_payload(bytes, flags);
  if (flags & kFlagField) throw FormatError("file holds a coupling field, not a configuration");
  RegionPtr region = read_region(rd);
  const double p = rd.f64();
  if (!(p >= 0.0 && p <= 1.0)) throw FormatError("p outside [0,1]");
  Configuration cfg(region, p);
  if (flags & kFlagProvenance) cfg.provenance = Provenance{rd.u64()};
  std::uint8_t byte = 0;
  int nbits = 8;
  region->for_each_cell([&](std::uint32_t c) {
    if (nbits == 8) byte = rd.u8(), nbits = 0;
    cfg.set_open_cell(c, (byte >> nbits++) & 1u);
  });
  if (!rd.done()) throw FormatError("trailing bytes in payload");
  return cfg;
}

CouplingField decode_field(const std::string& bytes) {
  std::uint8_t flags = 0;
  Reader rd = open_payload(bytes, flags);
  if (!(flags & kFlagField)) throw FormatError("file holds a configuration, not a coupling field");
  RegionPtr region = read_region(rd);
  rd.f64();
  CouplingField field(region, rd.u64());
  region->for_each_cell([&](std::uint32_t c) {
    if (rd.u64() != field.bits(region->grid().site(c))) throw FormatError("field values do not match seed");
  });
  if (!rd.done()) throw FormatError("trailing bytes in payload");
  return field;
}

void save(const Configuration& cfg, const std::filesystem::path& path) { write_file(path, encode(cfg)); }
void save(const CouplingField& field, const std::filesystem::path& path) { write_file(path, encode(field)); }
Configuration load_configuration(const std::filesystem::path& path) { return decode_configuration(read_file(path)); }
CouplingField load_field(const std::filesystem::path& path) { return decode_field(read_file(path)); }

}  // namespace fpplab
