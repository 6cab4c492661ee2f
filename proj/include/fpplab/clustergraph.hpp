#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "fpplab/config.hpp"

namespace fpplab {

inline constexpr std::int64_t kUnreachable = -1;

struct ClusterInfo {
  bool open = false;
  std::vector<Site> sites;  // (y, x) order
  bool touches_frame = false;  // some site has a neighbor outside the region

  std::size_t size() const { return sites.size(); }
};

/// Same-color connected components of the region, both colors.
struct ClusterPartition {
  RegionPtr region;
  std::vector<std::int32_t> id;  // per grid cell, -1 off the region
  std::vector<ClusterInfo> clusters;

  std::int32_t cluster_of(Site v) const;
};

ClusterPartition clusters(const Configuration& cfg);

/// Open clusters joined when one closed site touches both. The frame exterior is treated as
/// an open sea: components joined to it through the frame form the infinite-component proxy.
struct ClusterGraphModel {
  std::vector<std::int32_t> vertices;  // open cluster ids, ascending
  std::vector<std::vector<std::int32_t>> adjacency;  // by cluster id, sorted; empty for closed clusters
  std::vector<std::int32_t> component;  // by cluster id, -1 for closed clusters
  std::vector<bool> component_sea_linked;  // by component

  std::size_t edge_count() const;
  bool in_infinite_proxy(std::int32_t cluster) const;
  bool proxy_empty() const;
};

ClusterGraphModel build_cluster_graph(const Configuration& cfg, const ClusterPartition& partition);

/// Breadth-first distance, or kUnreachable across components.
std::int64_t graph_distance(const ClusterGraphModel& model, std::int32_t a, std::int32_t b);

/// C_n: the open cluster carrying the innermost open circuit around B(n), by peeling.
std::optional<std::int32_t> innermost_surrounding_cluster(const Configuration& cfg, const ClusterPartition& partition,
                                                          double n);

/// A site of C_n found from the closed flood of B(n): the first site past the flood on the
/// positive axis. Empty when the flood reaches the frame.
std::optional<Site> innermost_surrounding_site(const Configuration& cfg, double n);

struct DoubleCircuit {
  std::vector<Site> inner;
  std::vector<Site> outer;
};

/// Closed double circuits around the origin (around its open cluster if 0 is open),
/// innermost first.
std::vector<DoubleCircuit> find_double_circuits(const Configuration& cfg);

/// Same, around a given open cluster.
std::vector<DoubleCircuit> find_double_circuits(const Configuration& cfg, const ClusterPartition& partition,
                                                std::int32_t cluster);

/// Both circuits closed and counterclockwise, disjoint, nested, mutually adjacent, nothing between.
bool verify_double_circuit(const Configuration& cfg, const DoubleCircuit& dc);

struct BridgeError : std::runtime_error {
  BridgeError(const std::string& what, Site a, Site b) : std::runtime_error(what), from(a), to(b) {}
  Site from;
  Site to;
};

/// Circuit in the parallelogram sublattice built from the inner circuit by routing each
/// (-1,1) bond through the common neighbor on the outer circuit.
std::vector<Site> sublattice_bridge(const DoubleCircuit& dc);
bool is_sublattice_circuit(std::span<const Site> cycle);

/// Euclidean distance from the origin to the infinite-component proxy.
double distance_to_infinite_component(const Configuration& cfg, const ClusterPartition& partition,
                                      const ClusterGraphModel& model);
double distance_to_infinite_component(const Configuration& cfg);

/// "id: n1,n2,..." per open cluster, plus "id,color,size,surrounds_origin" metadata lines.
void export_cluster_graph(const ClusterPartition& partition, const ClusterGraphModel& model, std::ostream& adjacency,
                          std::ostream& metadata);

/// Cluster-graph distances computed on sites: a 0-1 search from the cluster of `source`
/// that never steps between two closed sites. Targets that are closed or unreachable give
/// kUnreachable.
struct ClusterDistances {
  std::vector<std::int64_t> to_targets;
  bool sea_linked = false;
  std::int64_t to_sea = kUnreachable;  // distance to the open exterior
};
ClusterDistances cluster_distances(const Configuration& cfg, Site source, std::span<const Site> targets);

/// Loop graph: interface loops between clusters, adjacent when one hexagon touches both.
/// Loop vertices are the triangles of the lattice (corners of hexagons); triangle 2c is
/// {v, v+(1,0), v+(0,1)} and 2c+1 is {v, v+(1,0), v+(1,-1)} for the site v in cell c.
struct LoopGraphModel {
  RegionPtr region;
  BitGrid open;  // site colors
  std::vector<std::int32_t> label;  // per triangle, -1 if one-colored
  std::vector<std::vector<std::int32_t>> adjacency;
  std::vector<std::int32_t> component;
  std::vector<bool> component_sea_linked;

  std::size_t loop_count() const { return adjacency.size(); }
  /// Loop crossing the edge between adjacent sites a and b, or -1 if they share a color.
  std::int32_t loop_at(Site a, Site b) const;
  bool in_infinite_proxy(std::int32_t loop) const;
};

LoopGraphModel build_loop_graph(const Configuration& cfg);
std::int64_t loop_distance(const LoopGraphModel& model, std::int32_t a, std::int32_t b);

/// The innermost loop around the closed disc of radius n (the origin for n = 0), given by
/// the axis position k of the edge (k,0)-(k+1,0) where it first crosses the positive axis.
std::optional<std::int32_t> innermost_loop_crossing(const Configuration& cfg, double n);

struct LoopDistances {
  std::vector<std::int64_t> to_targets;
  bool sea_linked = false;
  std::int64_t to_sea = kUnreachable;  // distance to a loop touching the exterior
};
/// Loop-graph distances from the loop through axis edge `source` to loops through axis edges
/// `targets`, by a 0-1 search on triangles.
LoopDistances loop_distances(const Configuration& cfg, std::int32_t source, std::span<const std::int32_t> targets);

/// D(C_0, C_n) cut off at the frame: the smaller of the distance to C_n and to the exterior,
/// which any path to the exterior must cross C_n to reach. Needs 0 open; empty when neither
/// is reachable.
std::optional<std::int64_t> truncated_cluster_distance(const Configuration& cfg, double n);
/// The loop-graph analog, from the innermost loop around 0 to the one around the disc of
/// radius n.
std::optional<std::int64_t> truncated_loop_distance(const Configuration& cfg, double n);

}  // namespace fpplab
