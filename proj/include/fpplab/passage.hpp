#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fpplab/config.hpp"

namespace fpplab {

using SitePredicate = std::function<bool(Site)>;

struct PassageOutcome {
  bool reachable = false;
  std::int64_t time = -1;
  /// Source to target, endpoints included.
  std::vector<Site> geodesic;
};

/// Minimum passage time from any source to any target, counting the weights of both endpoints.
/// Paths stay inside the configuration region and, if given, inside `allowed`.
PassageOutcome passage_time(const Configuration& cfg, std::span<const Site> sources, const SitePredicate& is_target,
                            const SitePredicate& allowed = {}, bool want_path = true);

PassageOutcome passage_time(const Configuration& cfg, std::span<const Site> A, std::span<const Site> B,
                            const LatticeRegion* confine = nullptr, bool want_path = true);

/// c_n: passage time from the origin to the complement of B(n).
PassageOutcome exit_time(const Configuration& cfg, double n, bool want_path = true);

/// a_{0,n}: passage time from the origin to (n, 0).
PassageOutcome point_to_point(const Configuration& cfg, std::int32_t n, bool want_path = true);

struct AnnulusRims {
  std::vector<Site> inner;  // annulus sites with a neighbor in B(r)
  std::vector<Site> outer;  // annulus sites with a neighbor outside B(R)
};
AnnulusRims annulus_rims(double r, double R, Site center = kOrigin);

/// T(A(r,R)): least passage time of a path inside the annulus joining its two rims.
PassageOutcome annulus_crossing(const Configuration& cfg, double r, double R, bool want_path = true);

/// c_n for every n in `radii` from a single level-by-level exploration.
std::vector<std::int64_t> exit_times(const Configuration& cfg, std::span<const double> radii);

/// Same two quantities read lazily from a coupling field thresholded at p: only explored
/// sites are evaluated, so large frames cost what the exploration touches.
std::vector<std::int64_t> exit_times(const CouplingField& field, double p, std::span<const double> radii);
/// a_{0,n} with paths confined to the field's region.
std::int64_t point_to_point(const CouplingField& field, double p, std::int32_t n);

/// Checks that the path is a valid optimal path for the stated problem.
bool verify_geodesic(const Configuration& cfg, const PassageOutcome& outcome, std::span<const Site> sources,
                     const SitePredicate& is_target, const SitePredicate& allowed = {});

}  // namespace fpplab
