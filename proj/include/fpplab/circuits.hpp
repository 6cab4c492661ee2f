#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpplab/config.hpp"

namespace fpplab {

enum class PeelOrder { InnermostFirst, OutermostFirst };

/// Disjoint closed circuits surrounding B(r) inside A(r,R), listed in discovery order.
struct CircuitDecomposition {
  double r = 0;
  double R = 0;
  PeelOrder order = PeelOrder::InnermostFirst;
  std::vector<std::vector<Site>> circuits;

  std::size_t count() const { return circuits.size(); }
};

/// Greedy peeling of closed circuits. Each circuit is counterclockwise and starts at its
/// smallest site. The count equals the annulus crossing time.
CircuitDecomposition peel(const Configuration& cfg, double r, double R, PeelOrder order = PeelOrder::InnermostFirst);

/// Peeling with the circuit color chosen: open circuits when `open`. Stops after `limit` circuits.
CircuitDecomposition peel_colored(const Configuration& cfg, double r, double R, PeelOrder order, bool open,
                                  std::size_t limit = static_cast<std::size_t>(-1));

/// rho(r,R): the maximal number of disjoint closed circuits surrounding B(r) in A(r,R).
std::size_t rho(const Configuration& cfg, double r, double R);

struct LoopInfo {
  double inner_radius = 0;  // closest support site
  double outer_radius = 0;  // farthest support site
  bool counterclockwise = false;  // open sites on the inner side
  std::size_t cluster_size = 0;   // outer cluster
};

/// Cluster boundary loops surrounding the origin in B(R), outermost first. With
/// blue_boundary the outer rim of B(R) is forced open.
std::vector<LoopInfo> surrounding_loops(const Configuration& cfg, double R, bool blue_boundary);

/// N(r,R): loops surrounding B(r) inside A(r,R).
struct LoopCount {
  std::size_t count = 0;
  std::vector<LoopInfo> loops;
};
LoopCount loop_count(const Configuration& cfg, double r, double R, bool blue_boundary);

/// Flips the colors of the nested domains cut out by an outermost-first peeling.
Configuration color_switch(const Configuration& cfg, const CircuitDecomposition& decomposition);

enum class ArmEvent { OneArmBlue, OneArmClosed, OpenCircuit, FourArmPivotal };

struct ArmEventSpec {
  ArmEvent kind = ArmEvent::OneArmBlue;
  Site center = kOrigin;
  double r = 1;
  double R = 2;
};

bool detect_event(const Configuration& cfg, const ArmEventSpec& spec);

/// OneArmBlue(r, R) for every R in Rs from a single flood.
std::vector<bool> one_arm_events(const Configuration& cfg, double r, std::span<const double> Rs);
/// Same, read lazily from a coupling field at p.
std::vector<bool> one_arm_events(const CouplingField& field, double p, double r, std::span<const double> Rs);

struct NestingLevel {
  double R = 0;
  double shell_inner = 0;
  double shell_outer = 0;
  /// 1-based outermost-first indices of circuits of B(R) contained in the shell.
  std::vector<std::size_t> indices;
  bool outer_loop_ok = false;
};

/// For j = 1..k, peels B((M/eps)^j) from the outside and locates the circuits that lie
/// in the shell A(eps R / M, eps R).
std::vector<NestingLevel> nesting_profile(const Configuration& cfg, double eps, double M, int k);

/// Nesting event on one level: the outer loop condition holds and the shell circuit
/// indices all lie in [nu log(1/eps), (nu + delta) log(1/eps)].
bool nesting_event(const NestingLevel& level, double eps, double nu, double delta);

}  // namespace fpplab
