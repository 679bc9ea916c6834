#pragma once

#include "dynedge/closedloop.hpp"
#include "dynedge/network.hpp"
#include "dynedge/synthesis.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dynedge {

struct SimParams {
  double dt = 1e-3;
  double t_end = 10.0;
  int record_every = 1;
  double window = 1.0;  // trailing window for error metrics
};

/// Everything needed to build controllers and run a simulation. `specs`
/// is either empty (synthesize every node) or holds one entry per node.
struct Scenario {
  std::string name;
  Network net;
  Exosystem exo;
  Regime regime = Regime::Tracking;
  std::vector<Role> roles;
  std::vector<ControllerSpec> specs;
  double eps = 0.0;
  References refs;
  SimParams sim;
  std::uint64_t seed = 1;
};

enum class GroundMode { Exact, HighGain };

/// Three-bus network: two inverter sources (slaves) feeding RL lines into a
/// ground bus (master). Exact mode pins the ground voltage to its reference;
/// high-gain mode gives it a filter capacitor and a stiff tracking loop.
Scenario demo_power_network(GroundMode mode = GroundMode::Exact);

struct RandomOptions {
  int N = 3;
  int M = 3;
  int max_dim = 3;  // node and edge state dimension bound
  int p = 1;
  Regime regime = Regime::Tracking;
  int masters = 1;  // master-slave only: nodes 1..masters are masters
};

/// Seeded random scenario with a connected topology, hyper-minimum-phase
/// nodes (B = D) and strictly positive real edges, all by construction.
/// Throws InfeasibleDims for unsupported sizes.
Scenario random_network(std::uint64_t seed, const RandomOptions& opts);

struct CheckItem {
  std::string assumption;  // "A1".."A6"
  std::string subject;     // "node 2", "edge 1", "network", ...
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<CheckItem> items;
  std::vector<std::string> warnings;

  bool passed() const;
};

/// A1..A5 for every entity (A6 for cooperation scenarios), with margins.
AssumptionReport check_assumptions(const Scenario& sc);

/// Controllers for the scenario (explicit gains verified, the rest synthesized).
ControllerSet build_controllers(const Scenario& sc);

}  // namespace dynedge
