#pragma once

#include "dynedge/analysis.hpp"
#include "dynedge/network.hpp"
#include "dynedge/synthesis.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dynedge {

enum class EntityKind { NodeState, ControllerState, EdgeState, ReferenceState, ExoState };

std::string to_string(EntityKind k);

/// One contiguous block of a state vector. `id` is the 0-based node or edge
/// index (for error coordinates of the reference generators: the row of T,
/// or the slave's node index in the master-slave form).
struct IndexEntry {
  EntityKind kind = EntityKind::NodeState;
  int id = 0;
  Eigen::Index offset = 0;
  Eigen::Index length = 0;
};

/// Linear read-outs of the simulation state, one p x n_total matrix per node.
struct SignalMaps {
  std::vector<Matrix> y;
  std::vector<Matrix> v;
  std::vector<Matrix> ref;
  std::vector<Matrix> err;
};

struct ClosedLoop {
  Regime regime = Regime::Tracking;
  double eps = 0.0;
  Matrix A_full;                     // simulation form
  std::vector<IndexEntry> index_map;
  SignalMaps signals;
  Matrix A_err;                      // error coordinates (empty for the reduced form)
  std::vector<IndexEntry> error_index;

  Eigen::Index size() const { return A_full.rows(); }
  /// First entry with this kind and id; throws IndexOutOfRange.
  const IndexEntry& entry(EntityKind kind, int id) const;
};

/// Initial reference states per node: eta for tracking/sync/master nodes,
/// nu and etabar for cooperation/slave nodes. Missing vectors mean zero.
struct References {
  std::vector<Vector> eta;
  std::vector<Vector> nu;
  std::vector<Vector> etabar;
};

/// Simulation form plus the regime's error-coordinate matrix.
ClosedLoop assemble(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps);
ClosedLoop assemble(const Network& net, const ControllerSet& ctrl);

/// Error-coordinate matrix alone (what the stability tests use).
Matrix error_matrix(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps);

/// Edges and reference generators under perfect node tracking
/// (y_i = G_Q etabar_i): states etabar_i, nu_i per node, then z_j.
/// Cooperation regime only; A_err is left empty.
ClosedLoop assemble_reduced_cooperation(const Network& net, const ControllerSet& ctrl);

/// Zero plant, controller and edge states; reference blocks from `refs`.
Vector initial_state(const ClosedLoop& cl, const References& refs);

struct EpsProbe {
  double eps = 0.0;
  double abscissa = 0.0;
};

struct LemmaEpsBound {
  double eps_bound = 0.0;    // eps_bar / ||coupling block||
  double coupling_norm = 0.0;
  Lemma1Certificate cert;
};

struct EpsStar {
  double eps_bisect = 0.0;   // stable end of the final bracket
  double bracket_hi = 0.0;
  bool at_upper_limit = false;
  std::vector<EpsProbe> probes;
  std::optional<LemmaEpsBound> lemma;
  std::string lemma_note;    // why the bound is missing, when it is
};

struct EpsOptions {
  int probes = 16;
  double decades = 8.0;
  double rel_width = 1e-3;
  double stable_below = -1e-9;
};

/// Spectral abscissa of the error coordinates at a given eps.
double error_abscissa(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps, double eps);

/// Block-certificate bound for the (e_x, e_z) block; throws HypothesisViolated.
LemmaEpsBound lemma_eps_bound(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps);

/// Largest stable eps up to eps_hi: log-spaced probes, then bisection of
/// the bracket above the largest stable probe. Throws NoStableEps.
EpsStar epsilon_star(const Network& net, const ControllerSet& ctrl, double eps_hi, const EpsOptions& opts = {});

}  // namespace dynedge
