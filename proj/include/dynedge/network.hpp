#pragma once

#include "dynedge/topology.hpp"
#include "dynedge/types.hpp"

#include <vector>

namespace dynedge {

/// z' = E z + F s,  w = G z.
struct EdgeModel {
  Matrix E;
  Matrix F;
  Matrix G;

  Eigen::Index states() const { return E.rows(); }
};

/// A node is either an LTI plant x' = A x + B u + D v, y = C x, or an
/// ideal node whose output is pinned to its reference (y = Q_eta eta) and
/// which therefore carries no plant or controller state.
struct NodeModel {
  LtiSystem sys;
  bool ideal = false;

  Eigen::Index states() const { return ideal ? 0 : sys.A.rows(); }
};

struct Network {
  std::vector<NodeModel> nodes;
  std::vector<EdgeModel> edges;
  Topology topo;

  int N() const { return static_cast<int>(nodes.size()); }
  int M() const { return static_cast<int>(edges.size()); }
};

/// Shape checks shared by every consumer: H matches the node/edge lists,
/// node blocks are consistent, all outputs have dimension p, edges map
/// R^p to R^p. Throws DimensionMismatch naming the offending entity.
void validate_network(const Network& net, Eigen::Index p);

}  // namespace dynedge
