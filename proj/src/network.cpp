#include "dynedge/network.hpp"

#include "dynedge/error.hpp"

#include <string>

namespace dynedge {

void validate_network(const Network& net, Eigen::Index p) {
  const int N = net.N();
  const int M = net.M();
  if (N < 1) fail(ErrorCode::DimensionMismatch, "network has no nodes");
  if (net.topo.H.rows() != N || net.topo.H.cols() != M)
    fail(ErrorCode::DimensionMismatch, "incidence matrix is " + std::to_string(net.topo.H.rows()) + "x" +
                                           std::to_string(net.topo.H.cols()) + " for " + std::to_string(N) +
                                           " nodes and " + std::to_string(M) + " edges");
  for (int i = 0; i < N; ++i) {
    const auto& nd = net.nodes[static_cast<std::size_t>(i)];
    if (nd.ideal) continue;
    const auto& s = nd.sys;
    const auto n = s.A.rows();
    const std::string who = "node " + std::to_string(i + 1);
    if (s.A.cols() != n || s.B.rows() != n || s.C.cols() != n || s.D_in.rows() != n)
      fail(ErrorCode::DimensionMismatch, who + ": A, B, C, D are not conformable");
    if (s.C.rows() != p || s.D_in.cols() != p)
      fail(ErrorCode::DimensionMismatch, who + ": output and neighbouring input must have dimension " + std::to_string(p));
    if (n == 0) fail(ErrorCode::DimensionMismatch, who + ": empty state");
  }
  for (int j = 0; j < M; ++j) {
    const auto& e = net.edges[static_cast<std::size_t>(j)];
    const auto n = e.E.rows();
    const std::string who = "edge " + std::to_string(j + 1);
    if (e.E.cols() != n || e.F.rows() != n || e.G.cols() != n || n == 0)
      fail(ErrorCode::DimensionMismatch, who + ": E, F, G are not conformable");
    if (e.F.cols() != p || e.G.rows() != p)
      fail(ErrorCode::DimensionMismatch, who + ": input and output must have dimension " + std::to_string(p));
  }
}

}  // namespace dynedge
