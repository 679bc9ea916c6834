#pragma once

#include "dynedge/types.hpp"

#include <utility>
#include <vector>

namespace dynedge {

/// Oriented edge, 1-based node indices as in the config format.
struct EdgeEnds {
  int positive = 0;
  int negative = 0;
  bool operator==(const EdgeEnds&) const = default;
};

/// Graph structure of the network. H is the N x M incidence matrix; T and
/// Hbar = T H are filled only for N >= 2 (see with_complement).
struct Topology {
  int N = 0;
  int M = 0;
  Matrix H;
  Matrix T;
  Matrix Hbar;

  bool has_complement() const { return T.rows() > 0 || N == 1; }
};

/// H[i][j] = +1 if node i is the positive end of edge j, -1 if negative.
Topology incidence_from_edge_list(const std::vector<EdgeEnds>& edges, int N);

/// Validates a user-supplied incidence matrix (one +1 and one -1 per column).
Topology topology_from_incidence(const Matrix& H);

/// Edge list recovered from the columns of H.
std::vector<EdgeEnds> edge_list(const Topology& topo);

/// rank(H) == N - 1 via singular values thresholded at 1e-10 sigma_max.
bool check_connected(const Matrix& H);

/// Helmert-style orthonormal basis of the complement of the ones vector:
/// row k is proportional to e_1 + ... + e_k - k e_{k+1}.
Matrix complement_basis(int N);

/// Returns topo with T and Hbar = T H filled in.
Topology with_complement(Topology topo);

/// Block matrix with block (i, j) = h(i, j) * left[i] * right[j]. An empty
/// `left` or `right` list stands for identity factors; with both empty the
/// result is h itself.
Matrix assemble_weighted_blocks(const Matrix& h, const std::vector<Matrix>& left,
                                const std::vector<Matrix>& right);

/// Numerical rank with the library-wide relative singular value threshold.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol = tol::kRank);

}  // namespace dynedge
