#include "dynedge/topology.hpp"

#include "dynedge/error.hpp"

#include <cmath>
#include <string>

namespace dynedge {

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

Topology incidence_from_edge_list(const std::vector<EdgeEnds>& edges, int N) {
  if (N < 1) fail(ErrorCode::DimensionTooSmall, "node count must be >= 1");
  Topology topo;
  topo.N = N;
  topo.M = static_cast<int>(edges.size());
  topo.H = Matrix::Zero(N, topo.M);
  for (int j = 0; j < topo.M; ++j) {
    const auto& e = edges[static_cast<std::size_t>(j)];
    if (e.positive < 1 || e.positive > N || e.negative < 1 || e.negative > N)
      fail(ErrorCode::IndexOutOfRange, "edge " + std::to_string(j + 1) + " references a node outside [1, " +
                                           std::to_string(N) + "]");
    if (e.positive == e.negative)
      fail(ErrorCode::SelfLoop, "edge " + std::to_string(j + 1) + " connects node " +
                                    std::to_string(e.positive) + " to itself");
    topo.H(e.positive - 1, j) = 1.0;
    topo.H(e.negative - 1, j) = -1.0;
  }
  return topo;
}

Topology topology_from_incidence(const Matrix& H) {
  if (H.rows() < 1) fail(ErrorCode::DimensionTooSmall, "incidence matrix has no rows");
  for (Eigen::Index j = 0; j < H.cols(); ++j) {
    int plus = 0, minus = 0;
    for (Eigen::Index i = 0; i < H.rows(); ++i) {
      const double h = H(i, j);
      if (h == 1.0) ++plus;
      else if (h == -1.0) ++minus;
      else if (h != 0.0)
        fail(ErrorCode::ValidationError, "H column " + std::to_string(j + 1) + " has an entry outside {-1,0,1}");
    }
    if (plus != 1 || minus != 1)
      fail(ErrorCode::ValidationError, "H column " + std::to_string(j + 1) +
                                           " must have exactly one +1 and one -1 entry");
  }
  Topology topo;
  topo.N = static_cast<int>(H.rows());
  topo.M = static_cast<int>(H.cols());
  topo.H = H;
  return topo;
}

std::vector<EdgeEnds> edge_list(const Topology& topo) {
  std::vector<EdgeEnds> out;
  for (int j = 0; j < topo.M; ++j) {
    EdgeEnds e;
    for (int i = 0; i < topo.N; ++i) {
      if (topo.H(i, j) > 0.5) e.positive = i + 1;
      if (topo.H(i, j) < -0.5) e.negative = i + 1;
    }
    out.push_back(e);
  }
  return out;
}

bool check_connected(const Matrix& H) {
  const auto N = H.rows();
  if (N <= 1) return true;
  return numerical_rank(H) == N - 1;
}

Matrix complement_basis(int N) {
  if (N < 2) fail(ErrorCode::DimensionTooSmall, "complement basis needs N >= 2");
  Matrix T = Matrix::Zero(N - 1, N);
  for (int k = 1; k < N; ++k) {
    // e_1 + ... + e_k - k e_{k+1}, already mutually orthogonal
    const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
    for (int c = 0; c < k; ++c) T(k - 1, c) = 1.0 / norm;
    T(k - 1, k) = -static_cast<double>(k) / norm;
  }
  return T;
}

Topology with_complement(Topology topo) {
  if (topo.N >= 2) {
    topo.T = complement_basis(topo.N);
    topo.Hbar = topo.T * topo.H;
  } else {
    topo.T = Matrix::Zero(0, topo.N);
    topo.Hbar = Matrix::Zero(0, topo.M);
  }
  return topo;
}

Matrix assemble_weighted_blocks(const Matrix& h, const std::vector<Matrix>& left,
                                const std::vector<Matrix>& right) {
  const auto R = h.rows();
  const auto K = h.cols();
  const bool left_id = left.empty();
  const bool right_id = right.empty();
  if (!left_id && static_cast<Eigen::Index>(left.size()) != R)
    fail(ErrorCode::DimensionMismatch, "left factor count does not match the row count of the weight matrix");
  if (!right_id && static_cast<Eigen::Index>(right.size()) != K)
    fail(ErrorCode::DimensionMismatch, "right factor count does not match the column count of the weight matrix");

  auto block = [&](Eigen::Index i, Eigen::Index j) -> Matrix {
    if (left_id && right_id) return Matrix::Constant(1, 1, 1.0);
    if (left_id) return right[static_cast<std::size_t>(j)];
    if (right_id) return left[static_cast<std::size_t>(i)];
    const auto& l = left[static_cast<std::size_t>(i)];
    const auto& r = right[static_cast<std::size_t>(j)];
    if (l.cols() != r.rows())
      fail(ErrorCode::DimensionMismatch, "block (" + std::to_string(i) + "," + std::to_string(j) +
                                             ") factors are not conformable");
    return l * r;
  };

  std::vector<Eigen::Index> heights(static_cast<std::size_t>(R), -1);
  std::vector<Eigen::Index> widths(static_cast<std::size_t>(K), -1);
  for (Eigen::Index i = 0; i < R; ++i)
    for (Eigen::Index j = 0; j < K; ++j) {
      const Matrix b = block(i, j);
      auto& hi = heights[static_cast<std::size_t>(i)];
      auto& wj = widths[static_cast<std::size_t>(j)];
      if (hi < 0) hi = b.rows();
      if (wj < 0) wj = b.cols();
      if (hi != b.rows() || wj != b.cols())
        fail(ErrorCode::DimensionMismatch, "inconsistent block sizes in weighted assembly");
    }
  // empty row/column lists still need sizes
  if (K == 0)
    for (Eigen::Index i = 0; i < R; ++i)
      heights[static_cast<std::size_t>(i)] = left_id ? 1 : left[static_cast<std::size_t>(i)].rows();
  if (R == 0)
    for (Eigen::Index j = 0; j < K; ++j)
      widths[static_cast<std::size_t>(j)] = right_id ? 1 : right[static_cast<std::size_t>(j)].cols();

  Eigen::Index rows = 0, cols = 0;
  for (auto v : heights) rows += v;
  for (auto v : widths) cols += v;
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r0 = 0;
  for (Eigen::Index i = 0; i < R; ++i) {
    Eigen::Index c0 = 0;
    for (Eigen::Index j = 0; j < K; ++j) {
      const auto hij = h(i, j);
      const auto bh = heights[static_cast<std::size_t>(i)];
      const auto bw = widths[static_cast<std::size_t>(j)];
      if (hij != 0.0) out.block(r0, c0, bh, bw) = hij * block(i, j);
      c0 += bw;
    }
    r0 += heights[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace dynedge
