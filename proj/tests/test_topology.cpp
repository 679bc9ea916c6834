#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynedge/error.hpp"
#include "dynedge/topology.hpp"
#include "oracles.hpp"

using namespace dynedge;

TEST_CASE("incidence from the triangle edge list") {
  const Topology t = incidence_from_edge_list({{1, 2}, {1, 3}, {2, 3}}, 3);
  Matrix H(3, 3);
  H << 1, 1, 0, -1, 0, 1, 0, -1, -1;
  CHECK(t.H == H);
  CHECK(t.N == 3);
  CHECK(t.M == 3);
}

TEST_CASE("incidence edge cases") {
  const Topology empty = incidence_from_edge_list({}, 2);
  CHECK(empty.H.rows() == 2);
  CHECK(empty.H.cols() == 0);
  const Topology flip = incidence_from_edge_list({{2, 1}}, 2);
  CHECK(flip.H(0, 0) == -1.0);
  CHECK(flip.H(1, 0) == 1.0);
}

TEST_CASE("incidence rejects self loops and bad indices") {
  try {
    incidence_from_edge_list({{2, 2}}, 3);
    FAIL("expected SelfLoop");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SelfLoop);
  }
  try {
    incidence_from_edge_list({{1, 4}}, 3);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("incidence matrix validation") {
  Matrix bad(2, 1);
  bad << 1, 1;
  CHECK_THROWS_AS(topology_from_incidence(bad), Error);
  Matrix ok(2, 1);
  ok << -1, 1;
  CHECK(edge_list(topology_from_incidence(ok)).front() == EdgeEnds{2, 1});
}

TEST_CASE("connectivity") {
  CHECK(check_connected(incidence_from_edge_list({{1, 2}, {1, 3}, {2, 3}}, 3).H));
  CHECK_FALSE(check_connected(incidence_from_edge_list({{1, 2}}, 3).H));
  CHECK(check_connected(incidence_from_edge_list({{1, 2}}, 2).H));
}

TEST_CASE("complement basis") {
  const Matrix T2 = complement_basis(2);
  CHECK(std::abs(std::abs(T2(0, 0)) - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(T2(0, 0) + T2(0, 1)) < 1e-15);

  const Matrix T3 = complement_basis(3);
  Matrix expect(2, 3);
  expect << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0, 1 / std::sqrt(6.0), 1 / std::sqrt(6.0), -2 / std::sqrt(6.0);
  CHECK(oracle::max_abs(T3 - expect) < 1e-15);

  for (int N = 2; N <= 8; ++N) {
    const Matrix T = complement_basis(N);
    CHECK(oracle::max_abs(T * Vector::Ones(N)) < 1e-14);
    CHECK(oracle::max_abs(T * T.transpose() - Matrix::Identity(N - 1, N - 1)) < 1e-12);
  }
  try {
    complement_basis(1);
    FAIL("expected DimensionTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionTooSmall);
  }
}

TEST_CASE("reduced incidence keeps full row rank on connected graphs") {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int N = 2 + trial % 4;
    std::vector<EdgeEnds> e;
    for (int k = 2; k <= N; ++k) e.push_back({k, 1 + static_cast<int>(g() % static_cast<unsigned>(k - 1))});
    const Topology t = with_complement(incidence_from_edge_list(e, N));
    CHECK(oracle::max_abs(t.H.transpose() * Vector::Ones(N)) == 0.0);
    CHECK(oracle::max_abs(t.Hbar - t.T * t.H) == 0.0);
    CHECK(numerical_rank(t.Hbar) == N - 1);
  }
}

TEST_CASE("weighted block assembly") {
  Matrix H(2, 1);
  H << 1, -1;
  const Matrix out = assemble_weighted_blocks(H, {Matrix::Constant(1, 1, 2), Matrix::Constant(1, 1, 3)},
                                              {Matrix::Constant(1, 1, 5)});
  Matrix expect(2, 1);
  expect << 10, -15;
  CHECK(out == expect);

  CHECK(assemble_weighted_blocks(H, {}, {}) == H);

  // diagonal special case: the RL line matrix of the three-bus example
  std::vector<Matrix> E{Matrix::Constant(1, 1, -0.05 / 1e-5), Matrix::Constant(1, 1, -9 / 1e-3),
                        Matrix::Constant(1, 1, -8 / 5e-3)};
  const Matrix EM = assemble_weighted_blocks(Matrix::Identity(3, 3), E, {});
  CHECK(EM.diagonal().isApprox(Vector::Map(std::vector<double>{-5000, -9000, -1600}.data(), 3)));
  CHECK(oracle::max_abs(EM - Matrix(EM.diagonal().asDiagonal())) == 0.0);
}

TEST_CASE("weighted block assembly matches a brute-force construction") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix h = oracle::randn(g, 3, 3);
    std::vector<Matrix> L, R;
    for (int i = 0; i < 3; ++i) L.push_back(oracle::randn(g, 2, 3));
    for (int j = 0; j < 3; ++j) R.push_back(oracle::randn(g, 3, 1 + j));
    const Matrix out = assemble_weighted_blocks(h, L, R);
    Eigen::Index r = 0;
    for (int i = 0; i < 3; ++i, r += 2) {
      Eigen::Index c = 0;
      for (int j = 0; j < 3; ++j) {
        CHECK(oracle::max_abs(out.block(r, c, 2, R[j].cols()) - h(i, j) * L[i] * R[j]) < 1e-14);
        c += R[j].cols();
      }
    }
  }
}

TEST_CASE("weighted block assembly rejects incompatible factors") {
  Matrix H = Matrix::Ones(1, 1);
  try {
    assemble_weighted_blocks(H, {Matrix::Ones(2, 2)}, {Matrix::Ones(3, 3)});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}
