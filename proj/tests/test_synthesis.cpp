#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynedge/analysis.hpp"
#include "dynedge/error.hpp"
#include "dynedge/lmi.hpp"
#include "dynedge/scenarios.hpp"
#include "dynedge/synthesis.hpp"
#include "oracles.hpp"

using namespace dynedge;

namespace {

LtiSystem scalar_node(double a, double b, double c) {
  LtiSystem s;
  s.A = Matrix::Constant(1, 1, a);
  s.B = Matrix::Constant(1, 1, b);
  s.C = Matrix::Constant(1, 1, c);
  s.D_in = s.B;
  return s;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("internal model of a rotation") {
  const double w = 3.0;
  Matrix S(2, 2);
  S << 0, -w, w, 0;
  const InternalModel im = p_copy_internal_model(S, 1);
  Matrix alpha(2, 2), beta(2, 1);
  alpha << 0, 1, -w * w, 0;
  beta << 0, 1;
  CHECK(oracle::max_abs(im.G1 - alpha) < 1e-12);
  CHECK(oracle::max_abs(im.G2 - beta) == 0.0);
  CHECK(im.block_dim == 2);
}

TEST_CASE("internal model of a constant reference") {
  const InternalModel im = p_copy_internal_model(Matrix::Zero(1, 1), 1);
  CHECK(im.G1.rows() == 1);
  CHECK(im.G1(0, 0) == 0.0);
  CHECK(im.G2(0, 0) == 1.0);
}

TEST_CASE("p copies are block diagonal") {
  Matrix S(2, 2);
  S << 0, -1, 1, 0;
  const InternalModel one = p_copy_internal_model(S, 1);
  const InternalModel two = p_copy_internal_model(S, 2);
  REQUIRE(two.G1.rows() == 4);
  REQUIRE(two.G2.cols() == 2);
  CHECK(oracle::max_abs(two.G1.topLeftCorner(2, 2) - one.G1) == 0.0);
  CHECK(oracle::max_abs(two.G1.bottomRightCorner(2, 2) - one.G1) == 0.0);
  CHECK(oracle::max_abs(two.G1.topRightCorner(2, 2)) == 0.0);
  CHECK(oracle::max_abs(two.G2.topRightCorner(2, 1)) == 0.0);
  CHECK(oracle::max_abs(two.G2.bottomLeftCorner(2, 1)) == 0.0);
}

TEST_CASE("unstable exosystem is rejected") {
  CHECK(code_of([] { p_copy_internal_model(Matrix::Constant(1, 1, 0.5), 1); }) == ErrorCode::SpectrumNotMarginal);
}

TEST_CASE("stable scalar node needs no output feedback") {
  const InternalModel im = p_copy_internal_model(Matrix::Zero(1, 1), 1);
  const NodeController nc = passify_node(scalar_node(-1, 1, 1), im);
  CHECK(nc.K_x(0, 0) == 0.0);
  CHECK(spectral_abscissa(nc.loop.Ahat) < 0.0);
}

TEST_CASE("negative high-frequency gain is not hyper-minimum-phase") {
  const InternalModel im = p_copy_internal_model(Matrix::Zero(1, 1), 1);
  CHECK(code_of([&] { passify_node(scalar_node(-1, 1, -1), im); }) == ErrorCode::NotHyperMinPhase);
}

TEST_CASE("unstable scalar node gets a stabilizing gain") {
  const InternalModel im = p_copy_internal_model(Matrix::Zero(1, 1), 1);
  const NodeController nc = passify_node(scalar_node(2, 1, 1), im);
  CHECK(nc.K_x(0, 0) < -2.0);
  CHECK(spectral_abscissa(nc.loop.Ahat) < 0.0);
}

TEST_CASE("synthesized certificates satisfy the passivity conditions") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    RandomOptions o;
    o.p = 1 + static_cast<int>(seed % 2);
    o.max_dim = 3;
    const Scenario sc = random_network(seed, o);
    const ControllerSet cs = build_controllers(sc);
    for (const auto& nc : cs.nodes) {
      const Matrix& P = nc.Phat.P;
      const auto& L = nc.loop;
      CHECK(lmi::lambda_min_sym(P) > 0.0);
      const Matrix Lyap = P * L.Ahat + L.Ahat.transpose() * P;
      CHECK(lmi::lambda_max_sym(Lyap) <= 1e-9 * std::max(1.0, Lyap.norm()));
      const Matrix R = P * L.Dhat - L.Chat.transpose();
      CHECK(oracle::max_abs(R) <= 1e-8 * std::max(1.0, P.norm()));
      CHECK(spectral_abscissa(L.Ahat) < 0.0);
    }
  }
}

TEST_CASE("regulator map matches the Kronecker oracle and meets the output identity") {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    RandomOptions o;
    o.p = 1 + static_cast<int>(seed % 2);
    const Scenario sc = random_network(seed, o);
    const ControllerSet cs = build_controllers(sc);
    for (const auto& nc : cs.nodes) {
      const RegulatorMap r =
          regulator_map(nc.loop.Ahat, nc.Dhat_ref(), nc.loop.Chat, sc.exo.S, sc.exo.Q_eta);
      const Matrix Pk = oracle::sylvester_kron(nc.loop.Ahat, sc.exo.S, nc.Dhat_ref());
      CHECK(oracle::max_abs(r.Pi - Pk) <= 1e-7 * std::max(1.0, oracle::max_abs(Pk)));
      CHECK(oracle::max_abs(nc.loop.Chat * Pk - sc.exo.Q_eta) <= 1e-8);
      CHECK(r.identity_residual <= 1e-8);
    }
  }
}

TEST_CASE("tracking controllers carry no reference coupling") {
  const Scenario sc = random_network(5, RandomOptions{});
  const ControllerSet cs = build_controllers(sc);
  for (const auto& nc : cs.nodes) {
    CHECK(nc.role == Role::Tracking);
    CHECK(nc.ref_B.size() == 0);
  }
}

TEST_CASE("cooperation matrices are built from the exosystem") {
  Matrix S(2, 2), Q(2, 2);
  S << 0, -1, 1, 0;
  Q << 1, 0, 0, 2;
  const Exosystem exo = make_exosystem(S, Q, Q);
  const CooperationMatrices cm = cooperation_matrices(exo);
  REQUIRE(cm.G_S.rows() == 4);
  CHECK(oracle::max_abs(cm.G_S.topLeftCorner(2, 2) - S) == 0.0);
  CHECK(oracle::max_abs(cm.G_S.bottomRightCorner(2, 2) - S) == 0.0);
  REQUIRE(cm.G_B.rows() == 4);
  REQUIRE(cm.G_B.cols() == 2);
  CHECK(oracle::max_abs(cm.G_B.block(0, 0, 2, 1) - exo.B_eta.col(0)) == 0.0);
  CHECK(oracle::max_abs(cm.G_B.block(2, 1, 2, 1) - exo.B_eta.col(1)) == 0.0);
  CHECK(oracle::max_abs(cm.G_B.block(0, 1, 2, 1)) == 0.0);
  REQUIRE(cm.G_Q.rows() == 2);
  REQUIRE(cm.G_Q.cols() == 4);
  CHECK(oracle::max_abs(cm.G_Q.block(0, 0, 1, 2) - Q.row(0)) == 0.0);
  CHECK(oracle::max_abs(cm.G_Q.block(1, 2, 1, 2) - Q.row(1)) == 0.0);
}

TEST_CASE("cooperation maps satisfy their identities") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomOptions o;
    o.regime = Regime::Cooperation;
    const Scenario sc = random_network(seed, o);
    const ControllerSet cs = build_controllers(sc);
    const NodeMaps maps = node_maps(sc.net, cs);
    CHECK(maps.max_residual <= 1e-8);
    const PiTilde pt = pi_tilde(sc.net, cs);
    CHECK(pt.sylvester_residual <= 1e-8 * std::max(1.0, pt.Pi.norm()));
    CHECK(pt.identity_residual <= 1e-8);
  }
}

TEST_CASE("master-slave maps satisfy their identities") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomOptions o;
    o.regime = Regime::MasterSlave;
    o.N = 4;
    o.M = 4;
    o.masters = 1 + static_cast<int>(seed % 3);
    const Scenario sc = random_network(seed, o);
    const ControllerSet cs = build_controllers(sc);
    const MasterSlaveMaps ms = master_slave_maps(sc.net, cs);
    CHECK(static_cast<int>(ms.masters.size()) == o.masters);
    CHECK(ms.max_residual <= 1e-8);
  }
}

TEST_CASE("a network of slaves only is rejected") {
  RandomOptions o;
  o.regime = Regime::MasterSlave;
  Scenario sc = random_network(3, o);
  for (auto& r : sc.roles) r = Role::Slave;
  CHECK(code_of([&] { build_controllers(sc); }) == ErrorCode::AllSlaves);
}

TEST_CASE("explicit gains are verified") {
  const Scenario sc = demo_power_network();
  const ControllerSet cs = build_controllers(sc);
  for (const auto& nc : cs.nodes) {
    if (nc.ideal) continue;
    CHECK(spectral_abscissa(nc.loop.Ahat) < 0.0);
  }
  const NodeController& n1 = cs.nodes[0];
  CHECK(n1.K_x(0, 0) == -1.0);
  CHECK(n1.K_zeta(0, 0) == -500.0);
  CHECK(n1.role == Role::Slave);
  CHECK(cs.nodes[2].role == Role::Master);

  // destabilizing gains must be rejected
  ControllerSpec bad = sc.specs[0];
  bad.K_x = Matrix::Constant(1, 1, 1.0);
  bad.K_zeta = Matrix::Constant(1, 2, 500.0);
  bad.P_hat.reset();
  const ErrorCode c = code_of([&] { node_controller(sc.net.nodes[0].sys, &bad, sc.exo); });
  CHECK((c == ErrorCode::NotHurwitz || c == ErrorCode::CertificateFailed));
}

TEST_CASE("synthesis is deterministic") {
  RandomOptions o;
  o.regime = Regime::Sync;
  const Scenario sc = random_network(11, o);
  const ControllerSet a = build_controllers(sc);
  const ControllerSet b = build_controllers(sc);
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].K_x == b.nodes[i].K_x);
    CHECK(a.nodes[i].K_zeta == b.nodes[i].K_zeta);
  }
}
