#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynedge/error.hpp"
#include "dynedge/scenarios.hpp"
#include "dynedge/sim.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace dynedge;

namespace {

ClosedLoop bare(const Matrix& A) {
  ClosedLoop cl;
  cl.A_full = A;
  return cl;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::ParseError;
}

Matrix rot(double w) {
  Matrix S(2, 2);
  S << 0, -w, w, 0;
  return S;
}

}  // namespace

TEST_CASE("scalar decay") {
  const SimResult r = integrate(bare(-Matrix::Identity(1, 1)), Vector::Ones(1), 1.0, 1e-3);
  CHECK(r.t.back() == doctest::Approx(1.0));
  CHECK(std::abs(r.states(0, r.states.cols() - 1) - std::exp(-1.0)) <= 1e-9);
  CHECK(r.states.cols() == 1001);
}

TEST_CASE("rotation returns after one period") {
  const double T = 2 * std::numbers::pi;
  Vector x0(2);
  x0 << 1, 0;
  const SimResult r = integrate(bare(rot(1.0)), x0, T, T / 1000);
  CHECK((r.states.col(r.states.cols() - 1) - x0).norm() <= 1e-6);
}

TEST_CASE("fourth-order convergence against the matrix exponential") {
  std::mt19937_64 g(3);
  const Matrix A = oracle::random_hurwitz(g, 5);
  const Vector x0 = oracle::randn(g, 5, 1);
  const Vector exact = oracle::expm(A * 2.0) * x0;
  const double rho = A.eigenvalues().cwiseAbs().maxCoeff();
  const double dt = 0.5 / rho;
  const double n = std::ceil(2.0 / dt);
  auto err = [&](double h) {
    const SimResult r = integrate(bare(A), x0, 2.0, h, 1000000);
    return (r.states.col(r.states.cols() - 1) - exact).norm();
  };
  const double e1 = err(2.0 / n), e2 = err(1.0 / n);
  CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("recording keeps the first and last step") {
  const SimResult r = integrate(bare(-Matrix::Identity(1, 1)), Vector::Ones(1), 1.0, 0.1, 3);
  REQUIRE(r.t.size() == 5);
  CHECK(r.t.front() == 0.0);
  CHECK(r.t[1] == doctest::Approx(0.3));
  CHECK(r.t.back() == doctest::Approx(1.0));
}

TEST_CASE("edge inputs follow the edge states and cancel across the network") {
  RandomOptions o;
  o.regime = Regime::Sync;
  o.N = 4;
  o.M = 5;
  const Scenario sc = random_network(12, o);
  const ControllerSet cs = build_controllers(sc);
  const ClosedLoop cl = assemble(sc.net, cs);
  const SimResult r = integrate(cl, initial_state(cl, sc.refs), 5.0, suggest_dt(cl), 10);
  const auto T = r.states.cols();
  Matrix total = Matrix::Zero(sc.exo.p(), T);
  for (int i = 0; i < sc.net.N(); ++i) {
    Matrix v = Matrix::Zero(sc.exo.p(), T);
    for (int j = 0; j < sc.net.M(); ++j) {
      const double h = sc.net.topo.H(i, j);
      if (h == 0.0) continue;
      const auto& e = cl.entry(EntityKind::EdgeState, j);
      v -= h * sc.net.edges[j].G * r.states.middleRows(e.offset, e.length);
    }
    const double scale = std::max(1.0, oracle::max_abs(v));
    CHECK(oracle::max_abs(r.v[i] - v) <= 1e-12 * scale);
    total += r.v[i];
  }
  double scale = 1.0;
  for (const auto& v : r.v) scale = std::max(scale, oracle::max_abs(v));
  CHECK(oracle::max_abs(total) <= 1e-12 * scale);
}

TEST_CASE("step size beyond the spectral radius is refused") {
  CHECK(code_of([] { integrate(bare(-Matrix::Identity(1, 1)), Vector::Ones(1), 10.0, 2.0); }) ==
        ErrorCode::StepTooLarge);
}

TEST_CASE("overflow is reported") {
  CHECK(code_of([] { integrate(bare(Matrix::Constant(1, 1, 1000.0)), Vector::Ones(1), 1.0, 1e-4); }) ==
        ErrorCode::NonFiniteState);
}

TEST_CASE("error metrics") {
  std::vector<double> t;
  for (int k = 0; k <= 500; ++k) t.push_back(k * 0.01);
  Matrix zero = Matrix::Zero(1, 501), ex(1, 501);
  for (int k = 0; k <= 500; ++k) ex(0, k) = std::exp(-t[k]);
  const auto m = error_metrics({zero, ex}, t, 1.0);
  CHECK(m[0].max == 0.0);
  CHECK(m[0].rms == 0.0);
  CHECK_FALSE(m[0].decaying);
  CHECK(m[1].max == doctest::Approx(std::exp(-4.0)).epsilon(1e-12));
  CHECK(m[1].decaying);
  CHECK(code_of([&] { error_metrics({ex}, t, 6.0); }) == ErrorCode::EmptyWindow);
  CHECK(code_of([&] { error_metrics({ex}, {}, 1.0); }) == ErrorCode::EmptyWindow);
}

TEST_CASE("steady-state predictions") {
  const std::vector<double> t{0.0, 0.25, 0.5, 1.0};

  SUBCASE("sync with zero-mean references settles at zero") {
    RandomOptions o;
    o.regime = Regime::Sync;
    Scenario sc = random_network(2, o);
    const ControllerSet cs = build_controllers(sc);
    References refs;
    refs.eta = {Vector::Ones(2), -Vector::Ones(2), Vector::Zero(2)};
    const SteadyState ss = steady_state_prediction(cs, refs, t);
    for (const auto& y : ss.y) CHECK(oracle::max_abs(y) <= 1e-15);
  }

  SUBCASE("cooperation bias removes the common part") {
    RandomOptions o;
    o.regime = Regime::Cooperation;
    Scenario sc = random_network(2, o);
    const ControllerSet cs = build_controllers(sc);
    const Eigen::Index q = sc.exo.q();
    Vector c(q);
    c << 0.7, -0.2;
    References refs;
    refs.nu = {c, c, c};
    const SteadyState ss = steady_state_prediction(cs, refs, t);
    CHECK(oracle::max_abs(ss.nu0 + c) <= 1e-15);
    for (const auto& v : ss.v) CHECK(oracle::max_abs(v) <= 1e-15);
  }

  SUBCASE("slave injection is a sinusoid") {
    const Scenario sc = demo_power_network();
    const ControllerSet cs = build_controllers(sc);
    const SteadyState ss = steady_state_prediction(cs, sc.refs, t);
    const double w = 100 * std::numbers::pi;
    const double phase = -std::numbers::pi / 3;
    for (std::size_t k = 0; k < t.size(); ++k)
      CHECK(ss.v[0](0, static_cast<Eigen::Index>(k)) ==
            doctest::Approx(10.0 * std::cos(w * t[k] + phase)).epsilon(1e-9).scale(10.0));
    CHECK(ss.y[2].size() > 0);
    CHECK(oracle::max_abs(ss.y[2]) == 0.0);
  }
}
