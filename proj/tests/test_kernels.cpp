#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynedge/error.hpp"
#include "dynedge/kernels.hpp"
#include "dynedge/scenarios.hpp"
#include "dynedge/sim.hpp"
#include "oracles.hpp"

#include <cstdlib>
#include <cstring>
#include <vector>

using namespace dynedge;
namespace k = dynedge::kernels;

namespace {

std::vector<const k::KernelTable*> vector_tables() {
  std::vector<const k::KernelTable*> out;
#if defined(DYNEDGE_HAVE_AVX2)
  if (k::available(k::Backend::Avx2)) out.push_back(&k::avx2_table());
#endif
#if defined(DYNEDGE_HAVE_NEON)
  if (k::available(k::Backend::Neon)) out.push_back(&k::neon_table());
#endif
  return out;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> randv(std::mt19937_64& g, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(g);
  return v;
}

}  // namespace

// runs first: the environment is read on the first call to active()
TEST_CASE("environment override selects the backend") {
  setenv("DYNEDGE_KERNELS", "scalar", 1);
  CHECK(k::active().backend == k::Backend::Scalar);
  unsetenv("DYNEDGE_KERNELS");
}

TEST_CASE("backend names round-trip") {
  for (auto b : {k::Backend::Scalar, k::Backend::Avx2, k::Backend::Neon})
    CHECK(k::backend_from_string(k::to_string(b)) == b);
  CHECK_FALSE(k::backend_from_string("sse9").has_value());
  CHECK(k::available(k::Backend::Scalar));
}

TEST_CASE("vector kernels match the scalar reference bit for bit") {
  const auto& s = k::scalar_table();
  std::mt19937_64 g(5);
  for (const auto* v : vector_tables()) {
    CAPTURE(k::to_string(v->backend));
    for (std::size_t n = 1; n <= 23; ++n) {
      const auto A = randv(g, n * n), x = randv(g, n), k1 = randv(g, n), k2 = randv(g, n), k3 = randv(g, n),
                 k4 = randv(g, n);
      std::vector<double> ys(n), yv(n);
      s.matvec(A.data(), n, x.data(), ys.data());
      v->matvec(A.data(), n, x.data(), yv.data());
      CHECK(same_bits(ys, yv));

      s.stage(n, x.data(), 0.37, k1.data(), ys.data());
      v->stage(n, x.data(), 0.37, k1.data(), yv.data());
      CHECK(same_bits(ys, yv));

      std::vector<double> xs = x, xv = x;
      s.rk4_combine(n, 1e-3, k1.data(), k2.data(), k3.data(), k4.data(), xs.data());
      v->rk4_combine(n, 1e-3, k1.data(), k2.data(), k3.data(), k4.data(), xv.data());
      CHECK(same_bits(xs, xv));
    }
  }
}

TEST_CASE("forced backends give identical trajectories") {
  const Scenario sc = demo_power_network();
  const ClosedLoop cl = assemble(sc.net, build_controllers(sc));
  const Vector x0 = initial_state(cl, sc.refs);
  k::force_backend(k::Backend::Scalar);
  CHECK(k::active().backend == k::Backend::Scalar);
  const SimResult ref = integrate(cl, x0, 0.01, 1e-6, 100);
  for (const auto* v : vector_tables()) {
    k::force_backend(v->backend);
    CHECK(k::active().backend == v->backend);
    const SimResult r = integrate(cl, x0, 0.01, 1e-6, 100);
    CHECK(r.states == ref.states);
  }
  k::reset_backend();
}

TEST_CASE("unavailable backends are refused") {
  for (auto b : {k::Backend::Avx2, k::Backend::Neon}) {
    if (k::available(b)) continue;
    CHECK_THROWS_AS(k::force_backend(b), Error);
  }
}
