#include "dynedge/analysis.hpp"
#include "dynedge/closedloop.hpp"
#include "dynedge/error.hpp"
#include "dynedge/lmi.hpp"
#include "dynedge/scenarios.hpp"
#include "dynedge/sim.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace dynedge;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Smallest T (from 10/|a| upward) with ||exp(A T)||_2 <= e^-10.
double decayed_horizon(const Matrix& A) {
  const double a = spectral_abscissa(A);
  if (!(a < 0.0)) fail(ErrorCode::NotHurwitz, "error system abscissa " + g(a));
  double T = 10.0 / -a;
  for (int k = 0; k < 60; ++k) {
    const Matrix E = oracle::expm(A * T);
    if (Eigen::JacobiSVD<Matrix>(E).singularValues()(0) <= std::exp(-10.0)) return T;
    T *= 1.25;
  }
  fail(ErrorCode::NotHurwitz, "error system did not decay by e^-10");
}

// Integrate with the recommended step, keeping about `samples` columns.
SimResult run(const ClosedLoop& cl, const Vector& x0, double T, int samples = 4000) {
  const double dt0 = suggest_dt(cl);
  const auto steps = static_cast<long long>(std::ceil(T / dt0));
  const double dt = T / static_cast<double>(steps);
  const int every = static_cast<int>(std::max<long long>(1, steps / samples));
  return integrate(cl, x0, T, dt, every);
}

// Columns of m whose time lies in the trailing window.
double max_over_tail(const Matrix& m, const std::vector<double>& t, double window) {
  double out = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= t.back() - window - 1e-12) out = std::max(out, m.col(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff());
  return out;
}

double max_column_norm(const Matrix& m) {
  double out = 0.0;
  for (Eigen::Index k = 0; k < m.cols(); ++k) out = std::max(out, m.col(k).norm());
  return out;
}

Vector last(const Matrix& m) { return m.col(m.cols() - 1); }

RandomOptions sized(std::uint64_t seed, Regime regime, int max_n, int max_m) {
  RandomOptions o;
  o.regime = regime;
  o.N = 2 + static_cast<int>(seed % static_cast<std::uint64_t>(max_n - 1));
  const int cap = std::min(max_m, o.N * (o.N - 1) / 2);
  o.M = o.N - 1 + static_cast<int>((seed / 3) % static_cast<std::uint64_t>(cap - o.N + 2));
  o.p = 1 + static_cast<int>(seed % 2);
  return o;
}

// Controllers at eps*/2 for a coupled regime.
ControllerSet half_eps_star(const Scenario& sc) {
  ControllerSet cs = build_controllers(sc);
  const EpsStar es = epsilon_star(sc.net, cs, 1e3);
  cs.eps = 0.5 * es.eps_bisect;
  return cs;
}

// -------------------------------------------------------------------------

Outcome demo_reproduction() {
  const Scenario sc = demo_power_network(GroundMode::Exact);
  const AssumptionReport rep = check_assumptions(sc);
  if (!rep.passed()) return {false, "assumption check failed"};
  const ControllerSet cs = build_controllers(sc);
  const ClosedLoop cl = assemble(sc.net, cs);
  const double a = spectral_abscissa(cl.A_err);
  if (!(a < 0.0)) return {false, "error system abscissa " + g(a)};
  const auto t0 = std::chrono::steady_clock::now();
  const SimResult r = integrate(cl, initial_state(cl, sc.refs), 1.0, 1e-6, 100);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto m = error_metrics(r, 0.1);
  bool ok = true;
  std::ostringstream os;
  os << "abscissa " << g(a) << ", sim " << g(secs) << " s";
  for (int i : {0, 1}) {
    ok = ok && m[i].max <= 1e-2 && m[i].decaying;
    os << ", node " << i + 1 << " max|v - vbar| " << g(m[i].max) << (m[i].decaying ? " decaying" : " not decaying");
  }
  return {ok, os.str()};
}

Outcome internal_model_identity() {
  double worst = 0.0;
  int nodes = 0;
  for (std::uint64_t seed = 1; nodes < 100; ++seed) {
    RandomOptions o;
    o.p = 1 + static_cast<int>(seed % 2);
    o.N = 2;
    o.M = 1;
    const Scenario sc = random_network(1000 + seed, o);
    for (const auto& n : sc.net.nodes) {
      if (nodes == 100) break;
      const NodeController nc = node_controller(n.sys, nullptr, sc.exo, seed);
      Matrix Dref = Matrix::Zero(nc.loop.Ahat.rows(), sc.exo.q());
      Dref.bottomRows(nc.im.states()) = -nc.im.G2 * sc.exo.Q_eta;
      const RegulatorMap rm = regulator_map(nc.loop.Ahat, Dref, nc.loop.Chat, sc.exo.S, sc.exo.Q_eta);
      worst = std::max(worst, (nc.loop.Chat * rm.Pi - sc.exo.Q_eta).cwiseAbs().rowwise().sum().maxCoeff());
      ++nodes;
    }
  }
  return {worst <= 1e-8, "100 nodes, worst ||C Pi - Q_eta||_inf " + g(worst)};
}

Outcome decentralized_tracking() {
  double worst = 0.0, worst_a = -1e300;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Scenario sc = random_network(2000 + seed, sized(seed, Regime::Tracking, 4, 6));
    const ControllerSet cs = build_controllers(sc);
    const ClosedLoop cl = assemble(sc.net, cs);
    const double a = spectral_abscissa(cl.A_err);
    worst_a = std::max(worst_a, a);
    if (!(a < 0.0)) return {false, "seed " + std::to_string(seed) + ": abscissa " + g(a)};
    const SimResult r = run(cl, initial_state(cl, sc.refs), 20.0 / -a, 200);
    for (const auto& e : r.errors) worst = std::max(worst, last(e).norm());
  }
  return {worst <= 1e-6, "25 networks, worst abscissa " + g(worst_a) + ", worst ||e_i(T)|| " + g(worst)};
}

Outcome synchronization_limit() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario sc = random_network(3000 + seed, sized(seed, Regime::Sync, 4, 6));
    const ControllerSet cs = half_eps_star(sc);
    const ClosedLoop cl = assemble(sc.net, cs);
    const double T = decayed_horizon(cl.A_err);
    const SimResult r = run(cl, initial_state(cl, sc.refs), T);
    const SteadyState ss = steady_state_prediction(cs, sc.refs, {r.t.back()});
    for (int i = 0; i < sc.net.N(); ++i) {
      const double scale = max_column_norm(r.y[i]);
      worst = std::max(worst, (last(r.y[i]) - ss.y[i].col(0)).norm() / scale);
    }
  }
  return {worst <= 1e-3, "10 networks at eps*/2, worst relative ||y_i(T) - y_avg(T)|| " + g(worst)};
}

struct CoopRuns {
  double bias_worst = 0.0;    // relative to ||c||
  double zero_sum_worst = 0.0;
  double sum_worst = 0.0;     // relative output-sum deviation, zero-sum runs
};

const CoopRuns& cooperation_runs() {
  static const CoopRuns out = [] {
    CoopRuns c;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Scenario sc = random_network(4000 + seed, sized(seed, Regime::Cooperation, 4, 6));
      const ControllerSet cs = half_eps_star(sc);
      const ClosedLoop cl = assemble(sc.net, cs);
      const double T = decayed_horizon(cl.A_err);
      const double period = 2.0 * M_PI / std::abs(eigenvalues(sc.exo.S)(0).imag());
      const int N = sc.net.N();
      const auto q = sc.exo.q();

      for (bool zero_sum : {true, false}) {
        References refs = sc.refs;
        Vector cvec = Vector::Zero(q);
        if (!zero_sum) {
          cvec = Vector::Constant(q, 0.5 + 0.1 * static_cast<double>(seed));
          for (auto& nu : refs.nu) nu += cvec / N;
        }
        const SimResult r = run(cl, initial_state(cl, refs), T);
        const SteadyState ss = steady_state_prediction(cs, refs, r.t);
        for (int i = 0; i < N; ++i) {
          // residual v_i - Q_v nu_i against Q_v e^{S t} nu0
          Matrix bias(sc.exo.p(), static_cast<Eigen::Index>(r.t.size()));
          for (std::size_t k = 0; k < r.t.size(); ++k)
            bias.col(static_cast<Eigen::Index>(k)) = sc.exo.Q_v * (sc.exo.S * r.t[k]).exp() * ss.nu0;
          const double dev = max_over_tail(r.errors[i] - bias, r.t, period);
          if (zero_sum)
            c.zero_sum_worst = std::max(c.zero_sum_worst, max_over_tail(r.errors[i], r.t, period));
          else
            c.bias_worst = std::max(c.bias_worst, dev / cvec.norm());
        }
        if (!zero_sum) continue;
        Matrix ysum = Matrix::Zero(sc.exo.p(), static_cast<Eigen::Index>(r.t.size()));
        for (const auto& y : r.y) ysum += y;
        const double scale = std::max(max_column_norm(ysum), max_column_norm(ss.y_sum));
        c.sum_worst = std::max(c.sum_worst, (last(ysum) - last(ss.y_sum)).norm() / scale);
      }
    }
    return c;
  }();
  return out;
}

Outcome bias_law() {
  const CoopRuns& c = cooperation_runs();
  return {c.bias_worst <= 1e-3 && c.zero_sum_worst <= 1e-3,
          "5 networks at eps*/2, worst bias deviation / ||c|| " + g(c.bias_worst) + ", zero-sum residual " +
              g(c.zero_sum_worst)};
}

Outcome output_sum() {
  const CoopRuns& c = cooperation_runs();
  return {c.sum_worst <= 1e-3, "worst relative ||sum y_i(T) - G_Q e^{G_S T} sum etabar_i(0)|| " + g(c.sum_worst)};
}

Outcome master_slave() {
  double worst_master = 0.0, worst_slave = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomOptions o = sized(seed, Regime::MasterSlave, 4, 6);
    o.N = std::max(o.N, 3);
    o.M = std::max(o.M, o.N - 1);
    const int slaves = seed % 2 ? 1 : o.N - 1;
    o.masters = o.N - slaves;
    const Scenario sc = random_network(5000 + seed, o);
    const ControllerSet cs = half_eps_star(sc);
    const ClosedLoop cl = assemble(sc.net, cs);
    const double T = decayed_horizon(cl.A_err);
    const SimResult r = run(cl, initial_state(cl, sc.refs), T);
    for (int i = 0; i < sc.net.N(); ++i) {
      const double e = last(r.errors[i]).norm();
      (cs.nodes[i].role == Role::Master ? worst_master : worst_slave) =
          std::max(cs.nodes[i].role == Role::Master ? worst_master : worst_slave, e);
    }
  }
  return {worst_master <= 1e-3 && worst_slave <= 1e-3,
          "10 networks, worst master ||y - Q_eta eta|| " + g(worst_master) + ", worst slave ||v - Q_v nu|| " +
              g(worst_slave)};
}

Outcome block_certificate() {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> dim(1, 4);
  const double fractions[] = {0.0, 0.25, 0.5, 0.9, 0.999};
  double worst = -1e300;
  int cases = 0;
  while (cases < 50) {
    const int a = dim(rng), b = dim(rng);
    auto spd = [&](int n) {
      const Matrix X = oracle::randn(rng, n, n);
      return Matrix(X * X.transpose() + 0.1 * Matrix::Identity(n, n));
    };
    auto skew = [&](int n) {
      const Matrix X = oracle::randn(rng, n, n);
      return Matrix(X - X.transpose());
    };
    const Matrix P_w = spd(a), Q_w = spd(b);
    // P_w W1 + W1^T P_w = -2 R with R positive semidefinite (rank-deficient every other case)
    Matrix L = oracle::randn(rng, a, cases % 2 ? std::max(1, a - 1) : a);
    const Matrix W1 = P_w.inverse() * (-(L * L.transpose()) + skew(a));
    if (!(spectral_abscissa(W1) < -1e-6)) continue;
    const Matrix W4 = Q_w.inverse() * (-spd(b) + skew(b));
    const Matrix W2 = oracle::randn(rng, a, b);
    const Matrix W3 = -Q_w.inverse() * W2.transpose() * P_w;
    const Lemma1Certificate bound = lemma1_bound(W1, W2, W3, W4, P_w, Q_w);
    Matrix W5 = oracle::randn(rng, a, b);
    W5 *= fractions[cases % 5] * bound.eps_bar / W5.operatorNorm();
    const Matrix W = lemma1_assemble(W1, W2, W3, W4, W5);
    const Matrix& P = bound.P_bar.P;
    const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(P * W + W.transpose() * P).eigenvalues().maxCoeff();
    worst = std::max(worst, lmax);
    ++cases;
  }
  return {worst < 0.0, "50 instances, worst lambda_max(P W + W^T P) " + g(worst)};
}

Outcome eps_boundary() {
  const Scenario sc = demo_power_network(GroundMode::Exact);
  const ControllerSet cs = build_controllers(sc);
  const double hi = 1e5;
  const EpsStar es = epsilon_star(sc.net, cs, hi);
  const NodeMaps maps = node_maps(sc.net, cs);
  const double below = error_abscissa(sc.net, cs, maps, 0.99 * es.eps_bisect);
  bool ok = below < 0.0 && es.eps_bisect >= 20.0;
  std::string d = "eps_bisect " + g(es.eps_bisect) + ", abscissa at 0.99x " + g(below);
  if (es.eps_bisect < hi && !es.at_upper_limit) {
    const double above = error_abscissa(sc.net, cs, maps, 1.01 * es.eps_bisect);
    ok = ok && above >= -1e-9;
    d += ", at 1.01x " + g(above);
  }
  return {ok, d};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const Criterion criteria[] = {
      {1, "three-bus demo reproduction", demo_reproduction},
      {2, "internal-model output identity", internal_model_identity},
      {3, "decentralized tracking", decentralized_tracking},
      {4, "output synchronization limit", synchronization_limit},
      {5, "cooperation bias law", bias_law},
      {6, "cooperation output sum", output_sum},
      {7, "master-slave cooperation", master_slave},
      {8, "block stability certificate", block_certificate},
      {9, "eps boundary on the demo", eps_boundary},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %d %s: %s (%s) [%.1f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of 9 criteria passed\n", 9 - failed);
  return failed == 0 ? 0 : 1;
}
