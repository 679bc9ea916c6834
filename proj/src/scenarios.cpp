#include "dynedge/scenarios.hpp"

#include "dynedge/analysis.hpp"
#include "dynedge/error.hpp"
#include "dynedge/lmi.hpp"
#include "dynedge/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace dynedge {

namespace {

constexpr double kW = 100.0 * std::numbers::pi;

Matrix mat(Eigen::Index r, Eigen::Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) x(k++) = d;
  return x;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

NodeModel source_node(double Cf) {
  NodeModel n;
  n.sys.A = Matrix::Zero(1, 1);
  n.sys.B = Matrix::Constant(1, 1, 1.0 / Cf);
  n.sys.D_in = n.sys.B;
  n.sys.C = Matrix::Ones(1, 1);
  return n;
}

EdgeModel rl_line(double R, double L) {
  return {Matrix::Constant(1, 1, -R / L), Matrix::Constant(1, 1, 1.0 / L), Matrix::Ones(1, 1)};
}

ControllerSpec gains(const Matrix& Kx, const Matrix& Kz, const Matrix& G1, const Matrix& G2) {
  ControllerSpec s;
  s.synthesize = false;
  s.K_x = Kx;
  s.K_zeta = Kz;
  s.G1 = G1;
  s.G2 = G2;
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return nd_(gen_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen_); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(gen_); }
  Matrix normal(Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }
  // well-conditioned SPD: eigenvalues in [lo, hi]
  Matrix spd(Eigen::Index n, double lo, double hi) {
    Eigen::HouseholderQR<Matrix> qr(normal(n, n));
    const Matrix U = qr.householderQ();
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = uniform(lo, hi);
    return U * d.asDiagonal() * U.transpose();
  }
  Matrix skew(Eigen::Index n, double scale) {
    const Matrix X = scale * normal(n, n);
    return X - X.transpose();
  }
  std::mt19937_64& gen() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> nd_;
};

// Relative-degree-one normal form [zero dynamics; output] with Hurwitz zero
// dynamics and C B > 0, then a random similarity.
LtiSystem hyper_min_phase_node(Rng& rng, int n, int p) {
  const int r = n - p;
  Matrix A = 0.5 * rng.normal(n, n);
  if (r > 0) A.topLeftCorner(r, r) = -rng.spd(r, 0.5, 2.0) + rng.skew(r, 0.5);
  Matrix B = Matrix::Zero(n, p);
  B.bottomRows(p) = rng.spd(p, 0.5, 2.0);
  Matrix C = Matrix::Zero(p, n);
  C.rightCols(p) = Matrix::Identity(p, p);
  Matrix T = Matrix::Identity(n, n) + 0.3 * rng.normal(n, n);
  while (Eigen::JacobiSVD<Matrix>(T).singularValues().tail(1)(0) < 0.3) T = Matrix::Identity(n, n) + 0.3 * rng.normal(n, n);
  const Matrix Ti = T.inverse();
  LtiSystem s;
  s.A = T * A * Ti;
  s.B = T * B;
  s.C = C * Ti;
  s.D_in = s.B;
  return s;
}

// Q E + E^T Q = -2 W < 0 and Q F = G^T by construction.
EdgeModel spr_edge(Rng& rng, int m, int p) {
  const Matrix Q = rng.spd(m, 0.5, 2.0);
  const Matrix W = rng.spd(m, 0.5, 2.0);
  const Matrix Qi = Q.inverse();
  Matrix G = rng.normal(p, m);
  while (numerical_rank(G) < p) G = rng.normal(p, m);
  return {Qi * (-W + rng.skew(m, 0.5)), Qi * G.transpose(), G};
}

Matrix rotation(double w) { return mat(2, 2, {0.0, -w, w, 0.0}); }

double min_sv_ratio(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  const Vector s = Eigen::JacobiSVD<Matrix>(M).singularValues();
  return s(s.size() - 1) / std::max(s(0), 1e-300);
}

}  // namespace

bool AssumptionReport::passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
}

Scenario demo_power_network(GroundMode mode) {
  Scenario sc;
  sc.name = mode == GroundMode::Exact ? "power_network" : "power_network_highgain";
  const double Cf1 = 50e-6, Cf2 = 30e-6;
  sc.net.nodes = {source_node(Cf1), source_node(Cf2), NodeModel{}};
  if (mode == GroundMode::Exact)
    sc.net.nodes[2].ideal = true;
  else
    sc.net.nodes[2] = source_node(50e-6);
  sc.net.edges = {rl_line(0.05, 1e-5), rl_line(9.0, 1e-3), rl_line(8.0, 5e-3)};
  sc.net.topo = topology_from_incidence(mat(3, 3, {1, 1, 0, -1, 0, 1, 0, -1, -1}));
  sc.exo = make_exosystem(rotation(kW), mat(1, 2, {0, 1}), mat(1, 2, {1, 0}));
  sc.regime = Regime::MasterSlave;
  sc.roles = {Role::Slave, Role::Slave, Role::Master};
  const Matrix S = sc.exo.S;
  const Matrix alpha = mat(2, 2, {0, 1, -kW * kW, 0});
  sc.specs = {gains(mat(1, 1, {-1}), mat(1, 2, {-500, -500}), S, mat(2, 1, {1, 1})),
              gains(mat(1, 1, {-2}), mat(1, 2, {0, -500}), alpha, mat(2, 1, {0, 1})), ControllerSpec{}};
  if (mode == GroundMode::HighGain)
    sc.specs[2] = gains(mat(1, 1, {-10}), mat(1, 2, {-5000, -5000}), S, mat(2, 1, {1, 1}));
  sc.eps = 20.0;
  sc.refs.nu = {vec({5.0, -5.0 * std::sqrt(3.0)}), vec({10.0, 0.0}), Vector()};
  sc.refs.etabar = {Vector::Zero(2), Vector::Zero(2), Vector()};
  sc.refs.eta = {Vector(), Vector(), Vector::Zero(2)};
  sc.sim = {1e-6, 1.0, 100, 0.1};
  return sc;
}

Scenario random_network(std::uint64_t seed, const RandomOptions& o) {
  if (o.N < 2 || o.N > 5) fail(ErrorCode::InfeasibleDims, "N must be in [2, 5]");
  if (o.M < o.N - 1 || o.M > std::min(7, o.N * (o.N - 1) / 2))
    fail(ErrorCode::InfeasibleDims, "M must be in [N - 1, min(7, N (N - 1) / 2)] for a simple connected graph");
  if (o.p < 1 || o.max_dim < o.p || o.max_dim > 3) fail(ErrorCode::InfeasibleDims, "need 1 <= p <= max_dim <= 3");
  if (o.regime == Regime::MasterSlave && (o.masters < 1 || o.masters >= o.N))
    fail(ErrorCode::InfeasibleDims, "master count must be in [1, N - 1]");

  Rng rng(seed);
  Scenario sc;
  sc.name = "random_" + std::to_string(seed);
  sc.seed = seed;
  sc.regime = o.regime;

  // random spanning tree, then extra distinct pairs
  std::vector<int> order(static_cast<std::size_t>(o.N));
  for (int i = 0; i < o.N; ++i) order[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(order.begin(), order.end(), rng.gen());
  std::vector<EdgeEnds> ends;
  std::set<std::pair<int, int>> used;
  auto add = [&](int a, int b) {
    if (rng.uniform(0, 1) < 0.5) std::swap(a, b);
    ends.push_back({a, b});
    used.insert({std::min(a, b), std::max(a, b)});
  };
  for (int k = 1; k < o.N; ++k) add(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(rng.integer(0, k - 1))]);
  std::vector<std::pair<int, int>> free;
  for (int a = 1; a <= o.N; ++a)
    for (int b = a + 1; b <= o.N; ++b)
      if (!used.count({a, b})) free.push_back({a, b});
  std::shuffle(free.begin(), free.end(), rng.gen());
  for (int k = 0; static_cast<int>(ends.size()) < o.M; ++k) add(free[static_cast<std::size_t>(k)].first, free[static_cast<std::size_t>(k)].second);
  sc.net.topo = incidence_from_edge_list(ends, o.N);

  for (int i = 0; i < o.N; ++i) {
    NodeModel n;
    n.sys = hyper_min_phase_node(rng, rng.integer(o.p, o.max_dim), o.p);
    sc.net.nodes.push_back(n);
  }
  for (int j = 0; j < o.M; ++j) sc.net.edges.push_back(spr_edge(rng, rng.integer(o.p, o.max_dim), o.p));

  const double w = rng.uniform(0.5, 2.0);
  Matrix Qe = rng.normal(o.p, 2);
  while (!observability_check(rotation(w), Qe) || min_sv_ratio(Qe) < 0.1) Qe = rng.normal(o.p, 2);
  sc.exo = make_exosystem(rotation(w), Qe, rng.normal(o.p, 2));

  if (o.regime == Regime::MasterSlave)
    for (int i = 0; i < o.N; ++i) sc.roles.push_back(i < o.masters ? Role::Master : Role::Slave);

  const auto q = sc.exo.q();
  const auto r = q * o.p;
  Vector nu_sum = Vector::Zero(q);
  for (int i = 0; i < o.N; ++i) {
    const Role role = o.regime == Regime::MasterSlave ? sc.roles[static_cast<std::size_t>(i)] : Role::Tracking;
    const bool coop = o.regime == Regime::Cooperation || role == Role::Slave;
    sc.refs.eta.push_back(coop ? Vector() : Vector(rng.normal(q, 1)));
    sc.refs.nu.push_back(coop ? Vector(rng.normal(q, 1)) : Vector());
    sc.refs.etabar.push_back(coop ? Vector(rng.normal(r, 1)) : Vector());
    if (o.regime == Regime::Cooperation) nu_sum += sc.refs.nu.back();
  }
  if (o.regime == Regime::Cooperation)
    for (auto& nu : sc.refs.nu) nu -= nu_sum / o.N;

  sc.eps = 1.0;
  sc.sim = {1e-2, 20.0, 1, 1.0};
  return sc;
}

ControllerSet build_controllers(const Scenario& sc) {
  if (sc.exo.P_eta.size() == 0) {
    try {
      make_exosystem(sc.exo.S, sc.exo.Q_eta, sc.exo.Q_v);
    } catch (const Error& e) {
      fail(ErrorCode::AssumptionFailed, std::string("A2 exosystem: ") + e.what());
    }
  }
  return build_controllers(sc.net, sc.exo, sc.regime, sc.roles, sc.eps, sc.specs, sc.seed);
}

AssumptionReport check_assumptions(const Scenario& sc) {
  AssumptionReport rep;
  auto item = [&](std::string a, std::string who, bool ok, double margin, std::string detail) {
    rep.items.push_back({std::move(a), std::move(who), ok, margin, std::move(detail)});
  };

  for (int i = 0; i < sc.net.N(); ++i) {
    const auto& n = sc.net.nodes[static_cast<std::size_t>(i)];
    const std::string who = "node " + std::to_string(i + 1);
    if (n.ideal) {
      item("A1", who, true, 0.0, "ideal node, output pinned to its reference");
      continue;
    }
    const Matrix& D = n.sys.D_in.size() ? n.sys.D_in : n.sys.B;
    const double m = std::min({min_sv_ratio(n.sys.B), min_sv_ratio(D), min_sv_ratio(n.sys.C.transpose())});
    const bool ok = numerical_rank(n.sys.B) == n.sys.B.cols() && numerical_rank(D) == D.cols() &&
                    numerical_rank(n.sys.C) == n.sys.C.rows();
    item("A1", who, ok, m, "B, D full column rank and C full row rank (min sigma ratio " + fmt(m) + ")");
  }
  for (int j = 0; j < sc.net.M(); ++j) {
    const auto& e = sc.net.edges[static_cast<std::size_t>(j)];
    const double m = std::min(min_sv_ratio(e.F), min_sv_ratio(e.G.transpose()));
    const bool ok = numerical_rank(e.F) == e.F.cols() && numerical_rank(e.G) == e.G.rows();
    item("A1", "edge " + std::to_string(j + 1), ok, m, "F full column rank and G full row rank (min sigma ratio " + fmt(m) + ")");
  }

  {
    double re = 0.0;
    bool ok = true;
    std::string detail;
    try {
      const CVector ev = eigenvalues(sc.exo.S);
      for (Eigen::Index k = 0; k < ev.size(); ++k) re = std::max(re, std::abs(ev(k).real()));
      const Certificate c = marginal_spectrum_certificate(sc.exo.S);
      detail = "simple imaginary-axis spectrum, max |Re| " + fmt(re) + ", P_eta certificate slack " + fmt(c.slack + 0.0);
    } catch (const Error& err) {
      ok = false;
      detail = err.what();
    }
    item("A2", "exosystem", ok, re, detail);
  }

  for (int j = 0; j < sc.net.M(); ++j) {
    const auto& e = sc.net.edges[static_cast<std::size_t>(j)];
    const std::string who = "edge " + std::to_string(j + 1);
    try {
      const Certificate c = spr_certificate(e.E, e.F, e.G);
      item("A3", who, true, c.slack, "strictly positive real, -lambda_max(Q E + E^T Q) = " + fmt(c.slack));
    } catch (const Error& err) {
      double a = 0.0;
      try {
        a = spectral_abscissa(e.E);
      } catch (const Error&) {
      }
      item("A3", who, false, -a, err.what());
    }
  }

  {
    const Vector s = Eigen::JacobiSVD<Matrix>(sc.net.topo.H).singularValues();
    const double m = sc.net.N() >= 2 && s.size() >= sc.net.N() - 1 ? s(sc.net.N() - 2) : 0.0;
    const bool ok = check_connected(sc.net.topo.H);
    item("A4", "network", ok, m, "rank H = " + std::to_string(numerical_rank(sc.net.topo.H)) + " (need " +
                                      std::to_string(sc.net.N() - 1) + "), sigma_(N-1) = " + fmt(m));
  }

  for (int i = 0; i < sc.net.N(); ++i) {
    const auto& n = sc.net.nodes[static_cast<std::size_t>(i)];
    const std::string who = "node " + std::to_string(i + 1);
    if (n.ideal) continue;
    const ControllerSpec* spec = sc.specs.empty() ? nullptr : &sc.specs[static_cast<std::size_t>(i)];
    try {
      const NodeController nc = node_controller(n.sys, spec, sc.exo, sc.seed + static_cast<std::uint64_t>(i));
      const double a = spectral_abscissa(nc.loop.Ahat);
      const double eq = (nc.Phat.P * nc.loop.Dhat - nc.loop.Chat.transpose()).norm();
      item("A5", who, true, -a,
           std::string(spec && !spec->synthesize ? "supplied gains" : "synthesized gains") + ", abscissa(A_hat) = " + fmt(a) +
               ", lambda_max(P A + A^T P) = " + fmt(-nc.Phat.slack) + ", |P D - C^T| = " + fmt(eq));
    } catch (const Error& err) {
      item("A5", who, false, 0.0, err.what());
    }
  }

  if (sc.regime == Regime::Cooperation) {
    Vector sum = Vector::Zero(sc.exo.q());
    for (const auto& nu : sc.refs.nu)
      if (nu.size() == sum.size()) sum += nu;
    const double s = sum.norm();
    const double scale = std::max(1.0, [&] {
      double m = 0.0;
      for (const auto& nu : sc.refs.nu) m = std::max(m, nu.size() ? nu.norm() : 0.0);
      return m;
    }());
    item("A6", "references", s <= 1e-10 * scale, s, "|sum nu_i(0)| = " + fmt(s));
  }

  if (sc.regime == Regime::Sync && !observability_check(sc.exo.S, sc.exo.Q_eta))
    rep.warnings.push_back("(S_eta, Q_eta) is not observable; synchronization is only guaranteed for the observable part");
  return rep;
}

}  // namespace dynedge
