#include "dynedge/closedloop.hpp"

#include "dynedge/error.hpp"
#include "dynedge/lmi.hpp"
#include "dynedge/topology.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace dynedge {

namespace {

Matrix kron_eye(Eigen::Index k, const Matrix& X) { return Eigen::kroneckerProduct(Matrix::Identity(k, k), X).eval(); }

Matrix blockdiag(const std::vector<Matrix>& blocks) {
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  Matrix out = Matrix::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

bool uses_cooperation(Role r) { return r == Role::Cooperation || r == Role::Slave; }

// Shared pieces of every error-coordinate matrix.
struct Blocks {
  std::vector<int> real_nodes;  // non-ideal nodes, in order
  Matrix AN, HDG, HTFC, EM;
  std::vector<Eigen::Index> xoff;  // offset of each real node inside AN
  std::vector<Eigen::Index> zoff;
  Eigen::Index nx = 0, nz = 0;
};

Blocks common_blocks(const Network& net, const ControllerSet& ctrl) {
  Blocks b;
  std::vector<Matrix> Ahats, Es;
  for (int i = 0; i < net.N(); ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    b.xoff.push_back(b.nx);
    if (nc.ideal) continue;
    b.real_nodes.push_back(i);
    Ahats.push_back(nc.loop.Ahat);
    b.nx += nc.loop.Ahat.rows();
  }
  for (const auto& e : net.edges) {
    b.zoff.push_back(b.nz);
    Es.push_back(e.E);
    b.nz += e.states();
  }
  b.AN = blockdiag(Ahats);
  b.EM = blockdiag(Es);
  b.HDG = Matrix::Zero(b.nx, b.nz);
  b.HTFC = Matrix::Zero(b.nz, b.nx);
  for (int i : b.real_nodes) {
    const auto& L = ctrl.nodes[static_cast<std::size_t>(i)].loop;
    const auto xo = b.xoff[static_cast<std::size_t>(i)];
    for (int j = 0; j < net.M(); ++j) {
      const double h = net.topo.H(i, j);
      if (h == 0.0) continue;
      const auto& e = net.edges[static_cast<std::size_t>(j)];
      const auto zo = b.zoff[static_cast<std::size_t>(j)];
      b.HDG.block(xo, zo, L.Ahat.rows(), e.states()) = h * L.Dhat * e.G;
      b.HTFC.block(zo, xo, e.states(), L.Ahat.rows()) = h * e.F * L.Chat;
    }
  }
  return b;
}

// Coupling block multiplying eps in the (e_x, e_z) entry, per unit eps.
Matrix coupling_block(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps, const Blocks& b) {
  Matrix P = Matrix::Zero(b.nx, b.nz);
  if (ctrl.regime == Regime::Tracking) return P;
  for (int i : b.real_nodes) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    if (nc.role == Role::Master) continue;
    const Matrix& Pi = maps.Pi[static_cast<std::size_t>(i)];
    const auto xo = b.xoff[static_cast<std::size_t>(i)];
    for (int j = 0; j < net.M(); ++j) {
      const double h = net.topo.H(i, j);
      if (h == 0.0) continue;
      const auto& e = net.edges[static_cast<std::size_t>(j)];
      P.block(xo, b.zoff[static_cast<std::size_t>(j)], Pi.rows(), e.states()) = h * Pi * nc.ref_B * e.G;
    }
  }
  return P;
}

void check_maps(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps) {
  if (ctrl.regime == Regime::Tracking) return;
  if (static_cast<int>(maps.Pi.size()) != net.N()) fail(ErrorCode::MissingMaps, "one steady-state map per node is required");
  for (int i = 0; i < net.N(); ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    if (nc.ideal || nc.role == Role::Master) continue;
    const auto& Pi = maps.Pi[static_cast<std::size_t>(i)];
    if (Pi.rows() != nc.loop.Ahat.rows() || Pi.cols() != nc.ref_S.rows())
      fail(ErrorCode::MissingMaps, "steady-state map of node " + std::to_string(i + 1) + " is missing or mis-shaped");
  }
}

}  // namespace

std::string to_string(EntityKind k) {
  switch (k) {
    case EntityKind::NodeState: return "node_state";
    case EntityKind::ControllerState: return "controller_state";
    case EntityKind::EdgeState: return "edge_state";
    case EntityKind::ReferenceState: return "reference_state";
    case EntityKind::ExoState: return "exo_state";
  }
  return "?";
}

const IndexEntry& ClosedLoop::entry(EntityKind kind, int id) const {
  for (const auto& e : index_map)
    if (e.kind == kind && e.id == id) return e;
  fail(ErrorCode::IndexOutOfRange, "no " + to_string(kind) + " block for id " + std::to_string(id));
}

Matrix error_matrix(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps) {
  check_maps(net, ctrl, maps);
  const Blocks b = common_blocks(net, ctrl);
  const double eps = ctrl.eps;
  const Matrix top = -b.HDG + eps * coupling_block(net, ctrl, maps, b);

  if (ctrl.regime == Regime::Tracking) {
    Matrix A(b.nx + b.nz, b.nx + b.nz);
    A << b.AN, -b.HDG, b.HTFC, b.EM;
    return A;
  }

  // reference-generator error block: rows of T (sync / cooperation) or
  // slave nodes (master-slave)
  Matrix Wrow;  // weights: rows = reference blocks, cols = edges
  Matrix Rs, Rb, Rq;
  if (ctrl.regime == Regime::MasterSlave) {
    std::vector<int> slaves;
    for (int i = 0; i < net.N(); ++i)
      if (ctrl.nodes[static_cast<std::size_t>(i)].role == Role::Slave) slaves.push_back(i);
    Wrow = Matrix::Zero(static_cast<Eigen::Index>(slaves.size()), net.M());
    for (std::size_t k = 0; k < slaves.size(); ++k) Wrow.row(static_cast<Eigen::Index>(k)) = net.topo.H.row(slaves[k]);
    Rs = ctrl.coop.G_S;
    Rb = ctrl.coop.G_B;
    Rq = ctrl.coop.G_Q;
  } else {
    Wrow = net.N() >= 2 ? Matrix(with_complement(net.topo).Hbar) : Matrix::Zero(0, net.M());
    const bool coop = ctrl.regime == Regime::Cooperation;
    Rs = coop ? ctrl.coop.G_S : ctrl.exo.S;
    Rb = coop ? ctrl.coop.G_B : ctrl.exo.B_eta;
    Rq = coop ? ctrl.coop.G_Q : ctrl.exo.Q_eta;
  }
  std::vector<Matrix> Fs, Gs;
  for (const auto& e : net.edges) {
    Fs.push_back(e.F);
    Gs.push_back(e.G);
  }
  const auto K = Wrow.rows();
  const auto nr = Rs.rows();
  Matrix WTF = Matrix::Zero(b.nz, K * Rq.rows());
  Matrix WG = Matrix::Zero(K * Rq.rows(), b.nz);
  if (K > 0 && net.M() > 0) {
    WTF = assemble_weighted_blocks(Wrow.transpose(), Fs, {});
    WG = assemble_weighted_blocks(Wrow, {}, Gs);
  }
  const Eigen::Index ne = K * nr;
  const Eigen::Index n = b.nx + b.nz + ne;
  Matrix A = Matrix::Zero(n, n);
  A.topLeftCorner(b.nx, b.nx) = b.AN;
  A.block(0, b.nx, b.nx, b.nz) = top;
  A.block(b.nx, 0, b.nz, b.nx) = b.HTFC;
  A.block(b.nx, b.nx, b.nz, b.nz) = b.EM;
  if (ne > 0) {
    A.block(b.nx, b.nx + b.nz, b.nz, ne) = WTF * kron_eye(K, Rq);
    A.block(b.nx + b.nz, b.nx, ne, b.nz) = -eps * kron_eye(K, Rb) * WG;
    A.bottomRightCorner(ne, ne) = kron_eye(K, Rs);
  }
  return A;
}

ClosedLoop assemble(const Network& net, const ControllerSet& ctrl) {
  return assemble(net, ctrl, ctrl.regime == Regime::Tracking ? NodeMaps{} : node_maps(net, ctrl));
}

ClosedLoop assemble(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps) {
  const auto& exo = ctrl.exo;
  const auto p = exo.p();
  const int N = net.N();
  if (static_cast<int>(ctrl.nodes.size()) != N) fail(ErrorCode::DimensionMismatch, "controller count differs from node count");
  validate_network(net, p);

  ClosedLoop cl;
  cl.regime = ctrl.regime;
  cl.eps = ctrl.eps;

  // layout
  Eigen::Index off = 0;
  auto add = [&](EntityKind k, int id, Eigen::Index len) {
    cl.index_map.push_back({k, id, off, len});
    off += len;
    return off - len;
  };
  struct NodeOff {
    Eigen::Index x = -1, zeta = -1, ref = -1, exo = -1;
  };
  std::vector<NodeOff> no(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    auto& o = no[static_cast<std::size_t>(i)];
    if (!nc.ideal) {
      o.x = add(EntityKind::NodeState, i, net.nodes[static_cast<std::size_t>(i)].sys.A.rows());
      o.zeta = add(EntityKind::ControllerState, i, nc.im.states());
    }
    switch (nc.role) {
      case Role::Tracking:
      case Role::Master: o.exo = add(EntityKind::ExoState, i, exo.q()); break;
      case Role::Sync: o.ref = add(EntityKind::ReferenceState, i, exo.q()); break;
      case Role::Cooperation:
      case Role::Slave:
        o.ref = add(EntityKind::ReferenceState, i, ctrl.coop.G_S.rows());
        o.exo = add(EntityKind::ExoState, i, exo.q());
        break;
    }
  }
  std::vector<Eigen::Index> zo;
  for (int j = 0; j < net.M(); ++j) zo.push_back(add(EntityKind::EdgeState, j, net.edges[static_cast<std::size_t>(j)].states()));
  const Eigen::Index n = off;

  // read-outs
  auto& sg = cl.signals;
  for (int i = 0; i < N; ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    const auto& o = no[static_cast<std::size_t>(i)];
    Matrix y = Matrix::Zero(p, n), v = Matrix::Zero(p, n), ref = Matrix::Zero(p, n);
    if (nc.ideal)
      y.middleCols(o.exo, exo.q()) = exo.Q_eta;
    else
      y.middleCols(o.x, nc.loop.Ahat.rows() - nc.im.states()) = net.nodes[static_cast<std::size_t>(i)].sys.C;
    for (int j = 0; j < net.M(); ++j) {
      const double h = net.topo.H(i, j);
      if (h != 0.0) v.middleCols(zo[static_cast<std::size_t>(j)], net.edges[static_cast<std::size_t>(j)].states()) -= h * net.edges[static_cast<std::size_t>(j)].G;
    }
    Matrix err;
    if (uses_cooperation(nc.role)) {
      ref.middleCols(o.exo, exo.q()) = exo.Q_v;
      err = v - ref;
    } else {
      ref.middleCols(nc.role == Role::Sync ? o.ref : o.exo, exo.q()) = exo.Q_eta;
      err = y - ref;
    }
    sg.y.push_back(std::move(y));
    sg.v.push_back(std::move(v));
    sg.ref.push_back(std::move(ref));
    sg.err.push_back(std::move(err));
  }

  // dynamics
  Matrix& A = cl.A_full;
  A = Matrix::Zero(n, n);
  const double eps = ctrl.eps;
  for (int i = 0; i < N; ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    const auto& o = no[static_cast<std::size_t>(i)];
    const Matrix& V = sg.v[static_cast<std::size_t>(i)];
    if (!nc.ideal) {
      const auto& sys = net.nodes[static_cast<std::size_t>(i)].sys;
      const auto nx = sys.A.rows();
      const auto c = nc.im.states();
      const Matrix& D = sys.D_in.size() ? sys.D_in : sys.B;
      A.block(o.x, o.x, nx, nx) = sys.A + sys.B * nc.K_x;
      A.block(o.x, o.zeta, nx, c) = sys.B * nc.K_zeta;
      A.middleRows(o.x, nx) += D * V;
      A.block(o.zeta, o.x, c, nx) = nc.im.G2 * sys.C;
      A.block(o.zeta, o.zeta, c, c) = nc.im.G1;
      const Eigen::Index r = nc.role == Role::Sync || uses_cooperation(nc.role) ? o.ref : o.exo;
      A.block(o.zeta, r, c, nc.ref_Q.cols()) -= nc.im.G2 * nc.ref_Q;
    }
    switch (nc.role) {
      case Role::Tracking:
      case Role::Master: A.block(o.exo, o.exo, exo.q(), exo.q()) = exo.S; break;
      case Role::Sync:
        A.block(o.ref, o.ref, exo.q(), exo.q()) = exo.S;
        A.middleRows(o.ref, exo.q()) += eps * exo.B_eta * V;
        break;
      case Role::Cooperation:
      case Role::Slave: {
        const auto r = ctrl.coop.G_S.rows();
        A.block(o.ref, o.ref, r, r) = ctrl.coop.G_S;
        A.middleRows(o.ref, r) += eps * ctrl.coop.G_B * V;
        A.block(o.ref, o.exo, r, exo.q()) -= eps * ctrl.coop.G_B * exo.Q_v;
        A.block(o.exo, o.exo, exo.q(), exo.q()) = exo.S;
        break;
      }
    }
  }
  for (int j = 0; j < net.M(); ++j) {
    const auto& e = net.edges[static_cast<std::size_t>(j)];
    const auto z = zo[static_cast<std::size_t>(j)];
    A.block(z, z, e.states(), e.states()) = e.E;
    for (int i = 0; i < N; ++i) {
      const double h = net.topo.H(i, j);
      if (h != 0.0) A.middleRows(z, e.states()) += h * e.F * sg.y[static_cast<std::size_t>(i)];
    }
  }

  // error coordinates
  cl.A_err = error_matrix(net, ctrl, maps);
  Eigen::Index eo = 0;
  for (int i = 0; i < N; ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    if (nc.ideal) continue;
    cl.error_index.push_back({EntityKind::NodeState, i, eo, nc.loop.Ahat.rows()});
    eo += nc.loop.Ahat.rows();
  }
  for (int j = 0; j < net.M(); ++j) {
    cl.error_index.push_back({EntityKind::EdgeState, j, eo, net.edges[static_cast<std::size_t>(j)].states()});
    eo += net.edges[static_cast<std::size_t>(j)].states();
  }
  if (ctrl.regime == Regime::MasterSlave) {
    for (int i = 0; i < N; ++i)
      if (ctrl.nodes[static_cast<std::size_t>(i)].role == Role::Slave) {
        cl.error_index.push_back({EntityKind::ReferenceState, i, eo, ctrl.coop.G_S.rows()});
        eo += ctrl.coop.G_S.rows();
      }
  } else if (ctrl.regime != Regime::Tracking) {
    const auto r = ctrl.regime == Regime::Cooperation ? ctrl.coop.G_S.rows() : exo.q();
    for (int k = 0; k + 1 < N; ++k) {
      cl.error_index.push_back({EntityKind::ReferenceState, k, eo, r});
      eo += r;
    }
  }
  return cl;
}

ClosedLoop assemble_reduced_cooperation(const Network& net, const ControllerSet& ctrl) {
  if (ctrl.regime != Regime::Cooperation) fail(ErrorCode::ValidationError, "the reduced system is defined for cooperation");
  const auto& exo = ctrl.exo;
  const auto& cm = ctrl.coop;
  const auto p = exo.p();
  const auto q = exo.q();
  const auto r = cm.G_S.rows();
  const int N = net.N();
  ClosedLoop cl;
  cl.regime = ctrl.regime;
  cl.eps = ctrl.eps;
  Eigen::Index off = 0;
  for (int i = 0; i < N; ++i) {
    cl.index_map.push_back({EntityKind::ReferenceState, i, off, r});
    cl.index_map.push_back({EntityKind::ExoState, i, off + r, q});
    off += r + q;
  }
  std::vector<Eigen::Index> zo;
  for (int j = 0; j < net.M(); ++j) {
    zo.push_back(off);
    cl.index_map.push_back({EntityKind::EdgeState, j, off, net.edges[static_cast<std::size_t>(j)].states()});
    off += net.edges[static_cast<std::size_t>(j)].states();
  }
  const Eigen::Index n = off;
  auto& sg = cl.signals;
  for (int i = 0; i < N; ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(i) * (r + q);
    Matrix y = Matrix::Zero(p, n), v = Matrix::Zero(p, n), ref = Matrix::Zero(p, n);
    y.middleCols(base, r) = cm.G_Q;
    ref.middleCols(base + r, q) = exo.Q_v;
    for (int j = 0; j < net.M(); ++j) {
      const double h = net.topo.H(i, j);
      if (h != 0.0) v.middleCols(zo[static_cast<std::size_t>(j)], net.edges[static_cast<std::size_t>(j)].states()) -= h * net.edges[static_cast<std::size_t>(j)].G;
    }
    sg.err.push_back(v - ref);
    sg.y.push_back(std::move(y));
    sg.v.push_back(std::move(v));
    sg.ref.push_back(std::move(ref));
  }
  Matrix& A = cl.A_full;
  A = Matrix::Zero(n, n);
  for (int i = 0; i < N; ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(i) * (r + q);
    A.block(base, base, r, r) = cm.G_S;
    A.middleRows(base, r) += ctrl.eps * cm.G_B * sg.v[static_cast<std::size_t>(i)];
    A.block(base, base + r, r, q) -= ctrl.eps * cm.G_B * exo.Q_v;
    A.block(base + r, base + r, q, q) = exo.S;
  }
  for (int j = 0; j < net.M(); ++j) {
    const auto& e = net.edges[static_cast<std::size_t>(j)];
    const auto z = zo[static_cast<std::size_t>(j)];
    A.block(z, z, e.states(), e.states()) = e.E;
    for (int i = 0; i < N; ++i) {
      const double h = net.topo.H(i, j);
      if (h != 0.0) A.middleRows(z, e.states()) += h * e.F * sg.y[static_cast<std::size_t>(i)];
    }
  }
  return cl;
}

Vector initial_state(const ClosedLoop& cl, const References& refs) {
  Vector x0 = Vector::Zero(cl.size());
  auto put = [&](const std::vector<Vector>& src, EntityKind kind, int id, const char* what) {
    if (static_cast<std::size_t>(id) >= src.size() || src[static_cast<std::size_t>(id)].size() == 0) return;
    const auto& e = cl.entry(kind, id);
    const auto& v = src[static_cast<std::size_t>(id)];
    if (v.size() != e.length)
      fail(ErrorCode::DimensionMismatch, std::string(what) + " of node " + std::to_string(id + 1) + " has length " +
                                             std::to_string(v.size()) + ", expected " + std::to_string(e.length));
    x0.segment(e.offset, e.length) = v;
  };
  for (const auto& e : cl.index_map) {
    if (e.kind == EntityKind::EdgeState) continue;
    const int i = e.id;
    // reference generator of a cooperation node is etabar; its exo block is nu
    bool coop = false;
    for (const auto& f : cl.index_map)
      if (f.id == i && f.kind == EntityKind::ReferenceState && e.kind == EntityKind::ExoState) coop = true;
    if (e.kind == EntityKind::ExoState) {
      if (coop)
        put(refs.nu, EntityKind::ExoState, i, "nu");
      else
        put(refs.eta, EntityKind::ExoState, i, "eta");
    } else if (e.kind == EntityKind::ReferenceState) {
      bool has_exo = false;
      for (const auto& f : cl.index_map)
        if (f.id == i && f.kind == EntityKind::ExoState) has_exo = true;
      if (has_exo)
        put(refs.etabar, EntityKind::ReferenceState, i, "etabar");
      else
        put(refs.eta, EntityKind::ReferenceState, i, "eta");
    }
  }
  return x0;
}

double error_abscissa(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps, double eps) {
  ControllerSet c = ctrl;
  c.eps = eps;
  return spectral_abscissa(error_matrix(net, c, maps));
}

LemmaEpsBound lemma_eps_bound(const Network& net, const ControllerSet& ctrl, const NodeMaps& maps) {
  check_maps(net, ctrl, maps);
  const Blocks b = common_blocks(net, ctrl);
  std::vector<Matrix> Ps, Qs;
  for (int i : b.real_nodes) Ps.push_back(ctrl.nodes[static_cast<std::size_t>(i)].Phat.P);
  for (const auto& c : ctrl.edge_certs) Qs.push_back(c.P);
  LemmaEpsBound out;
  out.cert = lemma1_bound(b.AN, -b.HDG, b.HTFC, b.EM, blockdiag(Ps), blockdiag(Qs));
  const Matrix C = coupling_block(net, ctrl, maps, b);
  out.coupling_norm = C.size() ? C.operatorNorm() : 0.0;
  out.eps_bound = out.coupling_norm > 0.0 ? out.cert.eps_bar / out.coupling_norm : std::numeric_limits<double>::infinity();
  return out;
}

EpsStar epsilon_star(const Network& net, const ControllerSet& ctrl, double eps_hi, const EpsOptions& opts) {
  if (!(eps_hi > 0.0)) fail(ErrorCode::ValidationError, "eps_hi must be positive");
  const NodeMaps maps = ctrl.regime == Regime::Tracking ? NodeMaps{} : node_maps(net, ctrl);
  EpsStar out;
  auto stable = [&](double e, double* a = nullptr) {
    const double s = error_abscissa(net, ctrl, maps, e);
    if (a) *a = s;
    return s < opts.stable_below;
  };
  int best = -1;
  for (int k = 0; k < opts.probes; ++k) {
    const double e = eps_hi * std::pow(10.0, -opts.decades * (1.0 - static_cast<double>(k) / (opts.probes - 1)));
    double a = 0.0;
    const bool ok = stable(e, &a);
    out.probes.push_back({e, a});
    if (ok) best = k;
  }
  if (best < 0) fail(ErrorCode::NoStableEps, "no probe eps in [" + std::to_string(out.probes.front().eps) + ", " +
                                                 std::to_string(eps_hi) + "] gives a stable error system");
  if (best == opts.probes - 1) {
    out.eps_bisect = eps_hi;
    out.bracket_hi = eps_hi;
    out.at_upper_limit = true;
  } else {
    double lo = out.probes[static_cast<std::size_t>(best)].eps;
    double hi = out.probes[static_cast<std::size_t>(best + 1)].eps;
    while ((hi - lo) > opts.rel_width * hi) {
      const double mid = 0.5 * (lo + hi);
      (stable(mid) ? lo : hi) = mid;
    }
    out.eps_bisect = lo;
    out.bracket_hi = hi;
  }
  if (ctrl.regime != Regime::Tracking) {
    try {
      out.lemma = lemma_eps_bound(net, ctrl, maps);
    } catch (const Error& e) {
      out.lemma_note = e.what();
    }
  }
  return out;
}

}  // namespace dynedge
