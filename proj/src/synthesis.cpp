#include "dynedge/synthesis.hpp"

#include "dynedge/analysis.hpp"
#include "dynedge/error.hpp"
#include "dynedge/lmi.hpp"
#include "dynedge/topology.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace dynedge {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Matrix kron_eye(Eigen::Index k, const Matrix& X) {
  return Eigen::kroneckerProduct(Matrix::Identity(k, k), X).eval();
}

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

double identity_scale(const Matrix& target) { return std::max(1.0, target.size() ? target.cwiseAbs().maxCoeff() : 0.0); }

double inf_norm(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

void check_identity(const Matrix& lhs, const Matrix& rhs, const std::string& name, double& worst) {
  const double r = inf_norm(lhs - rhs);
  worst = std::max(worst, r);
  if (r > tol::kIdentity * identity_scale(rhs))
    fail(ErrorCode::IdentityViolated, name + " (residual " + fmt(r) + ")");
}

Matrix sylvester_checked(const Matrix& A, const Matrix& S, const Matrix& R, double& worst) {
  const Matrix X = sylvester_solve(A, S, R);
  if (X.size()) {
    const double res = (X * S - A * X - R).norm();
    const double bound = 1e-10 * (A.norm() + S.norm()) * X.norm() + 1e-12 + 1e-12 * R.norm();
    worst = std::max(worst, res / std::max(1.0, X.norm()));
    if (!(res <= bound * 10.0))
      fail(ErrorCode::SingularPencil, "Sylvester residual " + fmt(res) + " exceeds " + fmt(bound));
  }
  return X;
}

Certificate passivity_from(const NodeLoop& loop, const Matrix& P) {
  const double lmax = lmi::lambda_max_sym(P * loop.Ahat + loop.Ahat.transpose() * P);
  return {P, -lmax, CertificateKind::Passivity};
}

// Checks the A5 identities for a candidate P; empty string when they hold.
std::string a5_violation(const NodeLoop& loop, const Matrix& P) {
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > tol::kSymmetry * std::max(1.0, P.norm()))
    return "P_hat is not symmetric";
  if (!(lmi::lambda_min_sym(P) > 0.0)) return "P_hat is not positive definite";
  const double eq = (P * loop.Dhat - loop.Chat.transpose()).norm();
  if (eq > tol::kPassivity * std::max(1.0, P.norm() * loop.Dhat.norm()))
    return "P_hat D_hat = C_hat^T fails (residual " + fmt(eq) + ")";
  const double nm = lmi::normalized_margin(P, loop.Ahat);
  if (nm > tol::kPassivity) return "P_hat A_hat + A_hat^T P_hat is not negative semidefinite (normalised " + fmt(nm) + ")";
  return {};
}

InternalModel internal_model_from(const Matrix& G1, const Matrix& G2, const Matrix& S, int p) {
  InternalModel im;
  im.G1 = G1;
  im.G2 = G2;
  im.copies = p;
  im.block_dim = static_cast<int>(S.rows());
  im.minimal_poly_coeffs = p_copy_internal_model(S, 1).minimal_poly_coeffs;
  return im;
}

// Each eigenvalue of S must be an eigenvalue of G1 with geometric
// multiplicity >= p; (G1, G2) controllable.
std::string internal_model_violation(const InternalModel& im, const Matrix& S, int p) {
  const auto c = im.G1.rows();
  if (im.G1.cols() != c || im.G2.rows() != c || im.G2.cols() != p) return "G1/G2 shapes";
  if (!controllability_check(im.G1, im.G2)) return "(G1, G2) is not controllable";
  const CVector ev = eigenvalues(S);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    CMatrix M = im.G1.cast<Complex>() - ev(k) * CMatrix::Identity(c, c);
    Eigen::JacobiSVD<CMatrix> svd(M);
    const auto& s = svd.singularValues();
    Eigen::Index nullity = 0;
    const double ref = std::max(1.0, s.size() ? s(0) : 0.0);
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) <= 1e-9 * ref) ++nullity;
    if (nullity < p) return "G1 does not contain " + std::to_string(p) + " copies of every exosystem mode";
  }
  return {};
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Tracking: return "tracking";
    case Regime::Sync: return "sync";
    case Regime::Cooperation: return "cooperation";
    case Regime::MasterSlave: return "master-slave";
  }
  return "?";
}

std::string to_string(Role r) {
  switch (r) {
    case Role::Tracking: return "tracking";
    case Role::Sync: return "sync";
    case Role::Cooperation: return "cooperation";
    case Role::Master: return "master";
    case Role::Slave: return "slave";
  }
  return "?";
}

InternalModel p_copy_internal_model(const Matrix& S, int p) {
  if (p < 1) fail(ErrorCode::DimensionMismatch, "internal model needs p >= 1");
  try {
    marginal_spectrum_certificate(S);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::RepeatedEigenvalue || e.code() == ErrorCode::SpectrumNotMarginal)
      fail(ErrorCode::SpectrumNotMarginal, e.what());
    throw;
  }
  const auto q = S.rows();
  const CVector ev = eigenvalues(S);
  CVector poly = CVector::Zero(q + 1);
  poly(0) = 1.0;
  for (Eigen::Index k = 0; k < q; ++k)
    for (Eigen::Index j = k + 1; j >= 1; --j) poly(j) -= ev(k) * poly(j - 1);

  InternalModel im;
  im.copies = p;
  im.block_dim = static_cast<int>(q);
  im.minimal_poly_coeffs = poly.tail(q).real();
  Matrix alpha = Matrix::Zero(q, q);
  for (Eigen::Index i = 0; i + 1 < q; ++i) alpha(i, i + 1) = 1.0;
  for (Eigen::Index j = 0; j < q; ++j) alpha(q - 1, j) = -im.minimal_poly_coeffs(q - 1 - j);
  Matrix beta = Matrix::Zero(q, 1);
  beta(q - 1) = 1.0;
  im.G1 = kron_eye(p, alpha);
  im.G2 = kron_eye(p, beta);
  return im;
}

NodeLoop node_loop(const LtiSystem& sys, const Matrix& K_x, const Matrix& K_zeta, const InternalModel& im) {
  const auto n = sys.A.rows();
  const auto m = sys.B.cols();
  const auto p = sys.C.rows();
  const auto c = im.G1.rows();
  if (K_x.rows() != m || K_x.cols() != n || K_zeta.rows() != m || K_zeta.cols() != c || im.G2.cols() != p)
    fail(ErrorCode::DimensionMismatch, "controller gains do not match the node and internal model");
  NodeLoop L;
  L.Ahat = Matrix::Zero(n + c, n + c);
  L.Ahat.topLeftCorner(n, n) = sys.A + sys.B * K_x;
  L.Ahat.topRightCorner(n, c) = sys.B * K_zeta;
  L.Ahat.bottomLeftCorner(c, n) = im.G2 * sys.C;
  L.Ahat.bottomRightCorner(c, c) = im.G1;
  const Matrix& D = sys.D_in.size() ? sys.D_in : sys.B;
  L.Dhat = Matrix::Zero(n + c, D.cols());
  L.Dhat.topRows(n) = D;
  L.Chat = Matrix::Zero(p, n + c);
  L.Chat.leftCols(n) = sys.C;
  return L;
}

Matrix NodeController::Dhat_ref() const {
  const auto nc = loop.Ahat.rows();
  const auto c = im.G1.rows();
  Matrix D = Matrix::Zero(nc, ref_Q.cols());
  D.bottomRows(c) = -im.G2 * ref_Q;
  return D;
}

namespace {

// Marginal certificate of G1^T; p copies share one block certificate since
// their eigenvalues repeat.
Matrix internal_model_certificate(const InternalModel& im) {
  const auto q = im.block_dim;
  if (im.copies > 1 && q > 0 && im.G1.rows() == im.copies * q) {
    const Matrix blk = im.G1.topLeftCorner(q, q);
    if ((im.G1 - kron_eye(im.copies, blk)).norm() == 0.0)
      return kron_eye(im.copies, marginal_spectrum_certificate(blk.transpose()).P);
  }
  return marginal_spectrum_certificate(im.G1.transpose()).P;
}

}  // namespace

NodeController passify_node(const LtiSystem& sys, const InternalModel& im, const PassifyOptions& opts) {
  const auto n = sys.A.rows();
  if (sys.D_in.size() && (sys.D_in - sys.B).norm() > 1e-12 * std::max(1.0, sys.B.norm()))
    fail(ErrorCode::SynthesisFailed, "constructive passification needs D = B; supply gains and a certificate instead");
  if (!hyper_min_phase_check(sys.A, sys.B, sys.C)) fail(ErrorCode::NotHyperMinPhase, "C B is not SPD or a zero is not stable");

  const Matrix CBinv = (sys.C * sys.B).inverse();
  Matrix K_x;
  Matrix P_s;
  double kappa = 0.0;
  for (int k = 0; k <= opts.max_doublings; ++k) {
    const Matrix K = -kappa * CBinv * sys.C;
    const Matrix Acl = sys.A + sys.B * K;
    if (spectral_abscissa(Acl) < tol::kHurwitz) {
      const auto r = lmi::lyapunov_margin_search(Acl.transpose(), sys.C.transpose(), sys.B, -tol::kStrictAccept);
      if (r.found && r.lambda_max < 0.0) {
        K_x = K;
        P_s = r.P;
        break;
      }
    }
    kappa = kappa == 0.0 ? 1.0 : 2.0 * kappa;
  }
  if (P_s.size() == 0 && n > 0)
    fail(ErrorCode::SynthesisFailed, "no output-feedback gain made the node strictly passive (kappa up to " + fmt(kappa) + ")");

  InternalModel model = im;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  for (int attempt = 0; attempt < 20; ++attempt) {
    const Matrix P_g = internal_model_certificate(model);
    const Matrix P_g_inv = P_g.inverse();
    const Matrix K_zeta = -model.G2.transpose() * P_g_inv;
    const NodeLoop loop = node_loop(sys, K_x, K_zeta, model);
    const bool obs = observability_check(model.G1, model.G2.transpose() * P_g_inv);
    if (obs && controllability_check(model.G1, model.G2) && spectral_abscissa(loop.Ahat) < tol::kHurwitz) {
      const auto c = model.G1.rows();
      Matrix P = Matrix::Zero(n + c, n + c);
      P.topLeftCorner(n, n) = P_s.inverse();
      P.bottomRightCorner(c, c) = P_g_inv;
      P = 0.5 * (P + P.transpose());
      const std::string bad = a5_violation(loop, P);
      if (!bad.empty()) fail(ErrorCode::SynthesisFailed, "constructed certificate rejected: " + bad);
      NodeController nc;
      nc.role = Role::Tracking;
      nc.K_x = K_x;
      nc.K_zeta = K_zeta;
      nc.im = model;
      nc.loop = loop;
      nc.Phat = passivity_from(loop, P);
      return nc;
    }
    Matrix pert(model.G2.rows(), model.G2.cols());
    for (Eigen::Index i = 0; i < pert.size(); ++i) pert(i) = gauss(rng);
    model.G2 = im.G2 + 0.1 * std::max(1.0, im.G2.norm()) * pert / std::max(pert.norm(), 1e-300);
  }
  fail(ErrorCode::SynthesisFailed, "closed node loop is not Hurwitz for any internal-model input matrix tried");
}

NodeController verify_A5(const LtiSystem& sys, const Matrix& K_x, const Matrix& K_zeta, const InternalModel& im,
                         const std::optional<Matrix>& P_hat) {
  const NodeLoop loop = node_loop(sys, K_x, K_zeta, im);
  const double a = spectral_abscissa(loop.Ahat);
  if (!(a < tol::kHurwitz)) fail(ErrorCode::NotHurwitz, "closed node loop has spectral abscissa " + fmt(a));
  Matrix P;
  if (P_hat) {
    if (P_hat->rows() != loop.Ahat.rows() || P_hat->cols() != loop.Ahat.rows())
      fail(ErrorCode::DimensionMismatch, "P_hat shape");
    P = *P_hat;
  } else {
    const auto r = lmi::lyapunov_margin_search(loop.Ahat, loop.Dhat, loop.Chat.transpose(), tol::kPassivity);
    if (!r.found)
      fail(ErrorCode::CertificateFailed, "no passivity certificate found (best normalised margin " + fmt(r.normalized) + ")");
    P = r.P;
  }
  const std::string bad = a5_violation(loop, P);
  if (!bad.empty()) fail(ErrorCode::CertificateFailed, bad);
  NodeController nc;
  nc.role = Role::Tracking;
  nc.K_x = K_x;
  nc.K_zeta = K_zeta;
  nc.im = im;
  nc.loop = loop;
  nc.Phat = passivity_from(loop, P);
  return nc;
}

RegulatorMap regulator_map(const Matrix& Ahat, const Matrix& Dhat_eta, const Matrix& Chat, const Matrix& S,
                           const Matrix& Q_target) {
  RegulatorMap r;
  r.Pi = sylvester_solve(Ahat, S, Dhat_eta);
  r.sylvester_residual = (r.Pi * S - Ahat * r.Pi - Dhat_eta).norm();
  r.identity_residual = inf_norm(Chat * r.Pi - Q_target);
  if (r.identity_residual > tol::kIdentity * identity_scale(Q_target))
    fail(ErrorCode::InternalModelViolated, "C_hat Pi differs from the target by " + fmt(r.identity_residual));
  return r;
}

CooperationMatrices cooperation_matrices(const Exosystem& exo) {
  const auto p = exo.p();
  const auto q = exo.q();
  CooperationMatrices cm;
  cm.G_S = kron_eye(p, exo.S);
  cm.G_B = Matrix::Zero(p * q, p);
  cm.G_Q = Matrix::Zero(p, p * q);
  for (Eigen::Index i = 0; i < p; ++i) {
    cm.G_B.block(i * q, i, q, 1) = exo.B_eta.col(i);
    cm.G_Q.block(i, i * q, 1, q) = exo.Q_eta.row(i);
  }
  return cm;
}

NodeController node_controller(const LtiSystem& sys, const ControllerSpec* spec, const Exosystem& exo,
                               std::uint64_t seed) {
  const int p = static_cast<int>(exo.p());
  if (spec == nullptr || spec->synthesize) {
    PassifyOptions po;
    po.seed = seed;
    return passify_node(sys, p_copy_internal_model(exo.S, p), po);
  }
  const InternalModel im = internal_model_from(spec->G1, spec->G2, exo.S, p);
  const std::string bad = internal_model_violation(im, exo.S, p);
  if (!bad.empty()) fail(ErrorCode::InternalModelViolated, bad);
  return verify_A5(sys, spec->K_x, spec->K_zeta, im, spec->P_hat);
}

int ControllerSet::slaves() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.role == Role::Slave; }));
}

ControllerSet build_controllers(const Network& net, const Exosystem& exo, Regime regime, const std::vector<Role>& roles,
                                double eps, const std::vector<ControllerSpec>& specs, std::uint64_t seed) {
  const auto p = exo.p();
  validate_network(net, p);
  if (!(eps >= 0.0) || !std::isfinite(eps)) fail(ErrorCode::ValidationError, "eps must be a finite value >= 0");
  if (!specs.empty() && static_cast<int>(specs.size()) != net.N())
    fail(ErrorCode::DimensionMismatch, "one controller spec per node is required");

  ControllerSet cs;
  cs.regime = regime;
  cs.eps = eps;
  cs.exo = exo;
  cs.coop = cooperation_matrices(exo);
  std::vector<std::string> failures;

  // (I_p (x) P_eta) G_B = G_Q^T
  {
    const Matrix IP = kron_eye(p, exo.P_eta);
    const double r = inf_norm(IP * cs.coop.G_B - cs.coop.G_Q.transpose());
    if (r > tol::kIdentity * identity_scale(cs.coop.G_Q)) failures.push_back("(I (x) P_eta) G_B = G_Q^T fails by " + fmt(r));
    const double l = lmi::lambda_max_sym(IP * cs.coop.G_S + cs.coop.G_S.transpose() * IP);
    if (l > 1e-10 * std::max(1.0, IP.norm() * cs.coop.G_S.norm()))
      failures.push_back("(I (x) P_eta) G_S + G_S^T (I (x) P_eta) has eigenvalue " + fmt(l));
  }

  for (int j = 0; j < net.M(); ++j) {
    const auto& e = net.edges[static_cast<std::size_t>(j)];
    try {
      cs.edge_certs.push_back(spr_certificate(e.E, e.F, e.G));
    } catch (const Error& err) {
      failures.push_back("A3 edge " + std::to_string(j + 1) + ": " + err.what());
      cs.edge_certs.push_back({});
    }
  }

  if (regime == Regime::MasterSlave) {
    if (static_cast<int>(roles.size()) != net.N())
      fail(ErrorCode::ValidationError, "master-slave needs one role per node");
    const auto slaves = std::count(roles.begin(), roles.end(), Role::Slave);
    for (auto r : roles)
      if (r != Role::Slave && r != Role::Master) fail(ErrorCode::ValidationError, "roles must be master or slave");
    if (slaves == net.N()) fail(ErrorCode::AllSlaves, "at least one node must be a master");
  }

  InternalModel canonical;
  try {
    canonical = p_copy_internal_model(exo.S, static_cast<int>(p));
  } catch (const Error& err) {
    fail(ErrorCode::AssumptionFailed, std::string("A2: ") + err.what());
  }

  for (int i = 0; i < net.N(); ++i) {
    const auto& node = net.nodes[static_cast<std::size_t>(i)];
    const std::string who = "node " + std::to_string(i + 1);
    Role role = Role::Tracking;
    switch (regime) {
      case Regime::Tracking: role = Role::Tracking; break;
      case Regime::Sync: role = Role::Sync; break;
      case Regime::Cooperation: role = Role::Cooperation; break;
      case Regime::MasterSlave: role = roles[static_cast<std::size_t>(i)]; break;
    }
    NodeController nc;
    if (node.ideal) {
      if (role != Role::Master && role != Role::Tracking)
        fail(ErrorCode::ValidationError, who + ": an ideal node can only be a tracking node or a master");
      nc.ideal = true;
    } else {
      try {
        const ControllerSpec* spec = specs.empty() ? nullptr : &specs[static_cast<std::size_t>(i)];
        nc = node_controller(node.sys, spec, exo, seed + static_cast<std::uint64_t>(i));
      } catch (const Error& err) {
        failures.push_back("A5 " + who + ": " + err.what());
        continue;
      }
    }
    nc.role = role;
    if (role == Role::Cooperation || role == Role::Slave) {
      nc.ref_S = cs.coop.G_S;
      nc.ref_B = cs.coop.G_B;
      nc.ref_Q = cs.coop.G_Q;
    } else {
      nc.ref_S = exo.S;
      if (role == Role::Sync) nc.ref_B = exo.B_eta;
      nc.ref_Q = exo.Q_eta;
    }
    cs.nodes.push_back(std::move(nc));
  }

  if (!failures.empty()) {
    std::string msg;
    for (const auto& f : failures) msg += (msg.empty() ? "" : "; ") + f;
    fail(ErrorCode::AssumptionFailed, msg);
  }
  return cs;
}

NodeMaps node_maps(const Network& net, const ControllerSet& ctrl) {
  NodeMaps maps;
  const auto& exo = ctrl.exo;
  for (int i = 0; i < net.N(); ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    if (nc.ideal) {
      maps.Pi.emplace_back();
      maps.Pi2.emplace_back();
      continue;
    }
    const std::string who = "node " + std::to_string(i + 1);
    if (nc.role == Role::Cooperation || nc.role == Role::Slave) {
      const auto r1 = regulator_map(nc.loop.Ahat, nc.Dhat_ref(), nc.loop.Chat, ctrl.coop.G_S, ctrl.coop.G_Q);
      maps.max_residual = std::max(maps.max_residual, r1.identity_residual);
      const Matrix Pi2 = sylvester_solve(nc.loop.Ahat, exo.S, nc.loop.Dhat * exo.Q_v);
      check_identity(nc.loop.Chat * Pi2, Matrix::Zero(exo.p(), exo.q()), who + ": C_hat Pi_bar_2 = 0", maps.max_residual);
      maps.Pi.push_back(r1.Pi);
      maps.Pi2.push_back(Pi2);
    } else {
      const auto r = regulator_map(nc.loop.Ahat, nc.Dhat_ref(), nc.loop.Chat, exo.S, exo.Q_eta);
      maps.max_residual = std::max(maps.max_residual, r.identity_residual);
      maps.Pi.push_back(r.Pi);
      maps.Pi2.emplace_back();
    }
  }
  return maps;
}

PiTilde pi_tilde(const Network& net, const ControllerSet& ctrl) {
  if (ctrl.regime != Regime::Cooperation) fail(ErrorCode::MissingMaps, "Pi_tilde is defined for the cooperation regime");
  if (net.N() < 2) fail(ErrorCode::DimensionTooSmall, "Pi_tilde needs at least two nodes");
  const Topology topo = with_complement(net.topo);
  const int N1 = net.N() - 1;
  const auto& cm = ctrl.coop;
  const auto& exo = ctrl.exo;
  std::vector<Matrix> Es, Fs, Gs;
  for (const auto& e : net.edges) {
    Es.push_back(e.E);
    Fs.push_back(e.F);
    Gs.push_back(e.G);
  }
  const Matrix EM = blockdiag(Es);
  const Matrix HbarTF = assemble_weighted_blocks(topo.Hbar.transpose(), Fs, {});
  const Matrix HbarG = assemble_weighted_blocks(topo.Hbar, {}, Gs);
  const auto nz = EM.rows();
  const auto ne = N1 * cm.G_S.rows();
  Matrix A(nz + ne, nz + ne);
  A << EM, HbarTF * kron_eye(N1, cm.G_Q), -ctrl.eps * kron_eye(N1, cm.G_B) * HbarG, kron_eye(N1, cm.G_S);
  Matrix B = Matrix::Zero(nz + ne, N1 * exo.q());
  B.bottomRows(ne) = -ctrl.eps * kron_eye(N1, cm.G_B * exo.Q_v);
  const Matrix S = kron_eye(N1, exo.S);

  PiTilde out;
  out.Pi = sylvester_solve(A, S, B);
  out.sylvester_residual = (out.Pi * S - A * out.Pi - B).norm();
  out.Pi_z = out.Pi.topRows(nz);
  out.Pi_eta = out.Pi.bottomRows(ne);
  const Matrix target = kron_eye(N1, exo.Q_v);
  out.identity_residual = inf_norm(-HbarG * out.Pi_z - target);
  if (out.identity_residual > tol::kIdentity * identity_scale(target))
    fail(ErrorCode::IdentityViolated, "-HbarG Pi_z = I (x) Q_v (residual " + fmt(out.identity_residual) + ")");
  return out;
}

MasterSlaveMaps master_slave_maps(const Network& net, const ControllerSet& ctrl) {
  if (ctrl.regime != Regime::MasterSlave) fail(ErrorCode::MissingMaps, "master-slave maps need the master-slave regime");
  const auto& exo = ctrl.exo;
  const auto& cm = ctrl.coop;
  const auto p = exo.p();
  const auto q = exo.q();
  const auto pq = cm.G_S.rows();
  const int N = net.N();
  const Matrix& H = net.topo.H;

  MasterSlaveMaps ms;
  for (int i = 0; i < N; ++i)
    (ctrl.nodes[static_cast<std::size_t>(i)].role == Role::Slave ? ms.slaves : ms.masters).push_back(i);
  const auto l = static_cast<Eigen::Index>(ms.slaves.size());
  const auto nm = static_cast<Eigen::Index>(ms.masters.size());

  std::vector<Eigen::Index> zoff;
  Eigen::Index nz = 0;
  for (const auto& e : net.edges) {
    zoff.push_back(nz);
    nz += e.states();
  }
  const Eigen::Index nZ = nz + l * pq;
  const Eigen::Index nw = (l + nm) * q;

  // reduced (z, etabar_slaves) system driven by omega = [nu_hat; eta_hat]
  Matrix A = Matrix::Zero(nZ, nZ);
  Matrix B = Matrix::Zero(nZ, nw);
  for (int j = 0; j < net.M(); ++j) {
    const auto& e = net.edges[static_cast<std::size_t>(j)];
    const auto r0 = zoff[static_cast<std::size_t>(j)];
    const auto nzj = e.states();
    A.block(r0, r0, nzj, nzj) = e.E;
    for (Eigen::Index k = 0; k < l; ++k) {
      const double h = H(ms.slaves[static_cast<std::size_t>(k)], j);
      if (h == 0.0) continue;
      A.block(r0, nz + k * pq, nzj, pq) += h * e.F * cm.G_Q;
      A.block(nz + k * pq, r0, pq, nzj) += -ctrl.eps * h * cm.G_B * e.G;
    }
    for (Eigen::Index m = 0; m < nm; ++m) {
      const double h = H(ms.masters[static_cast<std::size_t>(m)], j);
      if (h != 0.0) B.block(r0, (l + m) * q, nzj, q) += h * e.F * exo.Q_eta;
    }
  }
  for (Eigen::Index k = 0; k < l; ++k) {
    A.block(nz + k * pq, nz + k * pq, pq, pq) = cm.G_S;
    B.block(nz + k * pq, k * q, pq, q) = -ctrl.eps * cm.G_B * exo.Q_v;
  }
  const Matrix Sw = kron_eye(l + nm, exo.S);
  double worst = 0.0;
  const Matrix Pi = sylvester_checked(A, Sw, B, worst);
  ms.Pi_z_nu = Pi.topLeftCorner(nz, l * q);
  ms.Pi_z_eta = Pi.topRightCorner(nz, nm * q);
  ms.Pi_etabar_nu = Pi.bottomLeftCorner(l * pq, l * q);
  ms.Pi_etabar_eta = Pi.bottomRightCorner(l * pq, nm * q);

  for (int i = 0; i < N; ++i) {
    Matrix Mi = Matrix::Zero(p, l * q);
    Matrix Ni = Matrix::Zero(p, nm * q);
    for (int j = 0; j < net.M(); ++j) {
      const double h = H(i, j);
      if (h == 0.0) continue;
      const auto& e = net.edges[static_cast<std::size_t>(j)];
      const auto r0 = zoff[static_cast<std::size_t>(j)];
      Mi -= h * e.G * ms.Pi_z_nu.middleRows(r0, e.states());
      Ni -= h * e.G * ms.Pi_z_eta.middleRows(r0, e.states());
    }
    ms.M.push_back(Mi);
    ms.Nmap.push_back(Ni);
  }

  for (Eigen::Index k = 0; k < l; ++k) {
    const int i = ms.slaves[static_cast<std::size_t>(k)];
    const std::string who = "slave node " + std::to_string(i + 1);
    Matrix xi = Matrix::Zero(1, l);
    xi(0, k) = 1.0;
    check_identity(ms.M[static_cast<std::size_t>(i)], Eigen::kroneckerProduct(xi, exo.Q_v).eval(),
                   who + ": -sum_j h_ij G_j Pi_zj^nu = xi (x) Q_v", worst);
    check_identity(ms.Nmap[static_cast<std::size_t>(i)], Matrix::Zero(p, nm * q),
                   who + ": sum_j h_ij G_j Pi_zj^eta = 0", worst);
  }

  ms.Pi_nu.resize(static_cast<std::size_t>(N));
  ms.Pi_ref.resize(static_cast<std::size_t>(N));
  const Matrix Sl = kron_eye(l, exo.S);
  const Matrix Sm = kron_eye(nm, exo.S);
  for (int i = 0; i < N; ++i) {
    const auto& nc = ctrl.nodes[static_cast<std::size_t>(i)];
    if (nc.ideal) continue;
    const std::string who = "node " + std::to_string(i + 1);
    const auto& L = nc.loop;
    Matrix Pnu = sylvester_checked(L.Ahat, Sl, L.Dhat * ms.M[static_cast<std::size_t>(i)], worst);
    check_identity(L.Chat * Pnu, Matrix::Zero(p, l * q), who + ": C_hat Pi^nu = 0", worst);
    Matrix Pref;
    if (nc.role == Role::Slave) {
      Pref = sylvester_checked(L.Ahat, cm.G_S, nc.Dhat_ref(), worst);
      check_identity(L.Chat * Pref, cm.G_Q, who + ": C_hat Pi_f^etabar = G_Q", worst);
    } else {
      const auto m = std::find(ms.masters.begin(), ms.masters.end(), i) - ms.masters.begin();
      Matrix xi = Matrix::Zero(1, nm);
      xi(0, m) = 1.0;
      const Matrix R = L.Dhat * ms.Nmap[static_cast<std::size_t>(i)] + Eigen::kroneckerProduct(xi, nc.Dhat_ref()).eval();
      Pref = sylvester_checked(L.Ahat, Sm, R, worst);
      check_identity(L.Chat * Pref, Eigen::kroneckerProduct(xi, exo.Q_eta).eval(), who + ": C_hat Pi_l^eta = xi (x) Q_eta",
                     worst);
    }
    ms.Pi_nu[static_cast<std::size_t>(i)] = std::move(Pnu);
    ms.Pi_ref[static_cast<std::size_t>(i)] = std::move(Pref);
  }
  ms.max_residual = worst;
  return ms;
}

}  // namespace dynedge
