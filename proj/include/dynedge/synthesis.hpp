#pragma once

#include "dynedge/network.hpp"
#include "dynedge/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dynedge {

enum class Regime { Tracking, Sync, Cooperation, MasterSlave };
enum class Role { Tracking, Sync, Cooperation, Master, Slave };

std::string to_string(Regime r);
std::string to_string(Role r);

/// p parallel copies of the minimal polynomial of S in controllable
/// companion form: G1 = diag(alpha, ..., alpha), G2 = diag(beta, ..., beta).
struct InternalModel {
  Matrix G1;
  Matrix G2;
  int copies = 0;
  int block_dim = 0;
  Vector minimal_poly_coeffs;  // a_1..a_q of l^q + a_1 l^{q-1} + ... + a_q

  Eigen::Index states() const { return G1.rows(); }
};

InternalModel p_copy_internal_model(const Matrix& S, int p);

/// Node loop with the internal-model controller closed:
///   Ahat = [A + B Kx, B Kz; G2 C, G1],  Dhat = [D; 0],  Chat = [C, 0].
struct NodeLoop {
  Matrix Ahat;
  Matrix Dhat;
  Matrix Chat;
};

NodeLoop node_loop(const LtiSystem& sys, const Matrix& K_x, const Matrix& K_zeta, const InternalModel& im);

struct NodeController {
  Role role = Role::Tracking;
  bool ideal = false;
  Matrix K_x;
  Matrix K_zeta;
  InternalModel im;
  Matrix ref_S;  // S_eta or G_S
  Matrix ref_B;  // B_eta or G_B (unscaled; eps lives in ControllerSet), empty for Tracking/Master
  Matrix ref_Q;  // Q_eta or G_Q
  Certificate Phat;  // P Ahat + Ahat^T P <= 0, P Dhat = Chat^T
  NodeLoop loop;

  /// [0; -G2 ref_Q]
  Matrix Dhat_ref() const;
  Eigen::Index ref_states() const { return ref_S.rows(); }
};

struct PassifyOptions {
  std::uint64_t seed = 1;
  int max_doublings = 40;
};

/// Constructive passification for hyper-minimum-phase nodes with D = B:
/// K_x = -kappa (C B)^{-1} C with kappa = 0, 1, 2, 4, ... until a P_s > 0
/// with C P_s = B^T and (A + B K_x) P_s + P_s (A + B K_x)^T < 0 exists;
/// K_zeta = -G2^T P_g^{-1} with P_g the marginal certificate of G1^T.
/// The returned certificate is diag(P_s^{-1}, P_g^{-1}).
NodeController passify_node(const LtiSystem& sys, const InternalModel& im, const PassifyOptions& opts = {});

/// Checks A5 for externally supplied gains. With no P_hat a certificate is
/// searched for. Throws NotHurwitz or CertificateFailed.
NodeController verify_A5(const LtiSystem& sys, const Matrix& K_x, const Matrix& K_zeta, const InternalModel& im,
                         const std::optional<Matrix>& P_hat = std::nullopt);

struct RegulatorMap {
  Matrix Pi;
  double sylvester_residual = 0.0;
  double identity_residual = 0.0;
};

/// Pi S = Ahat Pi + Dhat_eta with Chat Pi = Q_target.
RegulatorMap regulator_map(const Matrix& Ahat, const Matrix& Dhat_eta, const Matrix& Chat, const Matrix& S,
                           const Matrix& Q_target);

/// G_S = I_p (x) S, G_B = blockdiag(columns of B_eta), G_Q = blockdiag(rows of Q_eta).
struct CooperationMatrices {
  Matrix G_S;
  Matrix G_B;
  Matrix G_Q;
};

CooperationMatrices cooperation_matrices(const Exosystem& exo);

struct ControllerSet {
  Regime regime = Regime::Tracking;
  double eps = 0.0;
  Exosystem exo;
  CooperationMatrices coop;
  std::vector<NodeController> nodes;
  std::vector<Certificate> edge_certs;

  int slaves() const;
};

/// Per-node gain source: explicit gains (verified) or synthesis.
struct ControllerSpec {
  bool synthesize = true;
  Matrix K_x;
  Matrix K_zeta;
  Matrix G1;
  Matrix G2;
  std::optional<Matrix> P_hat;
};

/// A5 for one node: synthesis when `spec` is null or asks for it, otherwise
/// the supplied gains and internal model are checked.
NodeController node_controller(const LtiSystem& sys, const ControllerSpec* spec, const Exosystem& exo,
                               std::uint64_t seed = 1);

/// Builds the regime's controllers. `roles` is only read for MasterSlave
/// (Master/Slave per node, any order); `specs` may be empty (synthesize all).
/// Throws AssumptionFailed listing every failed check, or AllSlaves.
ControllerSet build_controllers(const Network& net, const Exosystem& exo, Regime regime,
                                const std::vector<Role>& roles, double eps,
                                const std::vector<ControllerSpec>& specs = {}, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Steady-state maps

/// Per-node maps used by the error coordinates. Tracking/Sync/Master: the
/// regulator map of (S_eta, Q_eta). Cooperation/Slave: Pi_bar_1 for G_S
/// (target G_Q) and Pi_bar_2 for S_eta driven by Dhat Q_v (target 0).
/// Ideal nodes get empty entries.
struct NodeMaps {
  std::vector<Matrix> Pi;
  std::vector<Matrix> Pi2;
  double max_residual = 0.0;
};

NodeMaps node_maps(const Network& net, const ControllerSet& ctrl);

/// Pi_tilde of the reduced cooperation system: Pi (I (x) S) = A_nu Pi + B_nu
/// and -HbarG Pi_z = I (x) Q_v.
struct PiTilde {
  Matrix Pi;
  Matrix Pi_z;
  Matrix Pi_eta;
  double sylvester_residual = 0.0;
  double identity_residual = 0.0;
};

PiTilde pi_tilde(const Network& net, const ControllerSet& ctrl);

/// Maps of the master-slave steady state, indexed by node. omega stacks the
/// slave references nu_1..nu_l then the master references eta_{l+1}..eta_N
/// in node order.
struct MasterSlaveMaps {
  std::vector<int> slaves;   // node indices (0-based)
  std::vector<int> masters;
  Matrix Pi_z_nu;            // M-stacked edge maps
  Matrix Pi_z_eta;
  Matrix Pi_etabar_nu;       // slave reference maps
  Matrix Pi_etabar_eta;
  std::vector<Matrix> M;     // -sum_j h_ij G_j Pi_zj^nu
  std::vector<Matrix> Nmap;  // -sum_j h_ij G_j Pi_zj^eta
  std::vector<Matrix> Pi_nu;   // Pi_f^nu (slaves), Pi_l^nu (masters)
  std::vector<Matrix> Pi_ref;  // Pi_f^etabar (slaves), Pi_l^eta (masters)
  double max_residual = 0.0;   // worst identity residual
};

MasterSlaveMaps master_slave_maps(const Network& net, const ControllerSet& ctrl);

}  // namespace dynedge
