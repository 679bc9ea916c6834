#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace dynedge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Numerical conventions shared by the analysis routines. Every call that
/// uses one of these also accepts an override.
namespace tol {
inline constexpr double kRank = 1e-10;           // relative to sigma_max
inline constexpr double kSymmetry = 1e-12;
inline constexpr double kMarginalRe = 1e-9;      // |Re lambda| for imaginary-axis modes
inline constexpr double kUnstableRe = -1e-9;     // Re lambda >= this counts as non-stable
inline constexpr double kStrictAccept = 1e-8;    // strict LMI acceptance margin
inline constexpr double kPassivity = 1e-9;       // non-strict LMI, normalised
inline constexpr double kIdentity = 1e-8;        // regulator identities
inline constexpr double kHurwitz = -1e-9;        // spectral abscissa threshold
}  // namespace tol

/// Plain state-space record (A, B, C) with an optional disturbance input D.
struct LtiSystem {
  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D_in;  // n x p, may be empty

  Eigen::Index states() const { return A.rows(); }
};

enum class CertificateKind { Lyapunov, SPR, Passivity, MarginalSpectrum, Lemma1 };

std::string to_string(CertificateKind kind);

/// Symmetric positive definite witness. `slack` is the certified margin of
/// the strict (or non-strict) inequality it was built for: for a matrix
/// inequality M(P) <= 0 it is -lambda_max(M(P)), so non-strict certificates
/// may carry a slack that is zero up to rounding.
struct Certificate {
  Matrix P;
  double slack = 0.0;
  CertificateKind kind = CertificateKind::Lyapunov;
};

/// Reference generator shared by every node: eta_i' = S eta_i,
/// y_eta = Q_eta eta, vbar = Q_v nu.
struct Exosystem {
  Matrix S;
  Matrix Q_eta;
  Matrix Q_v;
  Matrix P_eta;  // filled by make_exosystem
  Matrix B_eta;  // P_eta^{-1} Q_eta^T

  Eigen::Index q() const { return S.rows(); }
  Eigen::Index p() const { return Q_eta.rows(); }
};

}  // namespace dynedge
