#pragma once

#include "dynedge/types.hpp"

#include <optional>
#include <vector>

namespace dynedge {

// ---------------------------------------------------------------------------
// Spectra and linear matrix equations

/// max Re(lambda) over the eigenvalues of A. Throws EigenFailure if the QR
/// iteration did not converge.
double spectral_abscissa(const Matrix& A);

/// Complex eigenvalues of A (EigenFailure on non-convergence).
CVector eigenvalues(const Matrix& A);

/// Solves X S = A X + R (equivalently A X - X S = -R) by Bartels-Stewart on
/// the complex Schur forms of A and S. Throws SingularPencil when A and S
/// share an eigenvalue.
Matrix sylvester_solve(const Matrix& A, const Matrix& S, const Matrix& R);

/// Solves P A + A^T P = -Q; the result is symmetrised.
Matrix lyapunov_solve(const Matrix& A, const Matrix& Q);

// ---------------------------------------------------------------------------
// Certificates

/// P > 0 with P S + S^T P = 0 for S with simple imaginary-axis spectrum.
/// Built from the real eigenstructure S = V J V^{-1}, J block-diagonal with
/// skew 2x2 blocks and 1x1 zeros, P = V^{-T} V^{-1}; each 2x2 block of V is
/// normalised so that a pure rotation yields the identity.
Certificate marginal_spectrum_certificate(const Matrix& S);

/// Strict positive realness witness: Q > 0, Q F = G^T and
/// lambda_max(Q E + E^T Q) < 0. Throws NotHurwitz or Infeasible.
Certificate spr_certificate(const Matrix& E, const Matrix& F, const Matrix& G);

/// Checks a user-supplied SPR witness; returns it with the measured slack.
/// Throws CertificateFailed with margins when an identity fails.
Certificate verify_spr_certificate(const Matrix& E, const Matrix& F, const Matrix& G, const Matrix& Q);

// ---------------------------------------------------------------------------
// Structural checks on node systems

/// PBH test over every eigenvalue with Re >= -1e-9.
bool stabilizability_check(const Matrix& A, const Matrix& B);

/// rank [A - lambda I, B; C, 0] = n + p for every eigenvalue lambda of S.
bool transmission_rank_check(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& S);

/// Finite invariant zeros of (A, B, C): generalized eigenvalues of the
/// pencil [A B; C 0] - lambda [I 0; 0 0], infinite ones discarded.
std::vector<Complex> invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C);

/// C B symmetric positive definite and every invariant zero in Re < -1e-9.
/// Throws DimensionMismatch when C B is not square.
bool hyper_min_phase_check(const Matrix& A, const Matrix& B, const Matrix& C);

/// Observability of (A, C) by PBH.
bool observability_check(const Matrix& A, const Matrix& C);
bool controllability_check(const Matrix& A, const Matrix& B);

// ---------------------------------------------------------------------------
// Constructive stability certificate for W = [W1, W2 + W5; W3, W4]

struct Lemma1Certificate {
  Certificate P_bar;      // diag(P_w + eps_bar P_r, Q_w), slack from direct eigenvalues
  double eps_bar = 0.0;   // min{1, eps1 / (a_r + a_w)^2}
  double eps1 = 0.0;
  double a_r = 0.0;
  double a_w = 0.0;
  Matrix P_r;
};

/// Hypothesis check plus the (W5-independent) bound eps_bar. Throws
/// HypothesisViolated naming the failed condition.
Lemma1Certificate lemma1_bound(const Matrix& W1, const Matrix& W2, const Matrix& W3, const Matrix& W4,
                               const Matrix& P_w, const Matrix& Q_w);

/// Full certificate for a given W5: requires ||W5||_2 < eps_bar and
/// re-verifies lambda_max(P_bar W + W^T P_bar) < 0 before returning.
Lemma1Certificate lemma1_certificate(const Matrix& W1, const Matrix& W2, const Matrix& W3, const Matrix& W4,
                                     const Matrix& W5, const Matrix& P_w, const Matrix& Q_w);

/// W = [W1, W2 + W5; W3, W4].
Matrix lemma1_assemble(const Matrix& W1, const Matrix& W2, const Matrix& W3, const Matrix& W4,
                       const Matrix& W5);

// ---------------------------------------------------------------------------
// Exosystem

/// Fills P_eta (marginal certificate) and B_eta = P_eta^{-1} Q_eta^T.
/// Throws SpectrumNotMarginal / RepeatedEigenvalue / DimensionMismatch.
Exosystem make_exosystem(const Matrix& S, const Matrix& Q_eta, const Matrix& Q_v,
                         std::optional<Matrix> P_eta = std::nullopt);

}  // namespace dynedge
