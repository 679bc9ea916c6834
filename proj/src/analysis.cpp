#include "dynedge/analysis.hpp"

#include "dynedge/error.hpp"
#include "dynedge/lmi.hpp"
#include "dynedge/topology.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dynedge {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Eigen::Index complex_rank(const CMatrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol::kRank * s(0)) ++r;
  return r;
}

bool pbh(const Matrix& A, const Matrix& B, bool only_unstable) {
  const auto n = A.rows();
  if (n == 0) return true;
  const CVector ev = eigenvalues(A);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (only_unstable && ev(k).real() < tol::kUnstableRe) continue;
    CMatrix M(n, n + B.cols());
    M.leftCols(n) = A.cast<Complex>() - ev(k) * CMatrix::Identity(n, n);
    M.rightCols(B.cols()) = B.cast<Complex>();
    if (complex_rank(M) < n) return false;
  }
  return true;
}

double sym_residual(const Matrix& P) { return (P - P.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace

CVector eigenvalues(const Matrix& A) {
  if (A.rows() != A.cols()) fail(ErrorCode::DimensionMismatch, "eigenvalues of a non-square matrix");
  if (A.size() == 0) return CVector();
  if (!A.allFinite()) fail(ErrorCode::EigenFailure, "matrix has non-finite entries");
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "QR iteration did not converge");
  return es.eigenvalues();
}

double spectral_abscissa(const Matrix& A) {
  const CVector ev = eigenvalues(A);
  if (ev.size() == 0) return -std::numeric_limits<double>::infinity();
  return ev.real().maxCoeff();
}

Matrix sylvester_solve(const Matrix& A, const Matrix& S, const Matrix& R) {
  const auto n = A.rows();
  const auto q = S.rows();
  if (A.cols() != n || S.cols() != q || R.rows() != n || R.cols() != q)
    fail(ErrorCode::DimensionMismatch, "sylvester_solve: A is " + std::to_string(n) + "x" +
                                           std::to_string(A.cols()) + ", S is " + std::to_string(q) + "x" +
                                           std::to_string(S.cols()) + ", R is " + std::to_string(R.rows()) + "x" +
                                           std::to_string(R.cols()));
  if (n == 0 || q == 0) return Matrix::Zero(n, q);

  Eigen::ComplexSchur<CMatrix> sa(A.cast<Complex>());
  Eigen::ComplexSchur<CMatrix> ss(S.cast<Complex>());
  if (sa.info() != Eigen::Success || ss.info() != Eigen::Success)
    fail(ErrorCode::EigenFailure, "complex Schur decomposition did not converge");
  const CMatrix& Ta = sa.matrixT();
  const CMatrix& Ts = ss.matrixT();
  const CMatrix& Ua = sa.matrixU();
  const CMatrix& Us = ss.matrixU();

  // Ta Y - Y Ts = F,  F = Ua^* (-R) Us
  const CMatrix F = Ua.adjoint() * (-R).cast<Complex>() * Us;
  CMatrix Y = CMatrix::Zero(n, q);
  const double sep_tol = 1e-12 * std::max(1.0, A.norm() + S.norm());
  for (Eigen::Index k = 0; k < q; ++k) {
    CVector rhs = F.col(k);
    for (Eigen::Index l = 0; l < k; ++l) rhs += Ts(l, k) * Y.col(l);
    CMatrix Tk = Ta;
    Tk.diagonal().array() -= Ts(k, k);
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(Tk(i, i)) <= sep_tol)
        fail(ErrorCode::SingularPencil, "A and S share the eigenvalue " + fmt(Ts(k, k).real()) + (Ts(k, k).imag() >= 0 ? "+" : "") +
                                            fmt(Ts(k, k).imag()) + "i");
    Y.col(k) = Tk.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (Ua * Y * Us.adjoint()).real();
}

Matrix lyapunov_solve(const Matrix& A, const Matrix& Q) {
  // P A = (-A^T) P - Q
  const Matrix P = sylvester_solve(-A.transpose(), A, -Q);
  return 0.5 * (P + P.transpose());
}

Certificate marginal_spectrum_certificate(const Matrix& S) {
  const auto q = S.rows();
  if (S.cols() != q) fail(ErrorCode::DimensionMismatch, "S must be square");
  if (q == 0) fail(ErrorCode::DimensionMismatch, "S is empty");
  Eigen::EigenSolver<Matrix> es(S, true);
  if (es.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "QR iteration did not converge");
  const CVector ev = es.eigenvalues();
  const double scale = std::max(1.0, S.norm());
  for (Eigen::Index i = 0; i < q; ++i) {
    if (std::abs(ev(i).real()) > tol::kMarginalRe * scale)
      fail(ErrorCode::SpectrumNotMarginal, "eigenvalue " + fmt(ev(i).real()) + (ev(i).imag() >= 0 ? "+" : "") +
                                               fmt(ev(i).imag()) + "i is off the imaginary axis");
    for (Eigen::Index j = i + 1; j < q; ++j)
      if (std::abs(ev(i) - ev(j)) <= 1e-8 * scale)
        fail(ErrorCode::RepeatedEigenvalue, "eigenvalue " + fmt(ev(i).imag()) + "i is not simple");
  }

  Matrix V = Matrix::Zero(q, q);
  Eigen::Index col = 0;
  const CMatrix vecs = es.eigenvectors();
  for (Eigen::Index i = 0; i < q; ++i) {
    const double w = ev(i).imag();
    if (std::abs(w) <= tol::kMarginalRe * scale) {
      Vector u = vecs.col(i).real();
      if (u.norm() < 1e-300) u = vecs.col(i).imag();
      u.normalize();
      Eigen::Index k;
      u.cwiseAbs().maxCoeff(&k);
      if (u(k) < 0) u = -u;
      V.col(col++) = u;
    } else if (w > 0) {
      CVector z = vecs.col(i);
      const Complex a = z.transpose() * z;
      z *= std::exp(Complex(0.0, -0.5 * std::arg(a)));
      z *= std::sqrt(2.0) / z.norm();
      V.col(col++) = z.real();
      V.col(col++) = z.imag();
    }
  }
  if (col != q) fail(ErrorCode::EigenFailure, "could not assemble the real eigenbasis");
  const Matrix Vinv = V.inverse();
  Matrix P = Vinv.transpose() * Vinv;
  P = 0.5 * (P + P.transpose());
  return {P, -lmi::lambda_max_sym(P * S + S.transpose() * P), CertificateKind::MarginalSpectrum};
}

Certificate verify_spr_certificate(const Matrix& E, const Matrix& F, const Matrix& G, const Matrix& Q) {
  const auto n = E.rows();
  if (Q.rows() != n || Q.cols() != n || F.rows() != n || G.cols() != n || G.rows() != F.cols())
    fail(ErrorCode::DimensionMismatch, "SPR certificate dimensions");
  if (sym_residual(Q) > tol::kSymmetry * std::max(1.0, Q.norm()))
    fail(ErrorCode::CertificateFailed, "Q is not symmetric");
  const double qmin = lmi::lambda_min_sym(Q);
  if (!(qmin > 0.0)) fail(ErrorCode::CertificateFailed, "Q is not positive definite (lambda_min " + fmt(qmin) + ")");
  const double res = (Q * F - G.transpose()).norm();
  if (res > 1e-10 * std::max(1.0, G.norm()))
    fail(ErrorCode::CertificateFailed, "Q F = G^T residual " + fmt(res));
  const double lmax = lmi::lambda_max_sym(Q * E + E.transpose() * Q);
  if (!(lmax < -tol::kStrictAccept))
    fail(ErrorCode::CertificateFailed, "lambda_max(Q E + E^T Q) = " + fmt(lmax) + " is not below -1e-8");
  return {0.5 * (Q + Q.transpose()), -lmax, CertificateKind::SPR};
}

Certificate spr_certificate(const Matrix& E, const Matrix& F, const Matrix& G) {
  if (E.rows() != E.cols() || F.rows() != E.rows() || G.cols() != E.rows() || G.rows() != F.cols())
    fail(ErrorCode::DimensionMismatch, "edge (E, F, G) dimensions");
  const double a = spectral_abscissa(E);
  if (!(a < tol::kHurwitz)) fail(ErrorCode::NotHurwitz, "E has spectral abscissa " + fmt(a));
  const auto res = lmi::lyapunov_margin_search(E, F, G.transpose(), -tol::kStrictAccept);
  if (!res.found || !(res.lambda_max < -tol::kStrictAccept))
    fail(ErrorCode::Infeasible, "no SPR certificate found (best lambda_max " + fmt(res.lambda_max) + ")");
  return verify_spr_certificate(E, F, G, res.P);
}

bool stabilizability_check(const Matrix& A, const Matrix& B) { return pbh(A, B, true); }

bool controllability_check(const Matrix& A, const Matrix& B) { return pbh(A, B, false); }

bool observability_check(const Matrix& A, const Matrix& C) { return pbh(A.transpose(), C.transpose(), false); }

bool transmission_rank_check(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& S) {
  const auto n = A.rows();
  const auto m = B.cols();
  const auto p = C.rows();
  const CVector ev = eigenvalues(S);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    CMatrix M = CMatrix::Zero(n + p, n + m);
    M.topLeftCorner(n, n) = A.cast<Complex>() - ev(k) * CMatrix::Identity(n, n);
    M.topRightCorner(n, m) = B.cast<Complex>();
    M.bottomLeftCorner(p, n) = C.cast<Complex>();
    if (complex_rank(M) < n + p) return false;
  }
  return true;
}

std::vector<Complex> invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C) {
  const auto n = A.rows();
  const auto m = B.cols();
  if (C.rows() != m) fail(ErrorCode::DimensionMismatch, "invariant zeros need a square system (m == p)");
  std::vector<Complex> zeros;
  if (n == 0) return zeros;
  Matrix M = Matrix::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A;
  M.topRightCorner(n, m) = B;
  M.bottomLeftCorner(m, n) = C;
  Matrix Nm = Matrix::Zero(n + m, n + m);
  Nm.topLeftCorner(n, n).setIdentity();
  Eigen::GeneralizedEigenSolver<Matrix> ges(M, Nm, false);
  if (ges.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "QZ iteration did not converge");
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  const double big = 1e8 * std::max(1.0, M.norm());
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    const double b = betas(i);
    const Complex al = alphas(i);
    if (std::abs(b) <= 1e-13 * (std::abs(al) + std::abs(b))) continue;
    const Complex z = al / b;
    if (std::abs(z) > big) continue;
    zeros.push_back(z);
  }
  return zeros;
}

bool hyper_min_phase_check(const Matrix& A, const Matrix& B, const Matrix& C) {
  const Matrix CB = C * B;
  if (CB.rows() != CB.cols()) fail(ErrorCode::DimensionMismatch, "C B is not square");
  if (sym_residual(CB) > 1e-10 * std::max(1.0, CB.norm())) return false;
  if (!(lmi::lambda_min_sym(CB) > 0.0)) return false;
  for (const auto& z : invariant_zeros(A, B, C))
    if (!(z.real() < tol::kUnstableRe)) return false;
  return true;
}

Matrix lemma1_assemble(const Matrix& W1, const Matrix& W2, const Matrix& W3, const Matrix& W4,
                       const Matrix& W5) {
  const auto a = W1.rows();
  const auto b = W4.rows();
  Matrix W(a + b, a + b);
  W << W1, W2 + W5, W3, W4;
  return W;
}

Lemma1Certificate lemma1_bound(const Matrix& W1, const Matrix& W2, const Matrix& W3, const Matrix& W4,
                               const Matrix& P_w, const Matrix& Q_w) {
  const auto a = W1.rows();
  const auto b = W4.rows();
  if (W1.cols() != a || W4.cols() != b || W2.rows() != a || W2.cols() != b || W3.rows() != b ||
      W3.cols() != a || P_w.rows() != a || P_w.cols() != a || Q_w.rows() != b || Q_w.cols() != b)
    fail(ErrorCode::DimensionMismatch, "block certificate dimensions");
  auto spd = [](const Matrix& X) {
    return sym_residual(X) <= tol::kSymmetry * std::max(1.0, X.norm()) && lmi::lambda_min_sym(X) > 0.0;
  };
  if (!spd(P_w)) fail(ErrorCode::HypothesisViolated, "P_w is not symmetric positive definite");
  if (!spd(Q_w)) fail(ErrorCode::HypothesisViolated, "Q_w is not symmetric positive definite");
  const double pw_form = lmi::lambda_max_sym(P_w * W1 + W1.transpose() * P_w);
  if (pw_form > tol::kPassivity * std::max(1.0, P_w.norm() * W1.norm()))
    fail(ErrorCode::HypothesisViolated, "P_w W1 + W1^T P_w is not negative semidefinite (lambda_max " + fmt(pw_form) + ")");
  const double qw_form = lmi::lambda_max_sym(Q_w * W4 + W4.transpose() * Q_w);
  if (!(qw_form < 0.0))
    fail(ErrorCode::HypothesisViolated, "Q_w W4 + W4^T Q_w is not negative definite (lambda_max " + fmt(qw_form) + ")");
  const double cross = (P_w * W2 + W3.transpose() * Q_w).norm();
  if (cross > tol::kIdentity * std::max(1.0, P_w.norm() * W2.norm()))
    fail(ErrorCode::HypothesisViolated, "P_w W2 = -W3^T Q_w fails (residual " + fmt(cross) + ")");
  const double abscissa = spectral_abscissa(W1);
  if (!(abscissa < tol::kHurwitz)) fail(ErrorCode::HypothesisViolated, "W1 is not Hurwitz (abscissa " + fmt(abscissa) + ")");

  Lemma1Certificate c;
  c.P_r = lyapunov_solve(W1, Matrix::Identity(a, a));
  c.eps1 = -qw_form;
  c.a_r = c.P_r.operatorNorm();
  c.a_w = P_w.operatorNorm() + (c.P_r * W2).operatorNorm();
  c.eps_bar = std::min(1.0, c.eps1 / ((c.a_r + c.a_w) * (c.a_r + c.a_w)));
  Matrix P = Matrix::Zero(a + b, a + b);
  P.topLeftCorner(a, a) = P_w + c.eps_bar * c.P_r;
  P.bottomRightCorner(b, b) = Q_w;
  c.P_bar = {P, 0.0, CertificateKind::Lemma1};
  return c;
}

Lemma1Certificate lemma1_certificate(const Matrix& W1, const Matrix& W2, const Matrix& W3, const Matrix& W4,
                                     const Matrix& W5, const Matrix& P_w, const Matrix& Q_w) {
  Lemma1Certificate c = lemma1_bound(W1, W2, W3, W4, P_w, Q_w);
  if (W5.rows() != W2.rows() || W5.cols() != W2.cols()) fail(ErrorCode::DimensionMismatch, "W5 shape");
  const double w5 = W5.size() ? W5.operatorNorm() : 0.0;
  if (!(w5 < c.eps_bar))
    fail(ErrorCode::HypothesisViolated, "||W5|| = " + fmt(w5) + " is not below eps_bar = " + fmt(c.eps_bar));
  const Matrix W = lemma1_assemble(W1, W2, W3, W4, W5);
  const Matrix& P = c.P_bar.P;
  const double lmax = lmi::lambda_max_sym(P * W + W.transpose() * P);
  if (!(lmax < 0.0)) fail(ErrorCode::CertificateFailed, "lambda_max(P W + W^T P) = " + fmt(lmax));
  c.P_bar.slack = -lmax;
  return c;
}

Exosystem make_exosystem(const Matrix& S, const Matrix& Q_eta, const Matrix& Q_v, std::optional<Matrix> P_eta) {
  const auto q = S.rows();
  if (S.cols() != q || Q_eta.cols() != q || Q_v.cols() != q || Q_v.rows() != Q_eta.rows())
    fail(ErrorCode::DimensionMismatch, "exosystem: S is " + std::to_string(q) + "x" + std::to_string(S.cols()) +
                                           ", Q_eta " + std::to_string(Q_eta.rows()) + "x" +
                                           std::to_string(Q_eta.cols()) + ", Q_v " + std::to_string(Q_v.rows()) +
                                           "x" + std::to_string(Q_v.cols()));
  Exosystem exo;
  exo.S = S;
  exo.Q_eta = Q_eta;
  exo.Q_v = Q_v;
  const Certificate cert = marginal_spectrum_certificate(S);
  if (P_eta) {
    const Matrix& P = *P_eta;
    if (P.rows() != q || P.cols() != q) fail(ErrorCode::DimensionMismatch, "P_eta shape");
    if (sym_residual(P) > tol::kSymmetry * std::max(1.0, P.norm()) || !(lmi::lambda_min_sym(P) > 0.0))
      fail(ErrorCode::CertificateFailed, "P_eta is not symmetric positive definite");
    const double lmax = lmi::lambda_max_sym(P * S + S.transpose() * P);
    if (lmax > 1e-10 * std::max(1.0, P.norm() * S.norm()))
      fail(ErrorCode::CertificateFailed, "P_eta S + S^T P_eta has eigenvalue " + fmt(lmax));
    exo.P_eta = P;
  } else {
    exo.P_eta = cert.P;
  }
  exo.B_eta = exo.P_eta.llt().solve(Q_eta.transpose());
  return exo;
}

}  // namespace dynedge
