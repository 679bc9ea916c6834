#pragma once

#include "dynedge/types.hpp"

#include <functional>
#include <vector>

namespace dynedge::lmi {

/// Affine set of symmetric matrices {P = P0 + sum_k theta_k basis[k]}.
struct AffineSymFamily {
  Matrix P0;
  std::vector<Matrix> basis;
  double residual = 0.0;  // ||P0 U - V|| of the particular solution

  Matrix at(const Vector& theta) const;
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }
};

/// All symmetric P (n x n) with P U = V. Throws Infeasible when the affine
/// constraint has no symmetric solution.
AffineSymFamily symmetric_solutions(const Matrix& U, const Matrix& V);

/// One linear matrix inequality F0 + sum_k y_k F[k] > 0 in the variables y.
struct Lmi {
  Matrix F0;
  std::vector<Matrix> F;

  Matrix at(const Vector& y) const;
};

struct BarrierOptions {
  int max_newton = 400;
  double mu0 = 1.0;
  double mu_growth = 8.0;
  double gap_tol = 1e-12;
};

struct BarrierResult {
  Vector y;
  double objective = 0.0;
  int newton_steps = 0;
  bool stopped_early = false;
};

/// Log-barrier interior point method for  min c'y  s.t. every LMI > 0,
/// started from a strictly feasible y0. `stop` is checked after every
/// centering step and ends the search when it returns true.
BarrierResult minimize(const Vector& c, const std::vector<Lmi>& lmis, Vector y0,
                       const BarrierOptions& opts = {},
                       const std::function<bool(const Vector&)>& stop = {});

/// Outcome of a Lyapunov-margin search.
struct MarginResult {
  Matrix P;
  double lambda_max = 0.0;       // of P A + A^T P, original coordinates
  double normalized = 0.0;       // same, after diagonal congruence scaling
  bool found = false;            // met the requested target
};

/// Searches P > 0 with P U = V minimising lambda_max(P A + A^T P). The
/// search stops as soon as the normalised margin drops below `target`
/// (negative for strict inequalities, a small positive tolerance for
/// non-strict ones). Diagonal balancing and re-scaling by diag(P) are
/// applied internally, so badly scaled realisations are handled.
MarginResult lyapunov_margin_search(const Matrix& A, const Matrix& U, const Matrix& V, double target);

/// lambda_max(S (P A + A^T P) S) / (||S P S|| ||S^-1 A S||) with
/// S = diag(P_ii)^{-1/2}: a scale-free measure of how negative the
/// Lyapunov form is. Congruence keeps the sign of every eigenvalue.
double normalized_margin(const Matrix& P, const Matrix& A);

/// Largest eigenvalue of a symmetric matrix (symmetrised first).
double lambda_max_sym(const Matrix& M);
double lambda_min_sym(const Matrix& M);

}  // namespace dynedge::lmi
