#include "dynedge/lmi.hpp"

#include "dynedge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dynedge::lmi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SvecIndex {
  Eigen::Index a, b;
};

std::vector<SvecIndex> svec_layout(Eigen::Index n) {
  std::vector<SvecIndex> idx;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) idx.push_back({a, b});
  return idx;
}

Matrix svec_to_matrix(const Vector& s, Eigen::Index n, const std::vector<SvecIndex>& layout) {
  Matrix P = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto [a, b] = layout[k];
    P(a, b) = s(static_cast<Eigen::Index>(k));
    P(b, a) = s(static_cast<Eigen::Index>(k));
  }
  return P;
}

// log det of a symmetric matrix, +inf marker (nullopt-like) when not PD
bool logdet_pd(const Matrix& X, double& out) {
  Eigen::LLT<Matrix> llt(X);
  if (llt.info() != Eigen::Success) return false;
  const auto& L = llt.matrixL();
  double s = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double d = L(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    s += std::log(d);
  }
  out = 2.0 * s;
  return true;
}

double barrier_value(const Vector& c, const std::vector<Lmi>& lmis, const Vector& y, double mu) {
  double phi = mu * c.dot(y);
  for (const auto& l : lmis) {
    double ld = 0.0;
    if (!logdet_pd(l.at(y), ld)) return kInf;
    phi -= ld;
  }
  return phi;
}

// Diagonal balancing (powers of two) so that row and column norms of
// T^{-1} A T are comparable. Returns the diagonal of T.
Vector balance_diagonal(const Matrix& A) {
  const auto n = A.rows();
  Vector t = Vector::Ones(n);
  Matrix B = A;
  constexpr double radix = 2.0;
  bool done = false;
  for (int sweep = 0; sweep < 200 && !done; ++sweep) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) {
          c += std::abs(B(j, i));
          r += std::abs(B(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        t(i) *= f;
        B.row(i) /= f;
        B.col(i) *= f;
      }
    }
  }
  return t;
}

}  // namespace

double lambda_max_sym(const Matrix& M) {
  if (M.size() == 0) return -kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double lambda_min_sym(const Matrix& M) {
  if (M.size() == 0) return kInf;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix AffineSymFamily::at(const Vector& theta) const {
  Matrix P = P0;
  for (std::size_t k = 0; k < basis.size(); ++k) P += theta(static_cast<Eigen::Index>(k)) * basis[k];
  return P;
}

Matrix Lmi::at(const Vector& y) const {
  Matrix X = F0;
  for (std::size_t k = 0; k < F.size(); ++k) X += y(static_cast<Eigen::Index>(k)) * F[k];
  return X;
}

AffineSymFamily symmetric_solutions(const Matrix& U, const Matrix& V) {
  const auto n = U.rows();
  const auto k = U.cols();
  if (V.rows() != n || V.cols() != k)
    fail(ErrorCode::DimensionMismatch, "P U = V: U and V must have identical shapes");
  const auto layout = svec_layout(n);
  const auto nv = static_cast<Eigen::Index>(layout.size());

  AffineSymFamily fam;
  if (k == 0) {
    fam.P0 = Matrix::Zero(n, n);
    for (Eigen::Index v = 0; v < nv; ++v) {
      Vector e = Vector::Zero(nv);
      e(v) = 1.0;
      fam.basis.push_back(svec_to_matrix(e, n, layout));
    }
    return fam;
  }

  Matrix K = Matrix::Zero(n * k, nv);
  Vector rhs(n * k);
  for (Eigen::Index c = 0; c < k; ++c)
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto row = c * n + r;
      rhs(row) = V(r, c);
      for (Eigen::Index v = 0; v < nv; ++v) {
        const auto [a, b] = layout[static_cast<std::size_t>(v)];
        double coef = 0.0;
        if (r == a) coef += U(b, c);
        if (r == b && a != b) coef += U(a, c);
        K(row, v) = coef;
      }
    }

  Eigen::JacobiSVD<Matrix> svd(K, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-11 * smax) ++rank;

  // minimum-norm particular solution
  Vector sol = Vector::Zero(nv);
  const Vector Ut_rhs = svd.matrixU().transpose() * rhs;
  for (Eigen::Index i = 0; i < rank; ++i) sol += (Ut_rhs(i) / s(i)) * svd.matrixV().col(i);
  fam.P0 = svec_to_matrix(sol, n, layout);
  fam.residual = (K * sol - rhs).norm();
  const double scale = std::max({1.0, rhs.norm(), smax * sol.norm()});
  if (fam.residual > 1e-9 * scale)
    fail(ErrorCode::Infeasible, "no symmetric P satisfies P U = V (residual " + std::to_string(fam.residual) + ")");
  for (Eigen::Index i = rank; i < nv; ++i) fam.basis.push_back(svec_to_matrix(svd.matrixV().col(i), n, layout));
  return fam;
}

BarrierResult minimize(const Vector& c, const std::vector<Lmi>& lmis, Vector y0, const BarrierOptions& opts,
                       const std::function<bool(const Vector&)>& stop) {
  const auto d = c.size();
  BarrierResult res;
  res.y = std::move(y0);
  Eigen::Index total_dim = 0;
  for (const auto& l : lmis) total_dim += l.F0.rows();

  double mu = opts.mu0;
  double phi = barrier_value(c, lmis, res.y, mu);
  if (!std::isfinite(phi)) fail(ErrorCode::Infeasible, "barrier search started from an infeasible point");

  int stalls = 0;
  while (res.newton_steps < opts.max_newton) {
    Vector g = mu * c;
    Matrix Hs = Matrix::Zero(d, d);
    for (const auto& l : lmis) {
      const Matrix X = l.at(res.y);
      Eigen::LLT<Matrix> llt(X);
      std::vector<Matrix> Ak(static_cast<std::size_t>(d));
      for (Eigen::Index k = 0; k < d; ++k) {
        Ak[static_cast<std::size_t>(k)] = llt.solve(l.F[static_cast<std::size_t>(k)]);
        g(k) -= Ak[static_cast<std::size_t>(k)].trace();
      }
      for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = a; b < d; ++b) {
          const double v =
              (Ak[static_cast<std::size_t>(a)].array() * Ak[static_cast<std::size_t>(b)].transpose().array()).sum();
          Hs(a, b) += v;
          if (a != b) Hs(b, a) += v;
        }
    }
    const double reg = 1e-14 * std::max(1.0, Hs.diagonal().cwiseAbs().maxCoeff());
    Hs.diagonal().array() += reg;
    const Vector dy = -Hs.ldlt().solve(g);
    const double dec2 = -g.dot(dy);
    ++res.newton_steps;

    if (!(dec2 > 2e-10) || !dy.allFinite()) {
      // centred for this mu
      if (stop && stop(res.y)) {
        res.stopped_early = true;
        break;
      }
      const double gap = static_cast<double>(total_dim) / mu;
      if (gap < opts.gap_tol * std::max(1.0, std::abs(c.dot(res.y)))) break;
      mu *= opts.mu_growth;
      phi = barrier_value(c, lmis, res.y, mu);
      continue;
    }

    double step = 1.0;
    double phi_new = kInf;
    const double slope = g.dot(dy);
    for (int ls = 0; ls < 60; ++ls) {
      phi_new = barrier_value(c, lmis, res.y + step * dy, mu);
      if (std::isfinite(phi_new) && phi_new <= phi + 0.25 * step * slope) break;
      step *= 0.5;
    }
    if (!std::isfinite(phi_new) || phi_new > phi) {
      // no progress possible at this mu: treat as centred
      if (++stalls > 4) break;
      mu *= opts.mu_growth;
      phi = barrier_value(c, lmis, res.y, mu);
      continue;
    }
    stalls = 0;
    res.y += step * dy;
    phi = phi_new;
  }
  res.objective = c.dot(res.y);
  return res;
}

double normalized_margin(const Matrix& P, const Matrix& A) {
  const auto n = P.rows();
  if (n == 0) return -kInf;
  Vector s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(P(i, i) > 0.0)) return kInf;
    s(i) = 1.0 / std::sqrt(P(i, i));
  }
  const Matrix Ps = s.asDiagonal() * P * s.asDiagonal();
  const Matrix As = s.cwiseInverse().asDiagonal() * A * s.asDiagonal();
  const double scale = Ps.norm() * std::max(As.norm(), 1e-300);
  return lambda_max_sym(Ps * As + As.transpose() * Ps) / scale;
}

MarginResult lyapunov_margin_search(const Matrix& A, const Matrix& U, const Matrix& V, double target) {
  const auto n = A.rows();
  MarginResult best;
  best.normalized = kInf;
  best.lambda_max = kInf;
  if (n == 0) {
    best.found = true;
    best.normalized = -kInf;
    return best;
  }

  Vector t = balance_diagonal(A);
  double bound_factor = 1e3;

  for (int round = 0; round < 4; ++round) {
    const Matrix As = t.cwiseInverse().asDiagonal() * A * t.asDiagonal();
    const Matrix Us = t.cwiseInverse().asDiagonal() * U;
    const Matrix Vs = t.asDiagonal() * V;
    const AffineSymFamily fam = symmetric_solutions(Us, Vs);

    auto lyap = [&](const Matrix& P) { return Matrix(P * As + As.transpose() * P); };
    auto consider = [&](const Matrix& Ps) {
      if (lambda_min_sym(Ps) <= 0.0) return;
      const Matrix P = t.cwiseInverse().asDiagonal() * Ps * t.cwiseInverse().asDiagonal();
      const double nm = normalized_margin(P, A);
      if (nm < best.normalized) {
        best.normalized = nm;
        best.P = 0.5 * (P + P.transpose());
        best.lambda_max = lambda_max_sym(P * A + A.transpose() * P);
      }
    };

    if (fam.dim() == 0) {
      consider(fam.P0);
      break;
    }

    const auto d = fam.dim();
    const double p0n = std::max(fam.P0.norm(), 1e-300);
    const double Pscale = round == 0 ? p0n : 1.0;
    const double R = round == 0 ? bound_factor * std::max(p0n, 1.0 / bound_factor) : 4.0 * static_cast<double>(n);
    const Matrix I = Matrix::Identity(n, n);

    // Phase I: theta with P(theta) > 0 inside the bound.
    Vector theta = Vector::Zero(d);
    const double lmin0 = lambda_min_sym(fam.P0);
    if (lmin0 <= 0.0 || lambda_max_sym(fam.P0) >= R) {
      Vector c = Vector::Zero(d + 1);
      c(d) = 1.0;
      Lmi pos{fam.P0, {}};
      Lmi upper{R * I - fam.P0, {}};
      for (const auto& B : fam.basis) {
        pos.F.push_back(B);
        upper.F.push_back(-B);
      }
      pos.F.push_back(I);
      upper.F.push_back(Matrix::Zero(n, n));
      if (lambda_max_sym(fam.P0) >= R) break;  // bound too tight for the particular solution
      Vector y0 = Vector::Zero(d + 1);
      y0(d) = std::max(0.0, -lmin0) + 0.1 * Pscale;
      const double want = -1e-3 * Pscale;
      BarrierOptions po;
      po.max_newton = 300;
      auto r1 = minimize(c, {pos, upper}, y0, po, [&](const Vector& y) { return y(d) < want; });
      theta = r1.y.head(d);
      if (lambda_min_sym(fam.at(theta)) <= 0.0) {
        bound_factor *= 1e3;
        continue;
      }
    }

    // Phase II: min t with t I - L(P) > 0, P > 0, R I - P > 0.
    {
      const Matrix P_start = fam.at(theta);
      const Matrix L0 = lyap(fam.P0);
      const double lstart = lambda_max_sym(lyap(P_start));
      const double Lscale = std::max(std::abs(lstart), std::max(As.norm() * P_start.norm(), 1e-300));
      Vector c = Vector::Zero(d + 1);
      c(d) = 1.0;
      Lmi margin{-L0, {}};
      Lmi pos{fam.P0, {}};
      Lmi upper{R * I - fam.P0, {}};
      for (const auto& B : fam.basis) {
        margin.F.push_back(-lyap(B));
        pos.F.push_back(B);
        upper.F.push_back(-B);
      }
      margin.F.push_back(I);
      pos.F.push_back(Matrix::Zero(n, n));
      upper.F.push_back(Matrix::Zero(n, n));
      Vector y0(d + 1);
      y0.head(d) = theta;
      y0(d) = lstart + 0.5 * Lscale;
      BarrierOptions po;
      po.max_newton = 500;
      po.gap_tol = 1e-13;
      po.mu0 = 1.0 / Lscale;
      auto r2 = minimize(c, {margin, pos, upper}, y0, po);
      const Matrix Ps = fam.at(r2.y.head(d));
      consider(Ps);
      const bool at_bound = lambda_max_sym(Ps) > 0.9 * R;
      if (best.normalized <= target && !at_bound && round > 0) break;
      if (round == 0 && at_bound) {
        bound_factor *= 1e3;
        continue;
      }
      // re-scale so the current certificate has unit diagonal
      bool ok = true;
      for (Eigen::Index i = 0; i < n; ++i) ok = ok && Ps(i, i) > 0.0;
      if (!ok) break;
      for (Eigen::Index i = 0; i < n; ++i) t(i) /= std::sqrt(Ps(i, i));
    }
  }
  best.found = std::isfinite(best.normalized) && best.normalized <= target;
  return best;
}

}  // namespace dynedge::lmi
