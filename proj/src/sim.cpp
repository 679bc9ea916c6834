#include "dynedge/sim.hpp"

#include "dynedge/analysis.hpp"
#include "dynedge/error.hpp"
#include "dynedge/kernels.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace dynedge {

namespace {

double spectral_radius(const Matrix& A) {
  const CVector ev = eigenvalues(A);
  return ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double suggest_dt(const ClosedLoop& cl) {
  const double rho = spectral_radius(cl.A_full);
  return rho > 0.0 ? 0.1 / rho : 1e-2;
}

SimResult integrate(const ClosedLoop& cl, const Vector& x0, double t_end, double dt, int record_every) {
  const auto n = cl.size();
  if (x0.size() != n) fail(ErrorCode::DimensionMismatch, "x0 has length " + std::to_string(x0.size()) + ", expected " + std::to_string(n));
  if (!(dt > 0.0) || !(t_end > 0.0)) fail(ErrorCode::ValidationError, "dt and t_end must be positive");
  if (record_every < 1) fail(ErrorCode::ValidationError, "record_every must be >= 1");
  const double rho = spectral_radius(cl.A_full);
  if (dt * rho >= 1.0)
    fail(ErrorCode::StepTooLarge, "dt * rho(A) = " + fmt(dt * rho) + " >= 1; use dt < " + fmt(1.0 / rho));

  const auto steps = static_cast<long long>(std::llround(t_end / dt));
  const auto& K = kernels::active();
  const std::size_t un = static_cast<std::size_t>(n);
  const double* A = cl.A_full.data();

  const long long nrec = steps / record_every + 1 + (steps % record_every ? 1 : 0);
  SimResult r;
  r.t.reserve(static_cast<std::size_t>(nrec));
  r.states.resize(n, nrec);

  Vector x = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  Eigen::Index col = 0;
  auto record = [&](long long step) {
    r.t.push_back(static_cast<double>(step) * dt);
    r.states.col(col++) = x;
  };
  record(0);
  const double h = dt, h2 = 0.5 * dt;
  for (long long s = 1; s <= steps; ++s) {
    K.matvec(A, un, x.data(), k1.data());
    K.stage(un, x.data(), h2, k1.data(), tmp.data());
    K.matvec(A, un, tmp.data(), k2.data());
    K.stage(un, x.data(), h2, k2.data(), tmp.data());
    K.matvec(A, un, tmp.data(), k3.data());
    K.stage(un, x.data(), h, k3.data(), tmp.data());
    K.matvec(A, un, tmp.data(), k4.data());
    K.rk4_combine(un, h, k1.data(), k2.data(), k3.data(), k4.data(), x.data());
    if (!x.allFinite())
      fail(ErrorCode::NonFiniteState, "state became non-finite at step " + std::to_string(s) + " (t = " + fmt(s * dt) + ")");
    if (s % record_every == 0 || s == steps) record(s);
  }
  r.states.conservativeResize(n, col);

  const auto& sg = cl.signals;
  for (std::size_t i = 0; i < sg.y.size(); ++i) {
    r.y.push_back(sg.y[i] * r.states);
    r.v.push_back(sg.v[i] * r.states);
    r.refs.push_back(sg.ref[i] * r.states);
    r.errors.push_back(sg.err[i] * r.states);
  }
  return r;
}

SteadyState steady_state_prediction(const ControllerSet& ctrl, const References& refs, const std::vector<double>& t) {
  const auto& exo = ctrl.exo;
  const auto N = ctrl.nodes.size();
  const auto T = static_cast<Eigen::Index>(t.size());
  SteadyState out;
  out.y.resize(N);
  out.v.resize(N);
  auto at = [](const std::vector<Vector>& v, std::size_t i) { return i < v.size() ? v[i] : Vector(); };

  std::vector<Matrix> eS(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) eS[k] = (exo.S * t[k]).exp();
  auto propagate = [&](const Matrix& Q, const Vector& x0) {
    Matrix m(Q.rows(), T);
    for (Eigen::Index k = 0; k < T; ++k) m.col(k) = Q * (eS[static_cast<std::size_t>(k)] * x0);
    return m;
  };

  if (ctrl.regime == Regime::Sync) {
    Vector mean = Vector::Zero(exo.q());
    for (std::size_t i = 0; i < N; ++i)
      if (at(refs.eta, i).size() == exo.q()) mean += refs.eta[i];
    mean /= static_cast<double>(N);
    const Matrix y = propagate(exo.Q_eta, mean);
    for (auto& yi : out.y) yi = y;
    return out;
  }

  if (ctrl.regime == Regime::Cooperation) {
    Vector nusum = Vector::Zero(exo.q());
    Vector ebsum = Vector::Zero(ctrl.coop.G_S.rows());
    for (std::size_t i = 0; i < N; ++i) {
      if (at(refs.nu, i).size() == exo.q()) nusum += refs.nu[i];
      if (at(refs.etabar, i).size() == ebsum.size()) ebsum += refs.etabar[i];
    }
    out.nu0 = -nusum / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
      Vector nu = at(refs.nu, i);
      if (nu.size() != exo.q()) nu = Vector::Zero(exo.q());
      out.v[i] = propagate(exo.Q_v, nu + out.nu0);
    }
    out.y_sum.resize(ctrl.coop.G_Q.rows(), T);
    for (Eigen::Index k = 0; k < T; ++k)
      out.y_sum.col(k) = ctrl.coop.G_Q * ((ctrl.coop.G_S * t[static_cast<std::size_t>(k)]).exp() * ebsum);
    return out;
  }

  for (std::size_t i = 0; i < N; ++i) {
    const Role role = ctrl.nodes[i].role;
    if (role == Role::Slave) {
      Vector nu = at(refs.nu, i);
      if (nu.size() != exo.q()) nu = Vector::Zero(exo.q());
      out.v[i] = propagate(exo.Q_v, nu);
    } else {
      Vector eta = at(refs.eta, i);
      if (eta.size() != exo.q()) eta = Vector::Zero(exo.q());
      out.y[i] = propagate(exo.Q_eta, eta);
    }
  }
  return out;
}

std::vector<NodeErrorMetrics> error_metrics(const std::vector<Matrix>& signals, const std::vector<double>& t,
                                            double window) {
  if (t.empty()) fail(ErrorCode::EmptyWindow, "no samples");
  const double t0 = t.front(), t1 = t.back();
  if (!(window > 0.0) || window > t1 - t0 + 1e-12 * std::max(1.0, t1))
    fail(ErrorCode::EmptyWindow, "window " + fmt(window) + " is not within (0, " + fmt(t1 - t0) + "]");
  const double tol = 1e-9 * std::max(1.0, std::abs(t1));
  std::vector<Eigen::Index> tail, head;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= t1 - window - tol) tail.push_back(static_cast<Eigen::Index>(k));
    if (t[k] <= t0 + window + tol) head.push_back(static_cast<Eigen::Index>(k));
  }
  if (tail.empty() || head.empty()) fail(ErrorCode::EmptyWindow, "window " + fmt(window) + " holds no samples");
  std::vector<NodeErrorMetrics> out;
  for (const auto& e : signals) {
    NodeErrorMetrics m;
    double ss = 0.0, head_max = 0.0;
    for (auto k : tail) {
      m.max = std::max(m.max, e.col(k).cwiseAbs().maxCoeff());
      ss += e.col(k).squaredNorm();
    }
    for (auto k : head) head_max = std::max(head_max, e.col(k).cwiseAbs().maxCoeff());
    m.rms = std::sqrt(ss / static_cast<double>(tail.size()));
    m.decaying = m.max < head_max;
    out.push_back(m);
  }
  return out;
}

std::vector<NodeErrorMetrics> error_metrics(const SimResult& r, double window) {
  return error_metrics(r.errors, r.t, window);
}

}  // namespace dynedge
