#pragma once

#include "dynedge/closedloop.hpp"
#include "dynedge/synthesis.hpp"

#include <vector>

namespace dynedge {

/// Recorded trajectory. Column k of every matrix belongs to t[k]; y, v,
/// refs and errors hold one p x T matrix per node.
struct SimResult {
  std::vector<double> t;
  Matrix states;
  std::vector<Matrix> y;
  std::vector<Matrix> v;
  std::vector<Matrix> refs;
  std::vector<Matrix> errors;
};

/// Fixed-step classical RK4 on x' = A_full x, recording every
/// `record_every` steps (the first and last step are always kept).
/// Throws StepTooLarge when dt * rho(A_full) >= 1 and NonFiniteState on
/// overflow.
SimResult integrate(const ClosedLoop& cl, const Vector& x0, double t_end, double dt, int record_every = 1);

/// Step suggestion: 0.1 / rho(A_full).
double suggest_dt(const ClosedLoop& cl);

/// Closed-form limits of the regime on a time grid. Entries the regime
/// does not predict stay empty.
struct SteadyState {
  std::vector<Matrix> y;  // tracking/master: Q_eta e^{S t} eta_i(0); sync: Q_eta e^{S t} mean eta(0)
  std::vector<Matrix> v;  // cooperation: Q_v e^{S t} (nu_i(0) + nu0(0)); slave: Q_v e^{S t} nu_i(0)
  Matrix y_sum;           // cooperation: G_Q e^{G_S t} sum etabar_i(0)
  Vector nu0;             // cooperation bias, -(1/N) sum nu_i(0)
};

SteadyState steady_state_prediction(const ControllerSet& ctrl, const References& refs, const std::vector<double>& t);

struct NodeErrorMetrics {
  double max = 0.0;   // max |e| over components and the trailing window
  double rms = 0.0;   // RMS of ||e||_2 over the trailing window
  bool decaying = false;
};

/// Metrics over the trailing window [t_end - window, t_end]; the decay flag
/// compares it with the leading window of the same length. Throws EmptyWindow.
std::vector<NodeErrorMetrics> error_metrics(const std::vector<Matrix>& signals, const std::vector<double>& t,
                                            double window);
std::vector<NodeErrorMetrics> error_metrics(const SimResult& r, double window);

}  // namespace dynedge
