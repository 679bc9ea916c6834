#include "dynedge/cli.hpp"

#include "dynedge/closedloop.hpp"
#include "dynedge/config.hpp"
#include "dynedge/kernels.hpp"
#include "dynedge/report.hpp"
#include "dynedge/scenarios.hpp"
#include "dynedge/sim.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef DYNEDGE_DATA_DIR
#define DYNEDGE_DATA_DIR "data"
#endif

namespace dynedge {

namespace {

std::string g(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

Scenario load(const RunConfig& cfg) {
  const std::string src = cfg.config.empty() ? "power_network" : cfg.config;
  Scenario sc;
  if (src.rfind("random_", 0) == 0 && !std::filesystem::exists(src)) {
    RandomOptions o;
    const std::string r = src.substr(7);
    if (r == "tracking") o.regime = Regime::Tracking;
    else if (r == "sync") o.regime = Regime::Sync;
    else if (r == "cooperation") o.regime = Regime::Cooperation;
    else if (r == "master-slave") o.regime = Regime::MasterSlave;
    else fail(ErrorCode::ValidationError, "config: unknown built-in '" + src + "'");
    sc = random_network(cfg.seed.value_or(1), o);
  } else {
    sc = load_scenario(src);
  }
  if (cfg.seed) sc.seed = *cfg.seed;
  if (cfg.eps && cfg.command != "eps") {
    if (!(*cfg.eps >= 0.0)) fail(ErrorCode::ValidationError, "--eps must be >= 0");
    sc.eps = *cfg.eps;
  }
  if (cfg.dt) sc.sim.dt = *cfg.dt;
  if (cfg.t_end) sc.sim.t_end = *cfg.t_end;
  if (!(sc.sim.dt > 0.0)) fail(ErrorCode::ValidationError, "--dt must be > 0");
  if (!(sc.sim.t_end > 0.0)) fail(ErrorCode::ValidationError, "--t-end must be > 0");
  sc.sim.window = std::min(sc.sim.window, sc.sim.t_end);
  return sc;
}

void print_report(const AssumptionReport& rep, std::ostream& out) {
  for (const auto& it : rep.items)
    out << std::left << std::setw(4) << it.assumption << std::setw(12) << it.subject << (it.pass ? "PASS  " : "FAIL  ")
        << "margin " << std::setw(12) << g(it.margin, 4) << it.detail << "\n";
  for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
}

int cmd_check(const Scenario& sc, std::ostream& out) {
  out << "scenario " << sc.name << " (" << to_string(sc.regime) << ", N = " << sc.net.N() << ", M = " << sc.net.M() << ")\n";
  const auto rep = check_assumptions(sc);
  print_report(rep, out);
  out << (rep.passed() ? "all assumptions hold\n" : "assumption check failed\n");
  return rep.passed() ? kExitOk : kExitAssumption;
}

int cmd_synth(const Scenario& sc, const RunConfig& cfg, std::ostream& out) {
  const ControllerSet cs = build_controllers(sc);
  std::ostringstream os;
  os << "# controllers for " << sc.name << " (" << to_string(sc.regime) << ", eps = " << g(sc.eps, 17) << ")\n";
  for (std::size_t i = 0; i < cs.nodes.size(); ++i) {
    const auto& nc = cs.nodes[i];
    os << "\n[node " << i + 1 << "] role = " << to_string(nc.role) << (nc.ideal ? ", ideal" : "") << "\n";
    if (nc.ideal) continue;
    os << "K_x = " << format_matrix(nc.K_x) << "\n";
    os << "K_zeta = " << format_matrix(nc.K_zeta) << "\n";
    os << "G1 = " << format_matrix(nc.im.G1) << "\n";
    os << "G2 = " << format_matrix(nc.im.G2) << "\n";
    os << "P_hat = " << format_matrix(nc.Phat.P) << "\n";
    const double eq = (nc.Phat.P * nc.loop.Dhat - nc.loop.Chat.transpose()).norm();
    os << "# abscissa(A_hat) = " << g(spectral_abscissa(nc.loop.Ahat)) << ", lambda_max(P A + A^T P) = "
       << g(-nc.Phat.slack) << " (tolerance 1e-9 relative), |P D - C^T| = " << g(eq) << "\n";
  }
  for (std::size_t j = 0; j < cs.edge_certs.size(); ++j) {
    os << "\n[edge " << j + 1 << "]\nQ = " << format_matrix(cs.edge_certs[j].P) << "\n";
    os << "# -lambda_max(Q E + E^T Q) = " << g(cs.edge_certs[j].slack) << "\n";
  }
  out << os.str();
  if (!cfg.out_dir.empty()) {
    const auto path = (std::filesystem::path(cfg.out_dir) / (sc.name + "_controllers.txt")).string();
    write_text(path, os.str());
    out << "wrote " << path << "\n";
  }
  return kExitOk;
}

int cmd_eps(const Scenario& sc, const RunConfig& cfg, std::ostream& out) {
  const ControllerSet cs = build_controllers(sc);
  const double hi = cfg.eps.value_or(1e5);
  if (!(hi > 0.0)) fail(ErrorCode::ValidationError, "--eps (upper search limit) must be > 0");
  const EpsOptions opts;
  const EpsStar es = epsilon_star(sc.net, cs, hi, opts);
  out << "probes (eps, spectral abscissa of the error system):\n";
  for (const auto& p : es.probes) out << "  " << std::setw(14) << g(p.eps) << "  " << g(p.abscissa) << "\n";
  out << "eps_bisect = " << g(es.eps_bisect, 10);
  if (es.at_upper_limit)
    out << " (stable up to the search limit " << g(hi) << ")\n";
  else
    out << " (bracket [" << g(es.eps_bisect, 10) << ", " << g(es.bracket_hi, 10) << "], relative width "
        << g(opts.rel_width) << ", stable means abscissa < " << g(opts.stable_below) << ")\n";
  if (es.lemma)
    out << "analytic bound = " << g(es.lemma->eps_bound) << " (eps_bar = " << g(es.lemma->cert.eps_bar)
        << ", coupling norm = " << g(es.lemma->coupling_norm) << ", eps1 = " << g(es.lemma->cert.eps1) << ")\n";
  else if (sc.regime == Regime::Tracking)
    out << "analytic bound: not applicable (no coupling gain in the tracking regime)\n";
  else
    out << "analytic bound: unavailable (" << es.lemma_note << ")\n";
  return kExitOk;
}

struct RunOutput {
  ClosedLoop cl;
  SimResult r;
  std::vector<NodeErrorMetrics> m;
};

RunOutput run_simulation(const Scenario& sc, const ControllerSet& cs) {
  RunOutput o{assemble(sc.net, cs), {}, {}};
  o.r = integrate(o.cl, initial_state(o.cl, sc.refs), sc.sim.t_end, sc.sim.dt, sc.sim.record_every);
  o.m = error_metrics(o.r, sc.sim.window);
  return o;
}

void print_metrics(const std::vector<NodeErrorMetrics>& m, double window, std::ostream& out) {
  for (std::size_t i = 0; i < m.size(); ++i)
    out << "node " << i + 1 << ": max |e| over the last " << g(window) << " s = " << g(m[i].max) << ", rms = " << g(m[i].rms)
        << ", decaying = " << (m[i].decaying ? "yes" : "no") << "\n";
}

std::vector<std::string> emit(const RunOutput& o, const Scenario& sc, const std::string& dir, const std::string& mode) {
  std::vector<std::string> files;
  const auto csv = (std::filesystem::path(dir) / (sc.name + ".csv")).string();
  write_text(csv, simulation_csv(o.r));
  files.push_back(csv);
  if (mode == "csv+svg")
    for (const auto& f : write_svg_panels(o.r, dir, sc.name)) files.push_back((std::filesystem::path(dir) / f).string());
  return files;
}

int cmd_simulate(const Scenario& sc, const RunConfig& cfg, std::ostream& out) {
  const ControllerSet cs = build_controllers(sc);
  const RunOutput o = run_simulation(sc, cs);
  out << "simulated " << sc.name << ": " << o.cl.size() << " states, dt = " << g(sc.sim.dt) << ", t_end = " << g(sc.sim.t_end)
      << ", kernels = " << kernels::to_string(kernels::active().backend) << "\n";
  print_metrics(o.m, sc.sim.window, out);
  for (const auto& f : emit(o, sc, cfg.out_dir.empty() ? "out" : cfg.out_dir, cfg.emit)) out << "wrote " << f << "\n";
  return kExitOk;
}

int cmd_demo(const RunConfig& cfg, std::ostream& out) {
  RunConfig c = cfg;
  Scenario sc = load(c);
  const auto rep = check_assumptions(sc);
  print_report(rep, out);
  const ControllerSet cs = build_controllers(sc);

  const std::string golden_path = cfg.golden.empty() ? std::string(DYNEDGE_DATA_DIR) + "/power_network_golden.csv" : cfg.golden;
  std::ifstream gf(golden_path);
  if (!gf) fail(ErrorCode::ValidationError, "golden metrics file '" + golden_path + "' not found");
  std::ostringstream gs;
  gs << gf.rdbuf();
  auto checks = parse_metrics_csv(gs.str());

  const NodeMaps maps = node_maps(sc.net, cs);
  const double abscissa = spectral_abscissa(error_matrix(sc.net, cs, maps));
  const EpsStar es = epsilon_star(sc.net, cs, 1e5);
  const RunOutput o = run_simulation(sc, cs);

  auto measured = [&](const std::string& name, double& v) {
    if (name == "assumption_failures") {
      v = static_cast<double>(std::count_if(rep.items.begin(), rep.items.end(), [](const CheckItem& i) { return !i.pass; }));
    } else if (name == "error_abscissa") {
      v = abscissa;
    } else if (name == "eps_bisect") {
      v = es.eps_bisect;
    } else if (name.rfind("max_error_node", 0) == 0 || name.rfind("decay_node", 0) == 0) {
      const bool is_max = name[0] == 'm';
      const auto i = static_cast<std::size_t>(std::stoi(name.substr(is_max ? 14 : 10)) - 1);
      if (i >= o.m.size()) return false;
      v = is_max ? o.m[i].max : (o.m[i].decaying ? 1.0 : 0.0);
    } else {
      return false;
    }
    return true;
  };
  bool ok = true;
  out << "\nerror-system abscissa = " << g(abscissa) << ", eps_bisect = " << g(es.eps_bisect, 10) << "\n";
  print_metrics(o.m, sc.sim.window, out);
  out << "\ngolden checks (" << golden_path << "):\n";
  for (auto& ch : checks) {
    ch.evaluated = measured(ch.name, ch.measured);
    if (!ch.evaluated) fail(ErrorCode::ValidationError, "golden metric '" + ch.name + "' is not known");
    ok = ok && ch.pass();
    out << "  " << (ch.pass() ? "PASS " : "FAIL ") << ch.name << " = " << g(ch.measured) << " (required " << ch.op << " "
        << g(ch.limit) << ")\n";
  }
  if (!cfg.out_dir.empty()) {
    const auto mpath = (std::filesystem::path(cfg.out_dir) / (sc.name + "_metrics.csv")).string();
    write_text(mpath, metrics_csv(checks, true));
    out << "wrote " << mpath << "\n";
    for (const auto& f : emit(o, sc, cfg.out_dir, cfg.emit)) out << "wrote " << f << "\n";
  }
  out << (ok ? "demo matches the golden metrics\n" : "demo does not match the golden metrics\n");
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::AssumptionFailed:
    case ErrorCode::AllSlaves:
    case ErrorCode::SpectrumNotMarginal:
    case ErrorCode::RepeatedEigenvalue:
    case ErrorCode::NotHurwitz:
    case ErrorCode::NotHyperMinPhase:
    case ErrorCode::CertificateFailed:
    case ErrorCode::InternalModelViolated:
    case ErrorCode::HypothesisViolated: return kExitAssumption;
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DimensionTooSmall:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::SelfLoop:
    case ErrorCode::InfeasibleDims:
    case ErrorCode::EmptyWindow: return kExitConfig;
    default: return kExitNumerical;
  }
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.emit != "csv" && cfg.emit != "csv+svg") fail(ErrorCode::ValidationError, "--emit must be csv or csv+svg");
    if (cfg.command == "demo") return cmd_demo(cfg, out);
    const Scenario sc = load(cfg);
    if (cfg.command == "check") return cmd_check(sc, out);
    if (cfg.command == "synth") return cmd_synth(sc, cfg, out);
    if (cfg.command == "eps") return cmd_eps(sc, cfg, out);
    if (cfg.command == "simulate") return cmd_simulate(sc, cfg, out);
    fail(ErrorCode::ValidationError, "unknown command '" + cfg.command + "'");
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace dynedge
