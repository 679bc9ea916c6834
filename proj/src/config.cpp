#include "dynedge/config.hpp"

#include "dynedge/analysis.hpp"
#include "dynedge/error.hpp"
#include "dynedge/topology.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace dynedge {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] void parse_error(int line, const std::string& msg) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void invalid(const std::string& field, const std::string& msg) {
  fail(ErrorCode::ValidationError, field + ": " + msg);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& tok, int line) {
  const std::string t = trim(tok);
  if (t.empty()) parse_error(line, "empty number");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) parse_error(line, "'" + t + "' is not a finite number");
  return v;
}

Matrix parse_matrix(const std::string& text, int line) {
  const auto rows = split(text, '|');
  std::vector<std::vector<double>> vals;
  for (const auto& r : rows) {
    std::vector<double> row;
    for (const auto& tok : split(r, ';')) row.push_back(parse_number(tok, line));
    if (!vals.empty() && row.size() != vals.front().size())
      parse_error(line, "matrix rows have different lengths (" + std::to_string(vals.front().size()) + " and " +
                            std::to_string(row.size()) + ")");
    vals.push_back(std::move(row));
  }
  Matrix m(static_cast<Eigen::Index>(vals.size()), static_cast<Eigen::Index>(vals.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = vals[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Vector parse_vector(const std::string& text, int line) {
  const Matrix m = parse_matrix(text, line);
  if (m.rows() != 1 && m.cols() != 1) parse_error(line, "expected a vector");
  return m.reshaped();
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  parse_error(line, "expected true or false, got '" + v + "'");
}

long long parse_int(const std::string& v, int line) {
  const double d = parse_number(v, line);
  if (d != std::floor(d)) parse_error(line, "expected an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

Regime parse_regime(const std::string& v, int line) {
  for (Regime r : {Regime::Tracking, Regime::Sync, Regime::Cooperation, Regime::MasterSlave})
    if (to_string(r) == v) return r;
  parse_error(line, "unknown regime '" + v + "' (tracking, sync, cooperation, master-slave)");
}

Role parse_role(const std::string& v, int line) {
  for (Role r : {Role::Tracking, Role::Sync, Role::Cooperation, Role::Master, Role::Slave})
    if (to_string(r) == v) return r;
  parse_error(line, "unknown role '" + v + "'");
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string kind;  // "", exosystem, topology, node, edge, controller, references, simulation
  int id = 0;
  int line = 0;
  std::optional<int> from, to;
  std::map<std::string, Entry> keys;
};

const std::map<std::string, std::vector<std::string>>& allowed_keys() {
  static const std::map<std::string, std::vector<std::string>> k{
      {"", {"name", "regime", "eps", "seed"}},
      {"exosystem", {"S", "Q_eta", "Q_v", "P_eta"}},
      {"topology", {"H"}},
      {"node", {"A", "B", "C", "D", "role", "ideal"}},
      {"edge", {"E", "F", "G"}},
      {"controller", {"synthesize", "K_x", "K_zeta", "G1", "G2", "P_hat"}},
      {"references", {}},
      {"simulation", {"dt", "t_end", "record_every", "window"}},
  };
  return k;
}

bool reference_key(const std::string& key) {
  for (const char* prefix : {"etabar", "eta", "nu"}) {
    const std::string p(prefix);
    if (key.size() > p.size() && key.compare(0, p.size(), p) == 0) {
      const std::string rest = key.substr(p.size());
      if (std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return true;
    }
  }
  return false;
}

Section parse_header(const std::string& raw, int line) {
  const std::string inner = trim(raw.substr(1, raw.size() - 2));
  std::istringstream is(inner);
  Section s;
  s.line = line;
  is >> s.kind;
  if (!allowed_keys().count(s.kind) || s.kind.empty()) parse_error(line, "unknown section [" + inner + "]");
  const bool indexed = s.kind == "node" || s.kind == "edge" || s.kind == "controller";
  std::string tok;
  if (indexed) {
    if (!(is >> tok)) parse_error(line, "[" + s.kind + "] needs an index");
    s.id = static_cast<int>(parse_int(tok, line));
    if (s.id < 1) parse_error(line, "indices start at 1");
  }
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (s.kind != "edge" || eq == std::string::npos) parse_error(line, "unexpected '" + tok + "' in section header");
    const std::string k = tok.substr(0, eq);
    const int v = static_cast<int>(parse_int(tok.substr(eq + 1), line));
    if (k == "from") s.from = v;
    else if (k == "to") s.to = v;
    else parse_error(line, "unknown edge attribute '" + k + "'");
  }
  return s;
}

Matrix require(const Section& s, const std::string& key, const std::string& field) {
  auto it = s.keys.find(key);
  if (it == s.keys.end()) invalid(field, "missing");
  return parse_matrix(it->second.value, it->second.line);
}

std::optional<Matrix> optional_matrix(const Section& s, const std::string& key) {
  auto it = s.keys.find(key);
  if (it == s.keys.end()) return std::nullopt;
  return parse_matrix(it->second.value, it->second.line);
}

void shape(const Matrix& m, Eigen::Index r, Eigen::Index c, const std::string& field) {
  if (m.rows() != r || m.cols() != c)
    invalid(field, "is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
                       std::to_string(r) + "x" + std::to_string(c));
}

std::vector<const Section*> indexed(const std::vector<Section>& all, const std::string& kind, const char* plural,
                                    bool dense, int count = -1) {
  std::map<int, const Section*> by_id;
  for (const auto& s : all)
    if (s.kind == kind) {
      if (by_id.count(s.id)) parse_error(s.line, "duplicate [" + kind + " " + std::to_string(s.id) + "]");
      by_id[s.id] = &s;
    }
  const int n = count >= 0 ? count : (by_id.empty() ? 0 : by_id.rbegin()->first);
  std::vector<const Section*> out(static_cast<std::size_t>(n), nullptr);
  for (auto [id, s] : by_id) {
    if (id > n) invalid(std::string(plural) + "[" + std::to_string(id - 1) + "]", "index exceeds the node count " + std::to_string(n));
    out[static_cast<std::size_t>(id - 1)] = s;
  }
  if (dense)
    for (int i = 0; i < n; ++i)
      if (!out[static_cast<std::size_t>(i)]) invalid(std::string(plural) + "[" + std::to_string(i) + "]", "section missing");
  return out;
}

bool same(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

bool same(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Vector x = i < a.size() ? a[i] : Vector();
    const Vector y = i < b.size() ? b[i] : Vector();
    if (!same(x, y)) return false;
  }
  return true;
}

void put(std::ostringstream& os, const std::string& key, const Matrix& m) {
  if (m.size()) os << key << " = " << format_matrix(m) << "\n";
}

}  // namespace

std::string format_matrix(const Matrix& m) {
  std::string s;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) s += " | ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) s += "; ";
      s += num(m(i, j));
    }
  }
  return s;
}

Scenario parse_config(const std::string& text) {
  std::vector<Section> sections(1);
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const std::string l = trim(raw);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') parse_error(line, "unterminated section header");
      sections.push_back(parse_header(l, line));
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) parse_error(line, "expected 'key = value'");
    const std::string key = trim(l.substr(0, eq));
    const std::string value = trim(l.substr(eq + 1));
    auto& sec = sections.back();
    const auto& allowed = allowed_keys().at(sec.kind);
    const bool ok = sec.kind == "references" ? reference_key(key)
                                             : std::find(allowed.begin(), allowed.end(), key) != allowed.end();
    const std::string where = sec.kind.empty() ? "the preamble" : "[" + sec.kind + (sec.id ? " " + std::to_string(sec.id) : "") + "]";
    if (!ok) parse_error(line, "unknown key '" + key + "' in " + where);
    if (value.empty()) parse_error(line, "empty value for '" + key + "'");
    if (sec.keys.count(key)) parse_error(line, "duplicate key '" + key + "'");
    sec.keys[key] = {value, line};
  }

  Scenario sc;
  const Section& pre = sections.front();
  auto scalar = [&](const Section& s, const std::string& k) -> const Entry* {
    auto it = s.keys.find(k);
    return it == s.keys.end() ? nullptr : &it->second;
  };
  sc.name = scalar(pre, "name") ? scalar(pre, "name")->value : "scenario";
  if (auto e = scalar(pre, "regime")) sc.regime = parse_regime(e->value, e->line);
  if (auto e = scalar(pre, "eps")) sc.eps = parse_number(e->value, e->line);
  if (auto e = scalar(pre, "seed")) {
    const long long s = parse_int(e->value, e->line);
    if (s < 0) invalid("seed", "must be >= 0");
    sc.seed = static_cast<std::uint64_t>(s);
  }
  if (!(sc.eps >= 0.0)) invalid("eps", "must be >= 0");

  auto single = [&](const std::string& kind) -> const Section* {
    const Section* found = nullptr;
    for (const auto& s : sections)
      if (s.kind == kind) {
        if (found) parse_error(s.line, "duplicate [" + kind + "]");
        found = &s;
      }
    return found;
  };

  // exosystem
  const Section* ex = single("exosystem");
  if (!ex) invalid("exosystem", "section missing");
  const Matrix S = require(*ex, "S", "exosystem.S");
  if (S.rows() != S.cols()) invalid("exosystem.S", "must be square");
  const Matrix Qe = require(*ex, "Q_eta", "exosystem.Q_eta");
  const Matrix Qv = require(*ex, "Q_v", "exosystem.Q_v");
  if (Qe.cols() != S.rows()) invalid("exosystem.Q_eta", "needs " + std::to_string(S.rows()) + " columns");
  shape(Qv, Qe.rows(), S.rows(), "exosystem.Q_v");
  const auto P_eta = optional_matrix(*ex, "P_eta");
  if (P_eta) shape(*P_eta, S.rows(), S.rows(), "exosystem.P_eta");
  try {
    sc.exo = make_exosystem(S, Qe, Qv, P_eta);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DimensionMismatch) invalid("exosystem", e.what());
    // A2 failures are reported by the assumption checks, not here.
    sc.exo = Exosystem{S, Qe, Qv, {}, {}};
  }
  const auto p = Qe.rows();
  const auto q = S.rows();

  // nodes
  int N = 0;
  for (const auto& s : sections)
    if (s.kind == "node") N = std::max(N, s.id);
  if (N < 1) invalid("nodes", "at least one [node i] section is required");
  const auto nodes = indexed(sections, "node", "nodes", true, N);
  for (int i = 0; i < N; ++i) {
    const Section& s = *nodes[static_cast<std::size_t>(i)];
    const std::string f = "nodes[" + std::to_string(i) + "]";
    NodeModel n;
    if (auto e = scalar(s, "ideal")) n.ideal = parse_bool(e->value, e->line);
    if (n.ideal) {
      for (const char* k : {"A", "B", "C", "D"})
        if (s.keys.count(k)) invalid(f + "." + k, "an ideal node has no plant matrices");
    } else {
      n.sys.A = require(s, "A", f + ".A");
      const auto nx = n.sys.A.rows();
      if (n.sys.A.cols() != nx) invalid(f + ".A", "must be square");
      n.sys.B = require(s, "B", f + ".B");
      if (n.sys.B.rows() != nx) invalid(f + ".B", "needs " + std::to_string(nx) + " rows");
      n.sys.C = require(s, "C", f + ".C");
      shape(n.sys.C, p, nx, f + ".C");
      if (auto D = optional_matrix(s, "D")) {
        shape(*D, nx, p, f + ".D");
        n.sys.D_in = *D;
      }
    }
    sc.net.nodes.push_back(n);
    if (auto e = scalar(s, "role")) {
      if (sc.roles.empty()) sc.roles.assign(static_cast<std::size_t>(N), Role::Tracking);
      sc.roles[static_cast<std::size_t>(i)] = parse_role(e->value, e->line);
    }
  }
  if (sc.regime == Regime::MasterSlave) {
    for (int i = 0; i < N; ++i)
      if (!nodes[static_cast<std::size_t>(i)]->keys.count("role")) invalid("nodes[" + std::to_string(i) + "].role", "required for master-slave");
    for (int i = 0; i < N; ++i) {
      const Role r = sc.roles[static_cast<std::size_t>(i)];
      if (r != Role::Master && r != Role::Slave) invalid("nodes[" + std::to_string(i) + "].role", "must be master or slave");
    }
  } else if (!sc.roles.empty()) {
    invalid("nodes.role", "roles are only used by the master-slave regime");
  }

  // edges and topology
  int M = 0;
  for (const auto& s : sections)
    if (s.kind == "edge") M = std::max(M, s.id);
  const auto edges = indexed(sections, "edge", "edges", true, M);
  std::vector<EdgeEnds> ends;
  bool have_ends = true;
  for (int j = 0; j < M; ++j) {
    const Section& s = *edges[static_cast<std::size_t>(j)];
    const std::string f = "edges[" + std::to_string(j) + "]";
    EdgeModel e;
    e.E = require(s, "E", f + ".E");
    if (e.E.rows() != e.E.cols()) invalid(f + ".E", "must be square");
    e.F = require(s, "F", f + ".F");
    shape(e.F, e.E.rows(), p, f + ".F");
    e.G = require(s, "G", f + ".G");
    shape(e.G, p, e.E.rows(), f + ".G");
    sc.net.edges.push_back(e);
    if (s.from && s.to)
      ends.push_back({*s.from, *s.to});
    else if (s.from || s.to)
      invalid(f, "give both from= and to=");
    else
      have_ends = false;
  }
  const Section* topo = single("topology");
  try {
    if (topo && topo->keys.count("H")) {
      const Matrix H = require(*topo, "H", "topology.H");
      shape(H, N, M, "topology.H");
      sc.net.topo = topology_from_incidence(H);
      if (!ends.empty() && !same(incidence_from_edge_list(ends, N).H, H))
        invalid("topology.H", "disagrees with the edge headers");
    } else {
      if (!have_ends) invalid("edges", "every [edge j] needs from= and to= when no [topology] H is given");
      sc.net.topo = incidence_from_edge_list(ends, N);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid(topo ? "topology.H" : "edges", e.what());
  }

  // controllers
  const auto ctrls = indexed(sections, "controller", "controllers", false, N);
  if (std::any_of(ctrls.begin(), ctrls.end(), [](const Section* s) { return s != nullptr; })) {
    sc.specs.assign(static_cast<std::size_t>(N), ControllerSpec{});
    for (int i = 0; i < N; ++i) {
      const Section* s = ctrls[static_cast<std::size_t>(i)];
      if (!s) continue;
      const std::string f = "controllers[" + std::to_string(i) + "]";
      auto& spec = sc.specs[static_cast<std::size_t>(i)];
      const bool gains = s->keys.count("K_x") || s->keys.count("K_zeta") || s->keys.count("G1") || s->keys.count("G2");
      spec.synthesize = !gains;
      if (auto e = scalar(*s, "synthesize")) {
        const bool syn = parse_bool(e->value, e->line);
        if (syn == gains) invalid(f, syn ? "synthesize = true cannot be combined with explicit gains" : "explicit gains missing");
      }
      if (spec.synthesize) {
        if (s->keys.count("P_hat")) invalid(f + ".P_hat", "only used with explicit gains");
        continue;
      }
      if (sc.net.nodes[static_cast<std::size_t>(i)].ideal) invalid(f, "an ideal node takes no controller");
      const auto& sys = sc.net.nodes[static_cast<std::size_t>(i)].sys;
      spec.K_x = require(*s, "K_x", f + ".K_x");
      shape(spec.K_x, sys.B.cols(), sys.A.rows(), f + ".K_x");
      spec.G1 = require(*s, "G1", f + ".G1");
      if (spec.G1.rows() != spec.G1.cols()) invalid(f + ".G1", "must be square");
      spec.G2 = require(*s, "G2", f + ".G2");
      shape(spec.G2, spec.G1.rows(), p, f + ".G2");
      spec.K_zeta = require(*s, "K_zeta", f + ".K_zeta");
      shape(spec.K_zeta, sys.B.cols(), spec.G1.rows(), f + ".K_zeta");
      spec.P_hat = optional_matrix(*s, "P_hat");
      if (spec.P_hat) shape(*spec.P_hat, sys.A.rows() + spec.G1.rows(), sys.A.rows() + spec.G1.rows(), f + ".P_hat");
    }
  }

  // references
  sc.refs.eta.assign(static_cast<std::size_t>(N), Vector());
  sc.refs.nu.assign(static_cast<std::size_t>(N), Vector());
  sc.refs.etabar.assign(static_cast<std::size_t>(N), Vector());
  if (const Section* r = single("references")) {
    for (const auto& [key, e] : r->keys) {
      std::string prefix = key.rfind("etabar", 0) == 0 ? "etabar" : key.rfind("eta", 0) == 0 ? "eta" : "nu";
      const int i = std::atoi(key.c_str() + prefix.size());
      if (i < 1 || i > N) invalid("references." + key, "node index outside [1, " + std::to_string(N) + "]");
      const Vector v = parse_vector(e.value, e.line);
      const auto want = prefix == "etabar" ? p * q : q;
      if (v.size() != want) invalid("references." + key, "has length " + std::to_string(v.size()) + ", expected " + std::to_string(want));
      auto& dst = prefix == "eta" ? sc.refs.eta : prefix == "nu" ? sc.refs.nu : sc.refs.etabar;
      dst[static_cast<std::size_t>(i - 1)] = v;
    }
  }

  // simulation
  if (const Section* s = single("simulation")) {
    if (auto e = scalar(*s, "dt")) sc.sim.dt = parse_number(e->value, e->line);
    if (auto e = scalar(*s, "t_end")) sc.sim.t_end = parse_number(e->value, e->line);
    if (auto e = scalar(*s, "record_every")) sc.sim.record_every = static_cast<int>(parse_int(e->value, e->line));
    if (auto e = scalar(*s, "window")) sc.sim.window = parse_number(e->value, e->line);
  }
  if (!(sc.sim.dt > 0.0)) invalid("simulation.dt", "must be > 0");
  if (!(sc.sim.t_end > 0.0)) invalid("simulation.t_end", "must be > 0");
  if (sc.sim.record_every < 1) invalid("simulation.record_every", "must be >= 1");
  if (!(sc.sim.window > 0.0) || sc.sim.window > sc.sim.t_end) invalid("simulation.window", "must be in (0, t_end]");
  return sc;
}

Scenario load_scenario(const std::string& path_or_name) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(path_or_name)) {
    std::ifstream f(path_or_name);
    if (!f) invalid("config", "cannot read '" + path_or_name + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
  }
  if (path_or_name == "power_network") return demo_power_network(GroundMode::Exact);
  if (path_or_name == "power_network_highgain") return demo_power_network(GroundMode::HighGain);
  invalid("config", "'" + path_or_name + "' is neither a file nor a built-in scenario (power_network, power_network_highgain)");
}

std::string serialize(const Scenario& sc) {
  std::ostringstream os;
  os << "name = " << sc.name << "\n";
  os << "regime = " << to_string(sc.regime) << "\n";
  os << "eps = " << num(sc.eps) << "\n";
  os << "seed = " << sc.seed << "\n\n";
  os << "[exosystem]\n";
  put(os, "S", sc.exo.S);
  put(os, "Q_eta", sc.exo.Q_eta);
  put(os, "Q_v", sc.exo.Q_v);
  const auto ends = edge_list(sc.net.topo);
  for (int i = 0; i < sc.net.N(); ++i) {
    const auto& n = sc.net.nodes[static_cast<std::size_t>(i)];
    os << "\n[node " << i + 1 << "]\n";
    if (!sc.roles.empty()) os << "role = " << to_string(sc.roles[static_cast<std::size_t>(i)]) << "\n";
    if (n.ideal) {
      os << "ideal = true\n";
      continue;
    }
    put(os, "A", n.sys.A);
    put(os, "B", n.sys.B);
    put(os, "C", n.sys.C);
    put(os, "D", n.sys.D_in);
  }
  for (int j = 0; j < sc.net.M(); ++j) {
    const auto& e = sc.net.edges[static_cast<std::size_t>(j)];
    os << "\n[edge " << j + 1 << " from=" << ends[static_cast<std::size_t>(j)].positive << " to="
       << ends[static_cast<std::size_t>(j)].negative << "]\n";
    put(os, "E", e.E);
    put(os, "F", e.F);
    put(os, "G", e.G);
  }
  for (std::size_t i = 0; i < sc.specs.size(); ++i) {
    const auto& s = sc.specs[i];
    if (sc.net.nodes[i].ideal) continue;
    os << "\n[controller " << i + 1 << "]\n";
    if (s.synthesize) {
      os << "synthesize = true\n";
      continue;
    }
    put(os, "K_x", s.K_x);
    put(os, "K_zeta", s.K_zeta);
    put(os, "G1", s.G1);
    put(os, "G2", s.G2);
    if (s.P_hat) put(os, "P_hat", *s.P_hat);
  }
  os << "\n[references]\n";
  auto refs = [&](const char* name, const std::vector<Vector>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i].size()) os << name << i + 1 << " = " << format_matrix(v[i].transpose()) << "\n";
  };
  refs("eta", sc.refs.eta);
  refs("nu", sc.refs.nu);
  refs("etabar", sc.refs.etabar);
  os << "\n[simulation]\n";
  os << "dt = " << num(sc.sim.dt) << "\n";
  os << "t_end = " << num(sc.sim.t_end) << "\n";
  os << "record_every = " << sc.sim.record_every << "\n";
  os << "window = " << num(sc.sim.window) << "\n";
  return os.str();
}

bool same_scenario(const Scenario& a, const Scenario& b) {
  if (a.name != b.name || a.regime != b.regime || a.eps != b.eps || a.seed != b.seed || a.roles != b.roles) return false;
  if (!same(a.exo.S, b.exo.S) || !same(a.exo.Q_eta, b.exo.Q_eta) || !same(a.exo.Q_v, b.exo.Q_v) ||
      !same(a.exo.P_eta, b.exo.P_eta) || !same(a.exo.B_eta, b.exo.B_eta))
    return false;
  if (a.net.N() != b.net.N() || a.net.M() != b.net.M() || !same(a.net.topo.H, b.net.topo.H)) return false;
  for (int i = 0; i < a.net.N(); ++i) {
    const auto& x = a.net.nodes[static_cast<std::size_t>(i)];
    const auto& y = b.net.nodes[static_cast<std::size_t>(i)];
    if (x.ideal != y.ideal || !same(x.sys.A, y.sys.A) || !same(x.sys.B, y.sys.B) || !same(x.sys.C, y.sys.C) ||
        !same(x.sys.D_in, y.sys.D_in))
      return false;
  }
  for (int j = 0; j < a.net.M(); ++j) {
    const auto& x = a.net.edges[static_cast<std::size_t>(j)];
    const auto& y = b.net.edges[static_cast<std::size_t>(j)];
    if (!same(x.E, y.E) || !same(x.F, y.F) || !same(x.G, y.G)) return false;
  }
  if (a.specs.size() != b.specs.size()) return false;
  for (std::size_t i = 0; i < a.specs.size(); ++i) {
    const auto& x = a.specs[i];
    const auto& y = b.specs[i];
    if (a.net.nodes[i].ideal) continue;
    if (x.synthesize != y.synthesize) return false;
    if (x.synthesize) continue;
    if (!same(x.K_x, y.K_x) || !same(x.K_zeta, y.K_zeta) || !same(x.G1, y.G1) || !same(x.G2, y.G2)) return false;
    if (x.P_hat.has_value() != y.P_hat.has_value() || (x.P_hat && !same(*x.P_hat, *y.P_hat))) return false;
  }
  if (!same(a.refs.eta, b.refs.eta) || !same(a.refs.nu, b.refs.nu) || !same(a.refs.etabar, b.refs.etabar)) return false;
  return a.sim.dt == b.sim.dt && a.sim.t_end == b.sim.t_end && a.sim.record_every == b.sim.record_every &&
         a.sim.window == b.sim.window;
}

}  // namespace dynedge
