#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dynedge/config.hpp"
#include "dynedge/error.hpp"

#include <fstream>
#include <sstream>

using namespace dynedge;

namespace {

const char* kTwoNode = R"(name = pair
regime = tracking
eps = 0

[exosystem]
S = 0
Q_eta = 1
Q_v = 1

[node 1]
A = -1
B = 1
C = 1

[node 2]
A = 2
B = 1
C = 1

[edge 1 from=1 to=2]
E = -1
F = 1
G = 1

[references]
eta1 = 1
eta2 = -1

[simulation]
dt = 0.01
t_end = 5
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto k = s.find(from);
  REQUIRE(k != std::string::npos);
  return s.replace(k, from.size(), to);
}

Error error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e;
  }
  FAIL("no error raised");
  return Error(ErrorCode::ParseError, "");
}

std::string read(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("small network parses") {
  const Scenario sc = parse_config(kTwoNode);
  CHECK(sc.name == "pair");
  CHECK(sc.regime == Regime::Tracking);
  REQUIRE(sc.net.N() == 2);
  REQUIRE(sc.net.M() == 1);
  CHECK(sc.net.nodes[1].sys.A(0, 0) == 2.0);
  CHECK(sc.net.topo.H(0, 0) == 1.0);
  CHECK(sc.net.topo.H(1, 0) == -1.0);
  CHECK(sc.refs.eta[1](0) == -1.0);
  CHECK(sc.sim.dt == 0.01);
  CHECK(sc.sim.t_end == 5.0);
}

TEST_CASE("matrix rows and columns") {
  std::string text = replace(kTwoNode, "S = 0\nQ_eta = 1\nQ_v = 1", "S = 0; -2 | 2; 0\nQ_eta = 1; 0\nQ_v = 0; 1");
  text = replace(replace(text, "eta1 = 1", "eta1 = 1; 0"), "eta2 = -1", "eta2 = -1; 0");
  const Scenario sc = parse_config(text);
  CHECK(sc.exo.S(0, 1) == -2.0);
  CHECK(sc.exo.S(1, 0) == 2.0);
  CHECK(sc.exo.Q_v(0, 1) == 1.0);
}

TEST_CASE("round trip preserves every field") {
  for (const char* name : {"power_network", "power_network_highgain"}) {
    const Scenario a = load_scenario(name);
    const Scenario b = parse_config(serialize(a));
    CHECK(same_scenario(a, b));
    CHECK(serialize(b) == serialize(a));
  }
  for (auto regime : {Regime::Sync, Regime::Cooperation, Regime::MasterSlave}) {
    RandomOptions o;
    o.regime = regime;
    o.p = 2;
    const Scenario a = random_network(8, o);
    CHECK(same_scenario(a, parse_config(serialize(a))));
  }
}

TEST_CASE("shipped configuration equals the built-in demo") {
  const Scenario a = load_scenario(std::string(DYNEDGE_TEST_DATA) + "/power_network.cfg");
  CHECK(same_scenario(a, demo_power_network()));
}

TEST_CASE("missing edge output matrix names the field") {
  const Error e = error_of(replace(kTwoNode, "G = 1\n", ""));
  CHECK(e.code() == ErrorCode::ValidationError);
  CHECK(std::string(e.what()).find("edges[0].G") != std::string::npos);
}

TEST_CASE("incidence column with two sources is rejected") {
  const Error e = error_of(replace(kTwoNode, "[exosystem]", "[topology]\nH = 1 | 1\n\n[exosystem]"));
  CHECK(e.code() == ErrorCode::ValidationError);
}

TEST_CASE("unknown key reports its line") {
  const Error e = error_of(replace(kTwoNode, "eps = 0", "eps = 0\ngain = 3"));
  CHECK(e.code() == ErrorCode::ParseError);
  CHECK(std::string(e.what()).find("line 4") != std::string::npos);
}

TEST_CASE("malformed input") {
  CHECK(error_of(replace(kTwoNode, "regime = tracking", "regime = flocking")).code() == ErrorCode::ParseError);
  CHECK(error_of(replace(kTwoNode, "A = -1", "A = -1; x")).code() == ErrorCode::ParseError);
  CHECK(error_of(replace(kTwoNode, "[node 2]", "[node 2")).code() == ErrorCode::ParseError);
  CHECK(error_of(replace(kTwoNode, "S = 0\n", "S = 1; 2 | 3\n")).code() == ErrorCode::ParseError);
}

TEST_CASE("missing file is a configuration error") {
  try {
    load_scenario("/nonexistent/file.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ValidationError));
  }
}
