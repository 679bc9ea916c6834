#include "dynedge/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Controller synthesis and simulation for networks with dynamic edges"};
  app.require_subcommand(1);

  dynedge::RunConfig cfg;
  double dt = 0, t_end = 0, eps = 0;
  std::uint64_t seed = 0;
  for (const char* name : {"check", "synth", "eps", "simulate", "demo"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", cfg.config, "scenario file or built-in name");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--dt", dt, "integration step [s]");
    sub->add_option("--t-end", t_end, "simulated horizon [s]");
    sub->add_option("--eps", eps, "coupling gain (upper search limit for eps)");
    sub->add_option("--seed", seed, "synthesis / generator seed");
    sub->add_option("--emit", cfg.emit, "csv or csv+svg")->check(CLI::IsMember({"csv", "csv+svg"}));
    if (std::string(name) == "demo") sub->add_option("--golden", cfg.golden, "golden metrics CSV");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : dynedge::kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  if (sub->count("--dt")) cfg.dt = dt;
  if (sub->count("--t-end")) cfg.t_end = t_end;
  if (sub->count("--eps")) cfg.eps = eps;
  if (sub->count("--seed")) cfg.seed = seed;
  return dynedge::run_command(cfg, std::cout, std::cerr);
}
