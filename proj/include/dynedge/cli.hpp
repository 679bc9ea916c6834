#pragma once

#include "dynedge/error.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace dynedge {

enum ExitCode : int { kExitOk = 0, kExitAssumption = 1, kExitNumerical = 2, kExitConfig = 3 };

/// Exit status for a library error code.
int exit_code_for(ErrorCode code);

struct RunConfig {
  std::string command;                // check | synth | eps | simulate | demo
  std::string config;                 // file path or built-in name; empty = power_network
  std::string out_dir;                // empty: write nothing (simulate defaults to "out")
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> eps;          // eps override; upper search limit for `eps`
  std::optional<std::uint64_t> seed;
  std::string emit = "csv";           // csv | csv+svg
  std::string golden;                 // demo: golden metrics file, empty = bundled
};

/// Runs one command, printing its report to `out` and errors to `err`.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace dynedge
