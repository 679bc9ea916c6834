#pragma once

#include "dynedge/sim.hpp"

#include <string>
#include <vector>

namespace dynedge {

/// Columns t, y<i>_<k>, v<i>_<k>, ref<i>_<k>, err<i>_<k> (node-major,
/// 1-based), 17 significant digits.
std::string simulation_csv(const SimResult& r);

/// Line chart of one signal family (one polyline per node and component).
std::string svg_panel(const std::string& title, const std::vector<double>& t, const std::vector<Matrix>& series,
                      const std::vector<Matrix>& dashed = {});

/// Writes outputs / neighboring inputs (with references) / errors panels;
/// returns the file names written.
std::vector<std::string> write_svg_panels(const SimResult& r, const std::string& dir, const std::string& stem);

/// Named scalar check: measured `op` limit, with op one of <, <=, >, >=, ==.
struct MetricCheck {
  std::string name;
  std::string op;
  double limit = 0.0;
  double measured = 0.0;
  bool evaluated = false;

  bool pass() const;
};

/// CSV with header name,op,limit (golden file) or name,op,limit,measured,pass.
std::vector<MetricCheck> parse_metrics_csv(const std::string& text);
std::string metrics_csv(const std::vector<MetricCheck>& checks, bool with_results);

void write_text(const std::string& path, const std::string& text);

}  // namespace dynedge
