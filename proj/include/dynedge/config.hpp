#pragma once

#include "dynedge/scenarios.hpp"

#include <string>

namespace dynedge {

/// Line-oriented scenario format:
///
///   name = power_network
///   regime = master-slave          # tracking | sync | cooperation | master-slave
///   eps = 20
///   [exosystem]   S, Q_eta, Q_v, optional P_eta
///   [topology]    optional H (otherwise built from the edge headers)
///   [node i]      A, B, C, optional D, optional role, or ideal = true
///   [edge j from=a to=b]  E, F, G
///   [controller i]  synthesize = true | K_x, K_zeta, G1, G2, optional P_hat
///   [references]  eta<i>, nu<i>, etabar<i>
///   [simulation]  dt, t_end, record_every, window
///
/// Matrices are row-major: `;` separates entries, `|` separates rows.
/// Throws ParseError ("line N: ...") or ValidationError naming the field,
/// e.g. "edges[0].G".
Scenario parse_config(const std::string& text);

/// Reads a file, or returns the built-in scenario with that name
/// (power_network, power_network_highgain). Config errors as above.
Scenario load_scenario(const std::string& path_or_name);

/// Inverse of parse_config; numbers carry 17 significant digits.
std::string serialize(const Scenario& sc);

/// Entrywise equality of every field parse_config fills.
bool same_scenario(const Scenario& a, const Scenario& b);

std::string format_matrix(const Matrix& m);

}  // namespace dynedge
