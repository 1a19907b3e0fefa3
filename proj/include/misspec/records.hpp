#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "misspec/agents.hpp"

namespace misspec {

/// One JSON object per line:
/// {"grid_id", "true_reward", "generator", "alpha", "p_demo", "resolved", "seed", "individual",
///  "steps": [[row, col, "N"|"S"|"E"|"W"], ...]}
std::string to_json_line(const Demonstration& demo);
Demonstration demonstration_from_json(const std::string& line);

void write_demonstrations(std::ostream& out, const std::vector<Demonstration>& demos);
std::vector<Demonstration> read_demonstrations(std::istream& in);

Generator parse_generator(const std::string& tag, double param);

}  // namespace misspec
