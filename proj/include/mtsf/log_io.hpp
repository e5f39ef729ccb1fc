#pragma once

// CSV serialization of trajectory logs: one header row, then one row per
// recorded sample. Numbers use the shortest round-trip representation so
// identical runs produce byte-identical files.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mtsf/sim.hpp"

namespace mtsf {

// t, x_i, y_i, vx_i, vy_i, theta_i, omega_i, Z_<v>_x, Z_<v>_y, E_<v>_x, ...,
// dE_<v>_x, ..., tau_r_i, tau_l_i, min_dist and the term norms.
std::vector<std::string> logColumns(const GroupLayout& layout);

void writeCsv(std::ostream& out, const TrajectoryLog& log);
void writeCsv(const std::filesystem::path& path, const TrajectoryLog& log);

// Infers the layout from the Z_ column names. Throws ConfigError naming the
// line for malformed input and for rows with non-finite values.
TrajectoryLog readCsv(std::istream& in);
TrajectoryLog readCsv(const std::filesystem::path& path);

}  // namespace mtsf
