#pragma once

// Vector-graphics figures rendered straight to SVG. Output is a pure function
// of the log.

#include <filesystem>
#include <iosfwd>

#include "mtsf/sim.hpp"

namespace mtsf {

// XY paths colored by group, with formation outlines at the first, middle
// and last samples.
void trajectorySvg(std::ostream& out, const TrajectoryLog& log, const std::string& title = "");

// Error norms per level (each intra group, inter, centroid) against time on
// logarithmic axes.
void errorSvg(std::ostream& out, const TrajectoryLog& log, const std::string& title = "");

struct PlotFiles {
  std::filesystem::path trajectory;
  std::filesystem::path errors;
};

// Writes <stem>_trajectory.svg and <stem>_errors.svg into `dir`.
PlotFiles writePlots(const TrajectoryLog& log, const std::filesystem::path& dir,
                     const std::string& stem);

}  // namespace mtsf
