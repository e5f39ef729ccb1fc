#pragma once

// Plain-text and CSV reports for the CLI.

#include <iosfwd>
#include <optional>

#include "mtsf/scenario.hpp"
#include "mtsf/sim.hpp"
#include "mtsf/stability.hpp"

namespace mtsf {

// Hurwitz verdicts, Lyapunov certificates (P and residual), the epsilon bound
// chain with grid checks and, when growth constants are given, eps* and d*.
// Non-Hurwitz levels get gain advice.
void writeStabilityReport(std::ostream& out, const StabilityReport& report);

// One row per chain step.
void writeStabilityCsv(std::ostream& out, const StabilityReport& report);

// Settling times, ratios and closest approach of a finished run. `contrast`
// is the closest approach of the paired run with the potential toggled.
void writeRunSummary(std::ostream& out, const Scenario& scenario, const TrajectoryLog& log,
                     const SettlingReport& settling, const MinDistance& closest,
                     const std::optional<MinDistance>& contrast = std::nullopt);

}  // namespace mtsf
