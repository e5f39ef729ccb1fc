#pragma once

// Scenario files: a single JSON document describing the layout, robot
// parameters, controller, desired formation, potential, initial state and
// integration settings. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mtsf/cbt.hpp"
#include "mtsf/control.hpp"
#include "mtsf/dynamics.hpp"
#include "mtsf/potential.hpp"
#include "mtsf/stability.hpp"

namespace mtsf {

enum class Integrator { kRk4, kEuler };

const char* toString(Integrator integrator);

struct SimConfig {
  double dt = 1e-4;
  double horizon = 30.0;
  Integrator integrator = Integrator::kRk4;
  // Settling tolerance as a fraction of each level's initial error norm.
  double settling_fraction = 0.02;
  // Absolute floor so that pre-settled levels are reported as settled at 0.
  double settling_floor = 1e-9;
  // Every step is integrated; every record_stride-th step (and the last) is
  // written to the log.
  int record_stride = 1;
  bool potential_enabled = false;
  std::optional<std::uint64_t> seed;

  // Throws ConfigError; sigma_min is the smallest time-scale product.
  void validate(double sigma_min) const;
};

struct Scenario {
  std::string name = "scenario";
  std::vector<std::string> notes;
  GroupLayout layout{std::vector<int>{2}};
  RobotParams robot;
  ControllerConfig controller;
  DesiredFormation formation;
  PotentialParams potential;
  std::vector<RobotState> initial;
  SimConfig sim;
  StabilityOptions stability;

  // Every module invariant: layout, robot, controller, formation dimensions,
  // potential radii, initial state size and finiteness, initial separations
  // above r_safe when the potential is enabled, and the dt guard. The
  // stability command relaxes the gain sign check so that it can report
  // non-Hurwitz levels instead of rejecting the file.
  void validate(bool require_positive_gains = true) const;

  double minScale() const;
};

// Equilateral triangle of side b with vertices (b/2, -h/3), (-b/2, -h/3),
// (0, 2h/3), h = b sqrt(3)/2, stacked as 6 coordinates.
Eigen::VectorXd equilateralPoints(double side);

// Parses and validates. Throws ConfigError with the JSON path of the
// offending field.
Scenario parseScenario(const std::string& text, bool require_positive_gains = true);
Scenario loadScenario(const std::filesystem::path& path, bool require_positive_gains = true);

}  // namespace mtsf
