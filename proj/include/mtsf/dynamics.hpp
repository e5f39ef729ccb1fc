#pragma once

// Dynamics of a differential-drive wheeled mobile robot expressed at a point
// offset from the wheel axis:
//
//   p'' = A(theta, omega) p' + B(theta) u + C(theta, omega)
//   J theta'' = (R_half / r_wheel) (tau_r - tau_l)
//
// with u = [tau_r, tau_l] and J = I - m1 d^2.

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace mtsf {

struct RobotParams {
  double mass = 1.0;             // m1 [kg]
  double inertia = 0.05;         // I [kg m^2]
  double com_offset = 0.05;      // d [m]
  double half_separation = 0.15; // R_half [m]
  double wheel_radius = 0.05;    // r_wheel [m]

  double reducedInertia() const { return inertia - mass * com_offset * com_offset; }

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct RobotState {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double heading = 0.0;       // theta [rad]
  double angular_rate = 0.0;  // omega [rad/s]
};

struct TorquePair {
  double right = 0.0;
  double left = 0.0;
};

struct RobotMatrices {
  Eigen::Matrix2d A;
  Eigen::Matrix2d B;
  Eigen::Vector2d C;
};

RobotMatrices robotMatrices(double theta, double omega, const RobotParams& params);

// Closed form: -2 d R_half / (m1 J r^2), independent of theta.
double actuationDeterminant(const RobotParams& params);

// Solves B(theta) u = f with the analytic 2x2 inverse. Throws
// SingularActuation (tagged with `robot`) when |det B| < 1e-12.
TorquePair solveTorques(double theta, const Eigen::Vector2d& f,
                        const RobotParams& params, int robot = 0);

struct CollectiveMatrices {
  Eigen::MatrixXd A;  // diag{A_1..A_N}
  Eigen::MatrixXd B;  // diag{B_1..B_N}
  Eigen::VectorXd C;  // [C_1; ...; C_N]
};

CollectiveMatrices collectiveMatrices(std::span<const RobotState> states,
                                      const RobotParams& params);

struct RobotRates {
  Eigen::Vector2d position_rate;  // p'
  Eigen::Vector2d acceleration;   // p''
  double heading_rate = 0.0;      // theta'
  double angular_acceleration = 0.0;  // theta''
};

// Throws IntegrationError on non-finite input.
RobotRates robotDerivative(const RobotState& state, const TorquePair& torque,
                           const RobotParams& params);

std::vector<RobotRates> derivative(std::span<const RobotState> states,
                                   std::span<const TorquePair> torques,
                                   const RobotParams& params);

// Stacking helpers: X = [p_1; ...; p_N], X' = [v_1; ...; v_N].
Eigen::VectorXd stackPositions(std::span<const RobotState> states);
Eigen::VectorXd stackVelocities(std::span<const RobotState> states);

}  // namespace mtsf
