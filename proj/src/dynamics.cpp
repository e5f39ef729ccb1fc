#include "mtsf/dynamics.hpp"

#include <cmath>
#include <string>

#include "mtsf/errors.hpp"

namespace mtsf {

namespace {

void requirePositive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("robot.") + name +
                      " must be positive and finite, got " + std::to_string(value));
  }
}

bool finite(const RobotState& s) {
  return s.position.allFinite() && s.velocity.allFinite() &&
         std::isfinite(s.heading) && std::isfinite(s.angular_rate);
}

}  // namespace

void RobotParams::validate() const {
  requirePositive(mass, "mass");
  requirePositive(inertia, "inertia");
  requirePositive(half_separation, "half_separation");
  requirePositive(wheel_radius, "wheel_radius");
  if (com_offset == 0.0 || !std::isfinite(com_offset)) {
    throw ConfigError("robot.com_offset must be nonzero and finite");
  }
  if (!(reducedInertia() > 0.0)) {
    throw ConfigError("robot.inertia - mass * com_offset^2 must be positive, got " +
                      std::to_string(reducedInertia()));
  }
}

RobotMatrices robotMatrices(double theta, double omega, const RobotParams& params) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double d = params.com_offset;
  const double mr = params.mass * params.wheel_radius;
  const double jr = params.reducedInertia() * params.wheel_radius;
  const double lateral = d * params.half_separation / jr;

  RobotMatrices out;
  out.A << -s * c * omega, -s * s * omega,
            c * c * omega,  s * c * omega;
  out.B << c / mr - lateral * s, c / mr + lateral * s,
           s / mr + lateral * c, s / mr - lateral * c;
  out.C << -d * omega * omega * c, -d * omega * omega * s;
  return out;
}

double actuationDeterminant(const RobotParams& params) {
  const double r = params.wheel_radius;
  return -2.0 * params.com_offset * params.half_separation /
         (params.mass * params.reducedInertia() * r * r);
}

TorquePair solveTorques(double theta, const Eigen::Vector2d& f,
                        const RobotParams& params, int robot) {
  const Eigen::Matrix2d b = robotMatrices(theta, 0.0, params).B;
  const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
  if (!(std::abs(det) >= 1e-12)) throw SingularActuation(robot, std::abs(det));
  return {( b(1, 1) * f.x() - b(0, 1) * f.y()) / det,
          (-b(1, 0) * f.x() + b(0, 0) * f.y()) / det};
}

CollectiveMatrices collectiveMatrices(std::span<const RobotState> states,
                                      const RobotParams& params) {
  const auto n = static_cast<Eigen::Index>(states.size());
  CollectiveMatrices out{Eigen::MatrixXd::Zero(2 * n, 2 * n),
                         Eigen::MatrixXd::Zero(2 * n, 2 * n),
                         Eigen::VectorXd::Zero(2 * n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto m = robotMatrices(states[i].heading, states[i].angular_rate, params);
    out.A.block<2, 2>(2 * i, 2 * i) = m.A;
    out.B.block<2, 2>(2 * i, 2 * i) = m.B;
    out.C.segment<2>(2 * i) = m.C;
  }
  return out;
}

RobotRates robotDerivative(const RobotState& state, const TorquePair& torque,
                           const RobotParams& params) {
  if (!finite(state) || !std::isfinite(torque.right) || !std::isfinite(torque.left)) {
    throw IntegrationError("non-finite robot state or torque");
  }
  const auto m = robotMatrices(state.heading, state.angular_rate, params);
  const Eigen::Vector2d u(torque.right, torque.left);
  RobotRates rates;
  rates.position_rate = state.velocity;
  rates.acceleration = m.A * state.velocity + m.B * u + m.C;
  rates.heading_rate = state.angular_rate;
  rates.angular_acceleration =
      params.half_separation / (params.reducedInertia() * params.wheel_radius) *
      (torque.right - torque.left);
  return rates;
}

std::vector<RobotRates> derivative(std::span<const RobotState> states,
                                   std::span<const TorquePair> torques,
                                   const RobotParams& params) {
  if (states.size() != torques.size()) {
    throw ShapeError("state and torque counts differ");
  }
  std::vector<RobotRates> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    out.push_back(robotDerivative(states[i], torques[i], params));
  }
  return out;
}

Eigen::VectorXd stackPositions(std::span<const RobotState> states) {
  Eigen::VectorXd x(2 * static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) x.segment<2>(2 * i) = states[i].position;
  return x;
}

Eigen::VectorXd stackVelocities(std::span<const RobotState> states) {
  Eigen::VectorXd x(2 * static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) x.segment<2>(2 * i) = states[i].velocity;
  return x;
}

}  // namespace mtsf
