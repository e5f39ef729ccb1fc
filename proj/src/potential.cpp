#include "mtsf/potential.hpp"

#include <cmath>
#include <limits>

#include "mtsf/errors.hpp"

namespace mtsf {

void PotentialParams::validate() const {
  if (!(safe_distance > 0.0) || !std::isfinite(safe_distance)) {
    throw ConfigError("potential.safe_distance must be positive, got " +
                      std::to_string(safe_distance));
  }
  if (!(sensing_radius > safe_distance) || !std::isfinite(sensing_radius)) {
    throw ConfigError("potential.sensing_radius must exceed safe_distance, got " +
                      std::to_string(sensing_radius));
  }
}

namespace {

// Squared separation; throws when the pair is at or inside r_safe.
double squaredSeparation(const Eigen::Vector2d& qi, const Eigen::Vector2d& qj,
                         const PotentialParams& params, int i, int j) {
  const double s2 = (qi - qj).squaredNorm();
  if (!(s2 > params.safe_distance * params.safe_distance)) {
    throw BarrierViolation(i, j, std::sqrt(s2));
  }
  return s2;
}

}  // namespace

double pairPotential(const Eigen::Vector2d& qi, const Eigen::Vector2d& qj,
                     const PotentialParams& params, int i, int j) {
  const double s2 = squaredSeparation(qi, qj, params, i, j);
  const double big = params.sensing_radius * params.sensing_radius;
  if (s2 >= big) return 0.0;
  const double g = (s2 - big) / (s2 - params.safe_distance * params.safe_distance);
  return g * g;
}

Eigen::Vector2d pairPotentialGradient(const Eigen::Vector2d& qi, const Eigen::Vector2d& qj,
                                      const PotentialParams& params, int i, int j) {
  const double s2 = squaredSeparation(qi, qj, params, i, j);
  const double big = params.sensing_radius * params.sensing_radius;
  if (s2 >= big) return Eigen::Vector2d::Zero();
  const double small = params.safe_distance * params.safe_distance;
  const double denom = s2 - small;
  const double g = (s2 - big) / denom;
  // dV/d(s^2) = 2 g (R^2 - r^2) / (s^2 - r^2)^2 and d(s^2)/dq_i = 2 (q_i - q_j).
  return 4.0 * g * (big - small) / (denom * denom) * (qi - qj);
}

double totalPotential(const Eigen::VectorXd& positions, const PotentialParams& params) {
  const auto n = static_cast<int>(positions.size() / 2);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      sum += pairPotential(positions.segment<2>(2 * i), positions.segment<2>(2 * j), params, i, j);
    }
  }
  return sum;
}

Eigen::Vector2d avoidanceGradient(const Eigen::VectorXd& positions, int i,
                                  const PotentialParams& params) {
  const auto n = static_cast<int>(positions.size() / 2);
  if (i < 0 || i >= n) throw ShapeError("robot index out of range");
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  const Eigen::Vector2d qi = positions.segment<2>(2 * i);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    out -= pairPotentialGradient(qi, positions.segment<2>(2 * j), params, i, j);
  }
  return out;
}

Eigen::VectorXd stackedAvoidance(const Eigen::VectorXd& positions,
                                 const PotentialParams& params) {
  if (positions.size() % 2 != 0) throw ShapeError("stacked positions must have even length");
  const auto n = static_cast<int>(positions.size() / 2);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(positions.size());
  // Each pair is evaluated once; the pair gradient is antisymmetric.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::Vector2d g = pairPotentialGradient(positions.segment<2>(2 * i),
                                                      positions.segment<2>(2 * j), params, i, j);
      out.segment<2>(2 * i) -= g;
      out.segment<2>(2 * j) += g;
    }
  }
  return out;
}

PotentialField transformedPotential(const Eigen::VectorXd& positions, const CbtMatrix& phi,
                                    const PotentialParams& params) {
  if (positions.size() != phi.matrix().cols()) {
    throw ShapeError("positions do not match Phi_M dimension");
  }
  PotentialField field;
  field.stacked = stackedAvoidance(positions, params);
  field.transformed = phi.matrix() * field.stacked;
  return field;
}

PairDistance closestPair(const Eigen::VectorXd& positions) {
  const auto n = static_cast<int>(positions.size() / 2);
  PairDistance best{std::numeric_limits<double>::infinity(), -1, -1};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (positions.segment<2>(2 * i) - positions.segment<2>(2 * j)).norm();
      if (d < best.distance) best = {d, i, j};
    }
  }
  return best;
}

}  // namespace mtsf
