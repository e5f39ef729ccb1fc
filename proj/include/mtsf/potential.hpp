#pragma once

// Barrier-like pairwise collision potential
//
//   V_ij = (min{0, (s^2 - R^2) / (s^2 - r^2)})^2,   s = |q_i - q_j|
//
// with sensing radius R and safety distance r < R. V_ij vanishes for s >= R
// and diverges as s -> r from above.

#include <Eigen/Dense>

#include "mtsf/cbt.hpp"

namespace mtsf {

struct PotentialParams {
  double sensing_radius = 2.0;  // R_sense [m]
  double safe_distance = 0.5;   // r_safe [m]

  // Throws ConfigError unless 0 < r_safe < R_sense.
  void validate() const;
};

// Throws BarrierViolation (with the given indices) if s <= r_safe.
double pairPotential(const Eigen::Vector2d& qi, const Eigen::Vector2d& qj,
                     const PotentialParams& params, int i = 0, int j = 1);

// dV_ij / dq_i. Zero outside R_sense.
Eigen::Vector2d pairPotentialGradient(const Eigen::Vector2d& qi, const Eigen::Vector2d& qj,
                                      const PotentialParams& params, int i = 0, int j = 1);

// Sum over unordered pairs of V_ij for stacked positions.
double totalPotential(const Eigen::VectorXd& positions, const PotentialParams& params);

// Repulsive control vector of robot i: -sum_{j != i} dV_ij / dq_i.
Eigen::Vector2d avoidanceGradient(const Eigen::VectorXd& positions, int i,
                                  const PotentialParams& params);

// Stacked [grad f_1; ...; grad f_N].
Eigen::VectorXd stackedAvoidance(const Eigen::VectorXd& positions,
                                 const PotentialParams& params);

struct PotentialField {
  Eigen::VectorXd stacked;      // grad F
  Eigen::VectorXd transformed;  // F_pot = Phi_M grad F, partitioned by the layout
};

PotentialField transformedPotential(const Eigen::VectorXd& positions, const CbtMatrix& phi,
                                    const PotentialParams& params);

struct PairDistance {
  double distance = 0.0;
  int first = -1;
  int second = -1;
};

// Closest pair of stacked positions; distance is +inf for fewer than 2 robots.
PairDistance closestPair(const Eigen::VectorXd& positions);

}  // namespace mtsf
