#pragma once

// Multi-time-scale formation controller in transformed coordinates.
//
// The transformed dynamics are Z'' = P Z' + F + R with P = Phi A Phi^-1,
// R = Phi C and F = Phi B U. The control law cancels P Z' + R, adds the
// desired acceleration and a PD term per level with gains scaled by the
// level's time-scale product sigma:
//
//   F = -K1 Z_e - K2 Z_e' - Kbar Z_e' - P Z' - R + Z_d'' + k_pot F_pot
//   K1 = K_f1 / sigma^2,  K2 = K_f2 / sigma,  k_pot = 1 / sigma
//
// so the closed-loop error obeys the linear system
//   Z_e'' = -K1 Z_e - (K2 + Kbar) Z_e' + k_pot F_pot.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtsf/cbt.hpp"
#include "mtsf/dynamics.hpp"

namespace mtsf {

enum class TimeScaleMode {
  // One level for all intra shape variables (scale eps1*eps2), inter (eps1),
  // centroid (1). Takes exactly two epsilons.
  kThree,
  // One level per group; group l uses eps_1 * ... * eps_{m-l+2} so group 1 is
  // the fastest. Takes m+1 epsilons.
  kMulti,
};

const char* toString(TimeScaleMode mode);

struct PdGains {
  double proportional = 1.0;  // k_1
  double derivative = 1.0;    // k_2
};

// Coupling gains Kbar between levels. Every off-level block is filled with
// `fill` unless overridden per (to, from) level pair, e.g. {"s", "r"} is
// Kbar_sr acting on Z_re' in the intra dynamics. An explicit full matrix
// takes precedence over both; its level-diagonal blocks are ignored.
struct CouplingSpec {
  double fill = 1.0;
  std::map<std::pair<std::string, std::string>, double> blocks;
  std::optional<Eigen::MatrixXd> matrix;
};

struct ControllerConfig {
  TimeScaleMode mode = TimeScaleMode::kThree;
  std::vector<double> epsilons{0.1, 0.1};
  // Either one entry shared by every group or one entry per group.
  std::vector<PdGains> intra{PdGains{}};
  PdGains inter;
  PdGains centroid;
  CouplingSpec coupling;

  // Throws ConfigError naming the offending field. Gains must be finite; with
  // require_positive_gains they must also be strictly positive.
  void validate(const GroupLayout& layout, bool require_positive_gains = true) const;

  PdGains intraGains(int group) const;
};

// A time-scale level: a contiguous block of transformed rows sharing one
// scale and one pair of base gains.
struct Level {
  std::string name;  // "s", "1".."m", "r" or "c"
  RowBlock rows;
  double scale = 1.0;  // sigma
  PdGains base;
};

// Levels ordered fastest first: intra level(s), inter (absent when m = 1),
// centroid.
std::vector<Level> controlLevels(const ControllerConfig& config,
                                 const GroupLayout& layout);

struct EffectiveGains {
  std::vector<Level> levels;
  Eigen::VectorXd proportional;  // diagonal of K1
  Eigen::VectorXd derivative;    // diagonal of K2
  Eigen::VectorXd potential;     // per-row weight 1/sigma
  Eigen::MatrixXd coupling;      // Kbar, zero on level-diagonal blocks

  const Level& level(const std::string& name) const;
  // Kbar_{to,from}: the block acting on level `from` rates in level `to`.
  Eigen::MatrixXd couplingBlock(const std::string& to, const std::string& from) const;
};

EffectiveGains scaledGains(const ControllerConfig& config, const GroupLayout& layout);

// z_cd(t) = origin + velocity t + amplitude .* sin(frequency .* t + phase),
// evaluated per axis. [t; 30 sin 0.1 t] is velocity (1, 0), amplitude (0, 30),
// frequency (0, 0.1).
struct CentroidTrajectory {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  Eigen::Vector2d amplitude = Eigen::Vector2d::Zero();
  Eigen::Vector2d frequency = Eigen::Vector2d::Zero();
  Eigen::Vector2d phase = Eigen::Vector2d::Zero();

  Eigen::Vector2d position(double t) const;
  Eigen::Vector2d rate(double t) const;
  Eigen::Vector2d acceleration(double t) const;
};

struct DesiredFormation {
  Eigen::VectorXd intra;  // Z_sd, 2(N - m)
  Eigen::VectorXd inter;  // Z_rd, 2(m - 1)
  CentroidTrajectory centroid;

  struct Sample {
    Eigen::VectorXd value;         // Z_d
    Eigen::VectorXd rate;          // Z_d'
    Eigen::VectorXd acceleration;  // Z_d''
  };
  Sample at(double t, const GroupLayout& layout) const;

  void validate(const GroupLayout& layout) const;
};

struct TransformedError {
  Eigen::VectorXd value;  // Z - Z_d
  Eigen::VectorXd rate;   // Z' - Z_d'

  static TransformedError from(const Eigen::VectorXd& z, const Eigen::VectorXd& z_rate,
                               const DesiredFormation::Sample& desired);
};

struct TransformedTerms {
  Eigen::MatrixXd P;  // Phi A Phi^-1
  Eigen::VectorXd R;  // Phi C
};

TransformedTerms transformedDynamicsTerms(const CbtMatrix& phi, const Eigen::MatrixXd& A,
                                          const Eigen::VectorXd& C);

// Transformed control force. `plant` is P Z' + R evaluated at the current
// state; `potential` is F_pot when collision avoidance is active.
Eigen::VectorXd controlForces(const TransformedError& error, const Eigen::VectorXd& plant,
                              const DesiredFormation::Sample& desired,
                              const EffectiveGains& gains,
                              const Eigen::VectorXd* potential = nullptr);

// Same law with P and R given explicitly; Z' is reconstructed from the error.
Eigen::VectorXd controlForces(const TransformedError& error, const TransformedTerms& terms,
                              const DesiredFormation::Sample& desired,
                              const EffectiveGains& gains,
                              const Eigen::VectorXd* potential = nullptr);

// Right-hand side of the closed-loop linear error system.
Eigen::VectorXd closedLoopErrorRhs(const TransformedError& error,
                                   const EffectiveGains& gains,
                                   const Eigen::VectorXd* potential = nullptr);

// U = B^-1 Phi^-1 F with each 2x2 block of the collective B inverted
// analytically. Throws SingularActuation naming the first robot whose
// |det B_i| < 1e-12.
std::vector<TorquePair> torquesFromForces(const Eigen::VectorXd& forces,
                                          const CbtMatrix& phi, const Eigen::MatrixXd& B);

// Stacks torques into U = [tau_r1, tau_l1, ...].
Eigen::VectorXd stackTorques(std::span<const TorquePair> torques);

}  // namespace mtsf
