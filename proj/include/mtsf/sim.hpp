#pragma once

// Fixed-step closed-loop simulation, trajectory logging and convergence
// measurements.
//
// The integrated state is flat: [p (2N), v (2N), theta (N), omega (N)].

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtsf/cbt.hpp"
#include "mtsf/control.hpp"
#include "mtsf/scenario.hpp"

namespace mtsf {

using Rhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// Classical fixed-step updates. Throw IntegrationError when any stage
// derivative is non-finite. `k1`, when given, is f(t, x) already evaluated.
Eigen::VectorXd rk4Step(const Rhs& f, double t, const Eigen::VectorXd& x, double dt,
                        const Eigen::VectorXd* k1 = nullptr);
Eigen::VectorXd eulerStep(const Rhs& f, double t, const Eigen::VectorXd& x, double dt,
                          const Eigen::VectorXd* k1 = nullptr);
Eigen::VectorXd integrateStep(Integrator method, const Rhs& f, double t,
                              const Eigen::VectorXd& x, double dt,
                              const Eigen::VectorXd* k1 = nullptr);

Eigen::VectorXd packState(const std::vector<RobotState>& robots);
std::vector<RobotState> unpackState(const Eigen::VectorXd& x);

// Magnitudes (2-norms) of the individual terms of the transformed control law.
struct TermNorms {
  double feedback = 0.0;      // K1 Z_e + K2 Z_e'
  double coupling = 0.0;      // Kbar Z_e'
  double cancellation = 0.0;  // P Z' + R
  double feedforward = 0.0;   // Z_d''
  double potential = 0.0;     // k_pot F_pot
};

// The coupled robots under the transformed controller.
class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& scenario);

  struct Evaluation {
    Eigen::VectorXd rate;     // flat state derivative
    Eigen::VectorXd z;        // Z
    TransformedError error;   // Z - Z_d, Z' - Z_d'
    Eigen::VectorXd torques;  // [tau_r1, tau_l1, ...]
    TermNorms terms;
  };

  Evaluation evaluate(double t, const Eigen::VectorXd& x) const;
  Eigen::VectorXd derivative(double t, const Eigen::VectorXd& x) const {
    return evaluate(t, x).rate;
  }

  const CbtMatrix& phi() const { return phi_; }
  const EffectiveGains& gains() const { return gains_; }

 private:
  GroupLayout layout_;
  RobotParams robot_;
  CbtMatrix phi_;
  EffectiveGains gains_;
  DesiredFormation formation_;
  std::optional<PotentialParams> potential_;
};

struct MinDistance {
  double distance = 0.0;  // +inf when fewer than two robots or no samples
  int first = -1;
  int second = -1;
  double time = 0.0;
};

struct TrajectoryLog {
  GroupLayout layout{std::vector<int>{2}};
  std::vector<double> time;
  std::vector<Eigen::VectorXd> state;       // flat robot state
  std::vector<Eigen::VectorXd> z;           // Z
  std::vector<Eigen::VectorXd> error;       // Z_e
  std::vector<Eigen::VectorXd> error_rate;  // Z_e'
  std::vector<Eigen::VectorXd> torques;
  std::vector<double> min_distance;         // closest pair at each sample
  std::vector<TermNorms> terms;
  // Closest approach over every integration step, not only recorded ones.
  std::optional<MinDistance> step_minimum;

  std::size_t size() const { return time.size(); }
  bool empty() const { return time.empty(); }
  // Appends one sample; the caller keeps the time grid uniform.
  void append(double t, const Eigen::VectorXd& x, const ClosedLoop::Evaluation& e);
  // Throws IntegrationError on a non-finite entry or non-monotone time.
  void validate() const;
};

// Integrates the scenario from its initial state over the horizon. Aborts with
// BarrierViolation if a pair reaches r_safe while the potential is enabled,
// and with IntegrationError on non-finite state; the message carries the time.
TrajectoryLog runScenario(const Scenario& scenario);

struct LevelSettling {
  std::string level;
  double initial_norm = 0.0;
  double tolerance = 0.0;
  std::optional<double> time;  // absent when the level never settles
};

struct SettlingReport {
  std::vector<LevelSettling> levels;  // control levels, fastest first
  LevelSettling intra;                // all intra rows together
  std::optional<LevelSettling> inter; // absent for a single group
  LevelSettling centroid;
  std::optional<double> ratio_inter_intra;     // t_r / t_intra
  std::optional<double> ratio_centroid_inter;  // t_c / t_r
};

// Per-level position-error norms |Z_e| over the log. The tolerance is
// max(fraction * initial norm, floor).
SettlingReport settlingTimes(const TrajectoryLog& log, const ControllerConfig& controller,
                             double fraction = 0.02, double floor = 1e-9);

// Minimum pairwise distance over the recorded samples.
MinDistance minPairDistance(const TrajectoryLog& log);

// Integrates Z_e'' = -K1 Z_e - (K2 + Kbar) Z_e' with RK4 from the given
// initial error, returning Z_e at every recorded step.
std::vector<Eigen::VectorXd> linearErrorTrajectory(const EffectiveGains& gains,
                                                   const Eigen::VectorXd& e0,
                                                   const Eigen::VectorXd& de0, double dt,
                                                   int steps, int record_stride = 1);

}  // namespace mtsf
