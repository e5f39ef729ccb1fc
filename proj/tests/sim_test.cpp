#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "mtsf/errors.hpp"
#include "mtsf/sim.hpp"

using namespace mtsf;

namespace {

Scenario reference() { return loadScenario(std::string(MTSF_SCENARIO_DIR) + "/paper_fig2.json"); }

// Places every robot exactly on the desired formation at t = 0 with the
// desired rates, so the transformed error starts (and should stay) at zero.
void presettle(Scenario& s) {
  const CbtMatrix phi(s.layout);
  const auto desired = s.formation.at(0.0, s.layout);
  const Eigen::VectorXd x = phi.fromTransformed(desired.value);
  const Eigen::VectorXd v = phi.fromTransformed(desired.rate);
  for (int i = 0; i < s.layout.robots(); ++i) {
    s.initial[i].position = x.segment<2>(2 * i);
    s.initial[i].velocity = v.segment<2>(2 * i);
  }
}

double maxNorm(const std::vector<Eigen::VectorXd>& rows) {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, r.cwiseAbs().maxCoeff());
  return m;
}

// The heading rate is not controlled and grows with the intra gains, so the
// stable step shrinks with the fastest scale well below the validation guard.
double stableStep(const Scenario& s) { return std::min(1e-4, 0.01 * s.minScale()); }

Scenario pair(double separation) {
  Scenario s;
  s.name = "pair";
  s.layout = GroupLayout({2});
  s.controller.epsilons = {1.0, 1.0};
  s.formation.intra = Eigen::Vector2d(separation / std::sqrt(2.0), 0.0);
  s.formation.inter = Eigen::VectorXd(0);
  s.initial.resize(2);
  s.initial[1].position = {separation, 0.0};
  s.sim.dt = 1e-3;
  s.sim.horizon = 1.0;
  return s;
}

}  // namespace

TEST(Integrator, ZeroDynamicsUnchanged) {
  const Rhs f = [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()); };
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, -1.0, 3.0);
  EXPECT_EQ(rk4Step(f, 0.0, x, 0.1), x);
  EXPECT_EQ(eulerStep(f, 0.0, x, 0.1), x);
}

TEST(Integrator, ExponentialDecay) {
  const Rhs f = [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); };
  Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  for (int k = 0; k < 100; ++k) x = rk4Step(f, 0.01 * k, x, 0.01);
  EXPECT_NEAR(x(0), std::exp(-1.0), 1e-8);
}

TEST(Integrator, FourthOrderConvergence) {
  const Rhs f = [](double t, const Eigen::VectorXd& x) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(1, std::cos(t)) - x);
  };
  // x' = cos t - x, x(0) = 0 has x = (cos t + sin t - e^-t) / 2.
  auto errorAt = [&](double dt) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    const int n = static_cast<int>(std::lround(2.0 / dt));
    for (int k = 0; k < n; ++k) x = rk4Step(f, k * dt, x, dt);
    return std::abs(x(0) - 0.5 * (std::cos(2.0) + std::sin(2.0) - std::exp(-2.0)));
  };
  const double ratio = errorAt(0.1) / errorAt(0.05);
  EXPECT_NEAR(ratio, 16.0, 1.5);
}

TEST(Integrator, NonFiniteStageThrows) {
  const Rhs f = [](double, const Eigen::VectorXd& x) {
    return Eigen::VectorXd(x.array() / (x.array() - 1.0));
  };
  EXPECT_THROW(rk4Step(f, 0.0, Eigen::VectorXd::Ones(1), 0.1), IntegrationError);
  EXPECT_THROW(integrateStep(Integrator::kEuler, f, 0.0, Eigen::VectorXd::Ones(1), 0.1),
               IntegrationError);
}

TEST(State, PackUnpackRoundtrip) {
  std::vector<RobotState> robots(3);
  for (int i = 0; i < 3; ++i) {
    robots[i].position = {i + 0.5, -i * 2.0};
    robots[i].velocity = {i * 0.1, 7.0};
    robots[i].heading = 0.3 * i;
    robots[i].angular_rate = -i;
  }
  const Eigen::VectorXd x = packState(robots);
  ASSERT_EQ(x.size(), 18);
  EXPECT_EQ(x(2), 1.5);
  EXPECT_EQ(x(6 + 5), 7.0);
  EXPECT_EQ(x(12 + 2), 0.6);
  const auto back = unpackState(x);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].position, robots[i].position);
    EXPECT_EQ(back[i].velocity, robots[i].velocity);
    EXPECT_EQ(back[i].heading, robots[i].heading);
    EXPECT_EQ(back[i].angular_rate, robots[i].angular_rate);
  }
  EXPECT_THROW(unpackState(Eigen::VectorXd::Zero(7)), ShapeError);
}

TEST(RunScenario, PreSettledFormationStaysSettled) {
  Scenario s = reference();
  presettle(s);
  EXPECT_TRUE(s.initial[0].velocity.isApprox(Eigen::Vector2d(1.0, 3.0), 1e-12));
  s.sim.horizon = 1.0;
  const auto log = runScenario(s);
  EXPECT_LE(maxNorm(log.error), 1e-9);
  EXPECT_LE(maxNorm(log.error_rate), 1e-9);
  const auto settling = settlingTimes(log, s.controller, 0.02, 1e-9);
  ASSERT_TRUE(settling.intra.time);
  EXPECT_EQ(*settling.intra.time, 0.0);
  ASSERT_TRUE(settling.centroid.time);
  EXPECT_EQ(*settling.centroid.time, 0.0);
}

TEST(RunScenario, PotentialIsInertWhenRobotsAreFarApart) {
  Scenario s = reference();
  presettle(s);
  s.sim.horizon = 0.5;
  const auto off = runScenario(s);
  s.sim.potential_enabled = true;
  const auto on = runScenario(s);
  ASSERT_EQ(on.size(), off.size());
  for (std::size_t k = 0; k < on.size(); ++k) EXPECT_EQ(on.state[k], off.state[k]);
  for (const auto& t : on.terms) EXPECT_EQ(t.potential, 0.0);
}

TEST(RunScenario, ZeroHorizonGivesEmptyLog) {
  Scenario s = reference();
  s.sim.horizon = 0.0;
  EXPECT_TRUE(runScenario(s).empty());
}

TEST(RunScenario, Deterministic) {
  Scenario s = reference();
  s.sim.horizon = 0.2;
  const auto a = runScenario(s);
  const auto b = runScenario(s);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a.state[k], b.state[k]);
    EXPECT_EQ(a.torques[k], b.torques[k]);
  }
}

TEST(RunScenario, RecordsStrideAndFinalStep) {
  Scenario s = reference();
  s.sim.horizon = 0.0105;
  s.sim.record_stride = 10;
  const auto log = runScenario(s);
  // 105 steps: samples at 0, 10, ..., 100 and the final step.
  ASSERT_EQ(log.size(), 12u);
  EXPECT_DOUBLE_EQ(log.time[1], 1e-3);
  EXPECT_NEAR(log.time.back(), 0.0105, 1e-15);
  EXPECT_NO_THROW(log.validate());
}

TEST(RunScenario, BarrierViolationAborts) {
  Scenario s = pair(0.6);
  s.sim.potential_enabled = true;
  s.initial[0].velocity = {100.0, 0.0};
  s.initial[1].velocity = {-100.0, 0.0};
  try {
    runScenario(s);
    FAIL() << "expected BarrierViolation";
  } catch (const BarrierViolation& e) {
    EXPECT_LE(e.distance(), 0.5);
    EXPECT_NE(std::string(e.what()).find("t = "), std::string::npos);
  }
}

TEST(RunScenario, PairMinimumDistance) {
  Scenario s = pair(5.0);
  const auto log = runScenario(s);
  const auto m = minPairDistance(log);
  EXPECT_NEAR(m.distance, 5.0, 1e-9);
  EXPECT_EQ(m.first, 0);
  EXPECT_EQ(m.second, 1);
  ASSERT_TRUE(log.step_minimum);
  EXPECT_NEAR(log.step_minimum->distance, 5.0, 1e-9);
}

TEST(Settling, ReportsNeverSettledLevel) {
  Scenario s = reference();
  s.sim.horizon = 0.05;
  const auto log = runScenario(s);
  const auto settling = settlingTimes(log, s.controller);
  EXPECT_FALSE(settling.centroid.time.has_value());
  EXPECT_FALSE(settling.ratio_centroid_inter.has_value());
  EXPECT_GT(settling.centroid.initial_norm, 0.0);
}

TEST(RunScenario, MatchesLinearErrorOracle) {
  Scenario s = reference();
  s.sim.horizon = 0.3;
  s.sim.record_stride = 1;
  const auto log = runScenario(s);
  const ClosedLoop loop(s);
  const int steps = static_cast<int>(log.size()) - 1;
  const auto linear = linearErrorTrajectory(loop.gains(), log.error.front(),
                                            log.error_rate.front(), s.sim.dt, steps);
  ASSERT_EQ(linear.size(), log.size());
  const double scale = log.error.front().norm();
  double worst = 0.0;
  for (std::size_t k = 0; k < log.size(); ++k) {
    worst = std::max(worst, (linear[k] - log.error[k]).norm() / scale);
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(TimeScales, HalvingEpsilonsRescalesSettling) {
  auto measure = [](double eps) {
    Scenario s = reference();
    s.controller.epsilons = {eps, eps};
    s.sim.dt = stableStep(s);
    s.sim.record_stride = static_cast<int>(std::lround(1e-3 / s.sim.dt));
    const auto log = runScenario(s);
    return settlingTimes(log, s.controller);
  };
  const auto base = measure(0.1);
  const auto half = measure(0.05);
  ASSERT_TRUE(base.intra.time && half.intra.time);
  ASSERT_TRUE(base.inter && half.inter && base.inter->time && half.inter->time);
  ASSERT_TRUE(base.centroid.time && half.centroid.time);
  EXPECT_NEAR(*half.intra.time / *base.intra.time, 0.25, 0.05);
  EXPECT_NEAR(*half.inter->time / *base.inter->time, 0.5, 0.05);
  EXPECT_NEAR(*half.centroid.time / *base.centroid.time, 1.0, 0.25);
}

TEST(TimeScales, OrderingHoldsOverEpsilonGrid) {
  for (double e1 : {0.05, 0.1, 0.2}) {
    for (double e2 : {0.05, 0.1, 0.2}) {
      Scenario s = reference();
      s.controller.epsilons = {e1, e2};
      s.sim.dt = stableStep(s);
      s.sim.horizon = 20.0;
      s.sim.record_stride = static_cast<int>(std::lround(1e-3 / s.sim.dt));
      const auto r = settlingTimes(runScenario(s), s.controller);
      ASSERT_TRUE(r.intra.time && r.inter && r.inter->time && r.centroid.time)
          << e1 << ", " << e2;
      EXPECT_LT(*r.intra.time, *r.inter->time) << e1 << ", " << e2;
      EXPECT_LT(*r.inter->time, *r.centroid.time) << e1 << ", " << e2;
    }
  }
}
