#include "mtsf/sim.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mtsf/errors.hpp"
#include "mtsf/potential.hpp"

namespace mtsf {

namespace {

void requireFinite(const Eigen::VectorXd& v, double t, const char* what) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at t = " << t << " s";
    throw IntegrationError(msg.str());
  }
}

}  // namespace

Eigen::VectorXd rk4Step(const Rhs& f, double t, const Eigen::VectorXd& x, double dt,
                        const Eigen::VectorXd* k1) {
  const Eigen::VectorXd a = k1 ? *k1 : f(t, x);
  requireFinite(a, t, "derivative");
  const Eigen::VectorXd b = f(t + 0.5 * dt, x + 0.5 * dt * a);
  requireFinite(b, t, "derivative");
  const Eigen::VectorXd c = f(t + 0.5 * dt, x + 0.5 * dt * b);
  requireFinite(c, t, "derivative");
  const Eigen::VectorXd d = f(t + dt, x + dt * c);
  requireFinite(d, t, "derivative");
  return x + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
}

Eigen::VectorXd eulerStep(const Rhs& f, double t, const Eigen::VectorXd& x, double dt,
                          const Eigen::VectorXd* k1) {
  const Eigen::VectorXd a = k1 ? *k1 : f(t, x);
  requireFinite(a, t, "derivative");
  return x + dt * a;
}

Eigen::VectorXd integrateStep(Integrator method, const Rhs& f, double t,
                              const Eigen::VectorXd& x, double dt, const Eigen::VectorXd* k1) {
  return method == Integrator::kRk4 ? rk4Step(f, t, x, dt, k1) : eulerStep(f, t, x, dt, k1);
}

Eigen::VectorXd packState(const std::vector<RobotState>& robots) {
  const auto n = static_cast<Eigen::Index>(robots.size());
  Eigen::VectorXd x(6 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = robots[static_cast<std::size_t>(i)];
    x.segment<2>(2 * i) = r.position;
    x.segment<2>(2 * n + 2 * i) = r.velocity;
    x(4 * n + i) = r.heading;
    x(5 * n + i) = r.angular_rate;
  }
  return x;
}

std::vector<RobotState> unpackState(const Eigen::VectorXd& x) {
  if (x.size() % 6 != 0) throw ShapeError("flat state length must be a multiple of 6");
  const Eigen::Index n = x.size() / 6;
  std::vector<RobotState> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& r = out[static_cast<std::size_t>(i)];
    r.position = x.segment<2>(2 * i);
    r.velocity = x.segment<2>(2 * n + 2 * i);
    r.heading = x(4 * n + i);
    r.angular_rate = x(5 * n + i);
  }
  return out;
}

ClosedLoop::ClosedLoop(const Scenario& scenario)
    : layout_(scenario.layout),
      robot_(scenario.robot),
      phi_(scenario.layout),
      gains_(scaledGains(scenario.controller, scenario.layout)),
      formation_(scenario.formation) {
  if (scenario.sim.potential_enabled) potential_ = scenario.potential;
}

ClosedLoop::Evaluation ClosedLoop::evaluate(double t, const Eigen::VectorXd& x) const {
  const Eigen::Index n = layout_.robots();
  if (x.size() != 6 * n) throw ShapeError("flat state does not match the layout");
  const auto positions = x.segment(0, 2 * n);
  const auto velocities = x.segment(2 * n, 2 * n);

  // Plant drift A X' + C and the actuation blocks, robot by robot.
  Eigen::VectorXd drift(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto m = robotMatrices(x(4 * n + i), x(5 * n + i), robot_);
    drift.segment<2>(2 * i) = m.A * velocities.segment<2>(2 * i) + m.C;
  }

  Evaluation out;
  out.z = phi_.matrix() * positions;
  const Eigen::VectorXd z_rate = phi_.matrix() * velocities;
  const auto desired = formation_.at(t, layout_);
  out.error = TransformedError::from(out.z, z_rate, desired);

  Eigen::VectorXd f_pot;
  if (potential_) f_pot = transformedPotential(positions, phi_, *potential_).transformed;

  const Eigen::VectorXd plant = phi_.matrix() * drift;
  const Eigen::VectorXd rhs = closedLoopErrorRhs(out.error, gains_, potential_ ? &f_pot : nullptr);
  const Eigen::VectorXd forces = rhs - plant + desired.acceleration;

  out.terms.feedback = (gains_.proportional.cwiseProduct(out.error.value) +
                        gains_.derivative.cwiseProduct(out.error.rate)).norm();
  out.terms.coupling = (gains_.coupling * out.error.rate).norm();
  out.terms.cancellation = plant.norm();
  out.terms.feedforward = desired.acceleration.norm();
  if (potential_) out.terms.potential = gains_.potential.cwiseProduct(f_pot).norm();

  const Eigen::VectorXd stacked = phi_.inverse() * forces;
  out.torques.resize(2 * n);
  out.rate.resize(6 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double theta = x(4 * n + i);
    const TorquePair u =
        solveTorques(theta, stacked.segment<2>(2 * i), robot_, static_cast<int>(i));
    out.torques(2 * i) = u.right;
    out.torques(2 * i + 1) = u.left;
    const RobotState s{positions.segment<2>(2 * i), velocities.segment<2>(2 * i), theta,
                       x(5 * n + i)};
    const RobotRates r = robotDerivative(s, u, robot_);
    out.rate.segment<2>(2 * i) = r.position_rate;
    out.rate.segment<2>(2 * n + 2 * i) = r.acceleration;
    out.rate(4 * n + i) = r.heading_rate;
    out.rate(5 * n + i) = r.angular_acceleration;
  }
  return out;
}

void TrajectoryLog::append(double t, const Eigen::VectorXd& x, const ClosedLoop::Evaluation& e) {
  time.push_back(t);
  state.push_back(x);
  z.push_back(e.z);
  error.push_back(e.error.value);
  error_rate.push_back(e.error.rate);
  torques.push_back(e.torques);
  min_distance.push_back(closestPair(x.head(layout.dimension())).distance);
  terms.push_back(e.terms);
}

void TrajectoryLog::validate() const {
  const std::size_t n = time.size();
  if (state.size() != n || z.size() != n || error.size() != n || error_rate.size() != n ||
      torques.size() != n || min_distance.size() != n || terms.size() != n) {
    throw ShapeError("trajectory log columns have different lengths");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && !(time[k] > time[k - 1])) {
      throw IntegrationError("log time is not monotone at row " + std::to_string(k + 1));
    }
    const auto& tn = terms[k];
    const bool finite = std::isfinite(time[k]) && state[k].allFinite() && z[k].allFinite() &&
                        error[k].allFinite() && error_rate[k].allFinite() &&
                        torques[k].allFinite() && !std::isnan(min_distance[k]) &&
                        std::isfinite(tn.feedback + tn.coupling + tn.cancellation +
                                      tn.feedforward + tn.potential);
    if (!finite) {
      throw IntegrationError("non-finite log entry at row " + std::to_string(k + 1));
    }
  }
}

TrajectoryLog runScenario(const Scenario& scenario) {
  scenario.validate();
  const ClosedLoop loop(scenario);
  const auto& sim = scenario.sim;
  const Rhs f = [&loop](double t, const Eigen::VectorXd& x) { return loop.derivative(t, x); };

  TrajectoryLog log;
  log.layout = scenario.layout;
  const auto steps = static_cast<long long>(std::llround(sim.horizon / sim.dt));
  if (steps <= 0) return log;

  const Eigen::Index dim = scenario.layout.dimension();
  const double r_safe = scenario.potential.safe_distance;
  Eigen::VectorXd x = packState(scenario.initial);
  MinDistance closest{std::numeric_limits<double>::infinity(), -1, -1, 0.0};

  for (long long k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * sim.dt;
    requireFinite(x, t, "state");

    const PairDistance pair = closestPair(x.head(dim));
    if (pair.distance < closest.distance) closest = {pair.distance, pair.first, pair.second, t};
    if (sim.potential_enabled && pair.distance <= r_safe) {
      throw BarrierViolation(pair.first, pair.second, pair.distance, t);
    }

    ClosedLoop::Evaluation e;
    try {
      e = loop.evaluate(t, x);
    } catch (const BarrierViolation& v) {
      throw BarrierViolation(v.first(), v.second(), v.distance(), t);
    }
    requireFinite(e.rate, t, "derivative");
    if (k % sim.record_stride == 0 || k == steps) log.append(t, x, e);
    if (k == steps) break;

    try {
      x = integrateStep(sim.integrator, f, t, x, sim.dt, &e.rate);
    } catch (const BarrierViolation& v) {
      throw BarrierViolation(v.first(), v.second(), v.distance(), t);
    } catch (const IntegrationError& err) {
      // Stage failures usually mean dt is too coarse for the heading rate.
      std::ostringstream msg;
      msg << err.what() << " in the step from t = " << t << " s (dt = " << sim.dt
          << " s; try a smaller dt)";
      throw IntegrationError(msg.str());
    }
  }
  log.step_minimum = closest;
  return log;
}

namespace {

LevelSettling settle(const TrajectoryLog& log, const std::string& name, const RowBlock& rows,
                     double fraction, double floor) {
  LevelSettling out;
  out.level = name;
  if (log.empty()) return out;
  std::vector<double> norms(log.size());
  for (std::size_t k = 0; k < log.size(); ++k) norms[k] = rows.of(log.error[k]).norm();
  out.initial_norm = norms.front();
  out.tolerance = std::max(fraction * out.initial_norm, floor);
  std::size_t last = norms.size();
  for (std::size_t k = norms.size(); k-- > 0;) {
    if (norms[k] > out.tolerance) {
      last = k;
      break;
    }
  }
  if (last == norms.size()) {
    out.time = log.time.front();
  } else if (last + 1 < norms.size()) {
    out.time = log.time[last + 1];
  }
  return out;
}

std::optional<double> ratio(const LevelSettling& num, const LevelSettling& den) {
  if (!num.time || !den.time || !(*den.time > 0.0)) return std::nullopt;
  return *num.time / *den.time;
}

}  // namespace

SettlingReport settlingTimes(const TrajectoryLog& log, const ControllerConfig& controller,
                             double fraction, double floor) {
  const auto& layout = log.layout;
  SettlingReport out;
  for (const auto& level : controlLevels(controller, layout)) {
    out.levels.push_back(settle(log, level.name, level.rows, fraction, floor));
  }
  out.intra = settle(log, "intra", layout.allIntraBlock(), fraction, floor);
  if (layout.groups() > 1) {
    out.inter = settle(log, "r", layout.interBlock(), fraction, floor);
  }
  out.centroid = settle(log, "c", layout.centroidBlock(), fraction, floor);
  if (out.inter) {
    out.ratio_inter_intra = ratio(*out.inter, out.intra);
    out.ratio_centroid_inter = ratio(out.centroid, *out.inter);
  }
  return out;
}

MinDistance minPairDistance(const TrajectoryLog& log) {
  MinDistance best{std::numeric_limits<double>::infinity(), -1, -1, 0.0};
  const Eigen::Index dim = log.layout.dimension();
  for (std::size_t k = 0; k < log.size(); ++k) {
    const PairDistance p = closestPair(log.state[k].head(dim));
    if (p.distance < best.distance) best = {p.distance, p.first, p.second, log.time[k]};
  }
  return best;
}

std::vector<Eigen::VectorXd> linearErrorTrajectory(const EffectiveGains& gains,
                                                   const Eigen::VectorXd& e0,
                                                   const Eigen::VectorXd& de0, double dt,
                                                   int steps, int record_stride) {
  const Eigen::Index n = e0.size();
  if (de0.size() != n || gains.proportional.size() != n) {
    throw ShapeError("initial error does not match the gain dimension");
  }
  if (record_stride < 1) throw ConfigError("record_stride must be at least 1");
  const Eigen::MatrixXd damping =
      Eigen::MatrixXd(gains.derivative.asDiagonal()) + gains.coupling;
  const Rhs f = [&](double, const Eigen::VectorXd& s) {
    Eigen::VectorXd out(2 * n);
    out.head(n) = s.tail(n);
    out.tail(n) = -gains.proportional.cwiseProduct(s.head(n)) - damping * s.tail(n);
    return out;
  };
  Eigen::VectorXd s(2 * n);
  s << e0, de0;
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k <= steps; ++k) {
    if (k % record_stride == 0 || k == steps) out.push_back(s.head(n));
    if (k == steps) break;
    s = rk4Step(f, k * dt, s, dt);
  }
  return out;
}

}  // namespace mtsf
