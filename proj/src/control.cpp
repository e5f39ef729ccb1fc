#include "mtsf/control.hpp"

#include <cmath>
#include <sstream>

#include "mtsf/errors.hpp"

namespace mtsf {

const char* toString(TimeScaleMode mode) {
  return mode == TimeScaleMode::kThree ? "three_time_scale" : "multi_time_scale";
}

namespace {

void requireGain(double value, bool positive, const std::string& field) {
  if (!std::isfinite(value) || (positive && !(value > 0.0))) {
    throw ConfigError(field + (positive ? " must be positive and finite, got "
                                        : " must be finite, got ") +
                      std::to_string(value));
  }
}

std::size_t expectedEpsilons(TimeScaleMode mode, const GroupLayout& layout) {
  return mode == TimeScaleMode::kThree ? 2 : static_cast<std::size_t>(layout.groups()) + 1;
}

double product(const std::vector<double>& values, std::size_t count) {
  double p = 1.0;
  for (std::size_t k = 0; k < count; ++k) p *= values[k];
  return p;
}

}  // namespace

PdGains ControllerConfig::intraGains(int group) const {
  return intra.size() == 1 ? intra.front() : intra.at(group);
}

void ControllerConfig::validate(const GroupLayout& layout, bool require_positive_gains) const {
  const std::size_t want = expectedEpsilons(mode, layout);
  if (epsilons.size() != want) {
    throw ConfigError("controller.epsilons: " + std::string(toString(mode)) + " mode with " +
                      std::to_string(layout.groups()) + " groups needs " +
                      std::to_string(want) + " values, got " +
                      std::to_string(epsilons.size()));
  }
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    const double e = epsilons[k];
    if (!(e > 0.0 && e <= 1.0)) {
      throw ConfigError("controller.epsilons[" + std::to_string(k) + "] (epsilon_" +
                        std::to_string(k + 1) + ") must lie in (0, 1], got " +
                        std::to_string(e));
    }
  }
  if (intra.size() != 1 && intra.size() != static_cast<std::size_t>(layout.groups())) {
    throw ConfigError("controller.gains.intra must have 1 or " +
                      std::to_string(layout.groups()) + " entries");
  }
  for (std::size_t g = 0; g < intra.size(); ++g) {
    const std::string base = "controller.gains.intra[" + std::to_string(g) + "]";
    requireGain(intra[g].proportional, require_positive_gains, base + ".k1");
    requireGain(intra[g].derivative, require_positive_gains, base + ".k2");
  }
  requireGain(inter.proportional, require_positive_gains, "controller.gains.inter.k1");
  requireGain(inter.derivative, require_positive_gains, "controller.gains.inter.k2");
  requireGain(centroid.proportional, require_positive_gains, "controller.gains.centroid.k1");
  requireGain(centroid.derivative, require_positive_gains, "controller.gains.centroid.k2");

  if (!std::isfinite(coupling.fill)) throw ConfigError("controller.coupling.fill must be finite");
  const auto levels = controlLevels(*this, layout);
  auto known = [&](const std::string& name) {
    for (const auto& l : levels) {
      if (l.name == name) return true;
    }
    return false;
  };
  for (const auto& [key, value] : coupling.blocks) {
    const std::string label = "controller.coupling.blocks[\"" + key.first + "," + key.second + "\"]";
    if (!known(key.first) || !known(key.second)) {
      throw ConfigError(label + " names an unknown level");
    }
    if (key.first == key.second) throw ConfigError(label + " couples a level with itself");
    if (!std::isfinite(value)) throw ConfigError(label + " must be finite");
  }
  if (coupling.matrix) {
    const auto n = layout.dimension();
    if (coupling.matrix->rows() != n || coupling.matrix->cols() != n) {
      throw ConfigError("controller.coupling.matrix must be " + std::to_string(n) + "x" +
                        std::to_string(n));
    }
    if (!coupling.matrix->allFinite()) throw ConfigError("controller.coupling.matrix must be finite");
  }
}

std::vector<Level> controlLevels(const ControllerConfig& config, const GroupLayout& layout) {
  const int m = layout.groups();
  const auto& eps = config.epsilons;
  if (eps.size() != expectedEpsilons(config.mode, layout)) {
    throw ConfigError("controller.epsilons has the wrong length for the layout");
  }
  std::vector<Level> levels;
  if (config.mode == TimeScaleMode::kThree) {
    // A single intra level; per-group gains still apply row-wise in scaledGains.
    levels.push_back({"s", layout.allIntraBlock(), eps[0] * eps[1], config.intraGains(0)});
  } else {
    for (int g = 0; g < m; ++g) {
      const auto count = static_cast<std::size_t>(m - (g + 1) + 2);
      levels.push_back({std::to_string(g + 1), layout.intraBlock(g), product(eps, count),
                        config.intraGains(g)});
    }
  }
  if (m > 1) levels.push_back({"r", layout.interBlock(), eps[0], config.inter});
  levels.push_back({"c", layout.centroidBlock(), 1.0, config.centroid});
  return levels;
}

const Level& EffectiveGains::level(const std::string& name) const {
  for (const auto& l : levels) {
    if (l.name == name) return l;
  }
  throw ConfigError("unknown control level \"" + name + "\"");
}

Eigen::MatrixXd EffectiveGains::couplingBlock(const std::string& to,
                                              const std::string& from) const {
  const auto& a = level(to).rows;
  const auto& b = level(from).rows;
  return coupling.block(a.start, b.start, a.size, b.size);
}

EffectiveGains scaledGains(const ControllerConfig& config, const GroupLayout& layout) {
  for (std::size_t k = 0; k < config.epsilons.size(); ++k) {
    if (!(config.epsilons[k] > 0.0)) {
      throw ConfigError("controller.epsilons[" + std::to_string(k) +
                        "] must be positive (division by zero in gain scaling)");
    }
  }
  EffectiveGains out;
  out.levels = controlLevels(config, layout);
  const Eigen::Index n = layout.dimension();
  out.proportional.resize(n);
  out.derivative.resize(n);
  out.potential.resize(n);

  for (const auto& level : out.levels) {
    const double s = level.scale;
    level.rows.of(out.proportional).setConstant(level.base.proportional / (s * s));
    level.rows.of(out.derivative).setConstant(level.base.derivative / s);
    level.rows.of(out.potential).setConstant(1.0 / s);
  }
  // Per-group intra gains in three-time-scale mode share the level scale.
  if (config.mode == TimeScaleMode::kThree && config.intra.size() > 1) {
    const double s = out.levels.front().scale;
    for (int g = 0; g < layout.groups(); ++g) {
      const auto rows = layout.intraBlock(g);
      rows.of(out.proportional).setConstant(config.intra[g].proportional / (s * s));
      rows.of(out.derivative).setConstant(config.intra[g].derivative / s);
    }
  }

  if (config.coupling.matrix) {
    out.coupling = *config.coupling.matrix;
  } else {
    out.coupling = Eigen::MatrixXd::Constant(n, n, config.coupling.fill);
    for (const auto& [key, value] : config.coupling.blocks) {
      const auto& to = out.level(key.first).rows;
      const auto& from = out.level(key.second).rows;
      out.coupling.block(to.start, from.start, to.size, from.size).setConstant(value);
    }
  }
  for (const auto& level : out.levels) {
    out.coupling.block(level.rows.start, level.rows.start, level.rows.size, level.rows.size)
        .setZero();
  }
  return out;
}

Eigen::Vector2d CentroidTrajectory::position(double t) const {
  return origin + velocity * t +
         amplitude.cwiseProduct((frequency * t + phase).array().sin().matrix());
}

Eigen::Vector2d CentroidTrajectory::rate(double t) const {
  return velocity + amplitude.cwiseProduct(frequency).cwiseProduct(
                        (frequency * t + phase).array().cos().matrix());
}

Eigen::Vector2d CentroidTrajectory::acceleration(double t) const {
  return -amplitude.cwiseProduct(frequency.cwiseAbs2())
              .cwiseProduct((frequency * t + phase).array().sin().matrix());
}

DesiredFormation::Sample DesiredFormation::at(double t, const GroupLayout& layout) const {
  const Eigen::Index n = layout.dimension();
  Sample s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  layout.allIntraBlock().of(s.value) = intra;
  layout.interBlock().of(s.value) = inter;
  const auto c = layout.centroidBlock();
  c.of(s.value) = centroid.position(t);
  c.of(s.rate) = centroid.rate(t);
  c.of(s.acceleration) = centroid.acceleration(t);
  return s;
}

void DesiredFormation::validate(const GroupLayout& layout) const {
  if (intra.size() != layout.allIntraBlock().size) {
    throw ConfigError("formation.intra: expected " + std::to_string(layout.allIntraBlock().size) +
                      " values, got " + std::to_string(intra.size()));
  }
  if (inter.size() != layout.interBlock().size) {
    throw ConfigError("formation.inter: expected " + std::to_string(layout.interBlock().size) +
                      " values, got " + std::to_string(inter.size()));
  }
  if (!intra.allFinite() || !inter.allFinite()) {
    throw ConfigError("formation shape vectors must be finite");
  }
  const bool finite = centroid.origin.allFinite() && centroid.velocity.allFinite() &&
                      centroid.amplitude.allFinite() && centroid.frequency.allFinite() &&
                      centroid.phase.allFinite();
  if (!finite) throw ConfigError("formation.centroid parameters must be finite");
}

TransformedError TransformedError::from(const Eigen::VectorXd& z, const Eigen::VectorXd& z_rate,
                                        const DesiredFormation::Sample& desired) {
  if (z.size() != desired.value.size() || z_rate.size() != desired.rate.size()) {
    throw ShapeError("transformed state and desired formation dimensions differ");
  }
  return {z - desired.value, z_rate - desired.rate};
}

TransformedTerms transformedDynamicsTerms(const CbtMatrix& phi, const Eigen::MatrixXd& A,
                                          const Eigen::VectorXd& C) {
  const auto n = phi.matrix().rows();
  if (A.rows() != n || A.cols() != n || C.size() != n) {
    throw ShapeError("collective matrices do not match Phi_M dimension " + std::to_string(n));
  }
  return {phi.matrix() * A * phi.inverse(), phi.matrix() * C};
}

Eigen::VectorXd controlForces(const TransformedError& error, const Eigen::VectorXd& plant,
                              const DesiredFormation::Sample& desired,
                              const EffectiveGains& gains, const Eigen::VectorXd* potential) {
  const auto n = gains.proportional.size();
  if (error.value.size() != n || error.rate.size() != n || plant.size() != n ||
      desired.acceleration.size() != n) {
    throw ShapeError("control inputs do not match the layout dimension " + std::to_string(n));
  }
  if (!desired.acceleration.allFinite()) {
    throw ConfigError("desired trajectory acceleration is not finite");
  }
  return closedLoopErrorRhs(error, gains, potential) - plant + desired.acceleration;
}

Eigen::VectorXd controlForces(const TransformedError& error, const TransformedTerms& terms,
                              const DesiredFormation::Sample& desired,
                              const EffectiveGains& gains, const Eigen::VectorXd* potential) {
  if (error.rate.size() != terms.P.cols() || desired.rate.size() != terms.P.cols()) {
    throw ShapeError("P does not match the error dimension");
  }
  const Eigen::VectorXd z_rate = error.rate + desired.rate;
  return controlForces(error, Eigen::VectorXd(terms.P * z_rate + terms.R), desired, gains,
                       potential);
}

Eigen::VectorXd closedLoopErrorRhs(const TransformedError& error, const EffectiveGains& gains,
                                   const Eigen::VectorXd* potential) {
  const auto n = gains.proportional.size();
  if (error.value.size() != n || error.rate.size() != n) {
    throw ShapeError("error dimension does not match gains");
  }
  Eigen::VectorXd rhs = -gains.proportional.cwiseProduct(error.value) -
                        gains.derivative.cwiseProduct(error.rate) -
                        gains.coupling * error.rate;
  if (potential != nullptr) {
    if (potential->size() != n) throw ShapeError("F_pot dimension does not match gains");
    rhs += gains.potential.cwiseProduct(*potential);
  }
  return rhs;
}

std::vector<TorquePair> torquesFromForces(const Eigen::VectorXd& forces, const CbtMatrix& phi,
                                          const Eigen::MatrixXd& B) {
  const auto n = phi.matrix().rows();
  if (forces.size() != n || B.rows() != n || B.cols() != n) {
    throw ShapeError("force vector or B does not match Phi_M dimension " + std::to_string(n));
  }
  const Eigen::VectorXd w = phi.inverse() * forces;
  std::vector<TorquePair> out;
  out.reserve(n / 2);
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const Eigen::Matrix2d b = B.block<2, 2>(2 * i, 2 * i);
    const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    if (!(std::abs(det) >= 1e-12)) throw SingularActuation(static_cast<int>(i), std::abs(det));
    const Eigen::Vector2d f = w.segment<2>(2 * i);
    out.push_back({( b(1, 1) * f.x() - b(0, 1) * f.y()) / det,
                   (-b(1, 0) * f.x() + b(0, 0) * f.y()) / det});
  }
  return out;
}

Eigen::VectorXd stackTorques(std::span<const TorquePair> torques) {
  Eigen::VectorXd u(2 * static_cast<Eigen::Index>(torques.size()));
  for (std::size_t i = 0; i < torques.size(); ++i) {
    u(2 * i) = torques[i].right;
    u(2 * i + 1) = torques[i].left;
  }
  return u;
}

}  // namespace mtsf
