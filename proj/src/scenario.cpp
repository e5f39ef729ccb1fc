#include "mtsf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mtsf/errors.hpp"

namespace mtsf {

using nlohmann::json;

const char* toString(Integrator integrator) {
  return integrator == Integrator::kRk4 ? "rk4" : "euler";
}

void SimConfig::validate(double sigma_min) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("sim.dt must be positive, got " + std::to_string(dt));
  }
  if (dt > 0.2 * sigma_min) {
    std::ostringstream msg;
    msg << "sim.dt = " << dt << " exceeds 0.2 * smallest time-scale product (" << 0.2 * sigma_min
        << ")";
    throw ConfigError(msg.str());
  }
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("sim.horizon must be nonnegative, got " + std::to_string(horizon));
  }
  if (!(settling_fraction > 0.0 && settling_fraction < 1.0)) {
    throw ConfigError("sim.settling_fraction must lie in (0, 1)");
  }
  if (!(settling_floor >= 0.0) || !std::isfinite(settling_floor)) {
    throw ConfigError("sim.settling_floor must be nonnegative");
  }
  if (record_stride < 1) throw ConfigError("sim.record_stride must be at least 1");
}

double Scenario::minScale() const {
  double s = 1.0;
  for (const auto& level : controlLevels(controller, layout)) s = std::min(s, level.scale);
  return s;
}

void Scenario::validate(bool require_positive_gains) const {
  robot.validate();
  controller.validate(layout, require_positive_gains);
  formation.validate(layout);
  potential.validate();
  const CbtMatrix phi(layout);  // throws on an ill-conditioned transformation

  if (initial.size() != static_cast<std::size_t>(layout.robots())) {
    throw ConfigError("initial: expected " + std::to_string(layout.robots()) +
                      " robot states, got " + std::to_string(initial.size()));
  }
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const auto& s = initial[i];
    if (!s.position.allFinite() || !s.velocity.allFinite() || !std::isfinite(s.heading) ||
        !std::isfinite(s.angular_rate)) {
      throw ConfigError("initial state of robot " + std::to_string(i + 1) + " is not finite");
    }
  }
  if (sim.potential_enabled) {
    Eigen::VectorXd x(layout.dimension());
    for (std::size_t i = 0; i < initial.size(); ++i) {
      x.segment<2>(2 * static_cast<Eigen::Index>(i)) = initial[i].position;
    }
    const PairDistance p = closestPair(x);
    if (p.distance <= potential.safe_distance) {
      std::ostringstream msg;
      msg << "initial: robots " << p.first + 1 << " and " << p.second + 1 << " start "
          << p.distance << " m apart, inside potential.safe_distance";
      throw ConfigError(msg.str());
    }
  }
  sim.validate(minScale());

  for (std::size_t k = 0; k < stability.weights.size(); ++k) {
    const double d = stability.weights[k];
    if (!(d > 0.0 && d < 1.0)) {
      throw ConfigError("stability.weights[" + std::to_string(k) + "] must lie in (0, 1)");
    }
  }
  if (!(stability.epsilon_cap > 0.0)) throw ConfigError("stability.epsilon_cap must be positive");
  if (!(stability.fallback_fraction > 0.0 && stability.fallback_fraction < 1.0)) {
    throw ConfigError("stability.fallback_fraction must lie in (0, 1)");
  }
}

Eigen::VectorXd equilateralPoints(double side) {
  const double h = side * std::sqrt(3.0) / 2.0;
  Eigen::VectorXd p(6);
  p << side / 2.0, -h / 3.0, -side / 2.0, -h / 3.0, 0.0, 2.0 * h / 3.0;
  return p;
}

namespace {

void checkKeys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) {
      throw ConfigError("unknown key \"" + item.key() + "\" in " + path);
    }
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + " must be a number");
  return j.get<double>();
}

double numberOr(const json& parent, const char* key, const std::string& path, double fallback) {
  return parent.contains(key) ? number(parent.at(key), path + "." + key) : fallback;
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + " must be true or false");
  return j.get<bool>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

Eigen::VectorXd vector(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::Vector2d pair(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  if (v.size() != 2) throw ConfigError(path + " must have 2 entries");
  return {v[0], v[1]};
}

Eigen::VectorXd pointList(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + " must be an array of [x, y] pairs");
  Eigen::VectorXd out(2 * static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.segment<2>(2 * static_cast<Eigen::Index>(k)) =
        pair(j[k], path + "[" + std::to_string(k) + "]");
  }
  return out;
}

PdGains gains(const json& j, const std::string& path) {
  checkKeys(j, path, {"k1", "k2"});
  PdGains g;
  g.proportional = numberOr(j, "k1", path, g.proportional);
  g.derivative = numberOr(j, "k2", path, g.derivative);
  return g;
}

// Shape variables of `count` points from a generator string, a vector or a
// point list.
Eigen::VectorXd shape(const json& j, int count, const std::string& path) {
  const auto want = static_cast<Eigen::Index>(2 * (count - 1));
  if (j.is_string()) {
    static const std::regex pattern(R"(\s*equilateral\s+side\s*=\s*([-+0-9.eE]+)\s*)");
    std::smatch m;
    const std::string text = j.get<std::string>();
    if (!std::regex_match(text, m, pattern)) {
      throw ConfigError(path + ": unknown generator \"" + text +
                        "\" (expected \"equilateral side=<b>\")");
    }
    double side = 0.0;
    try {
      side = std::stod(m[1].str());
    } catch (const std::exception&) {
      throw ConfigError(path + ": side is not a number");
    }
    if (!(side > 0.0) || !std::isfinite(side)) throw ConfigError(path + ": side must be positive");
    if (count != 3) {
      throw ConfigError(path + ": equilateral generator needs 3 points, the level has " +
                        std::to_string(count));
    }
    return shapeVariablesOf(equilateralPoints(side));
  }
  checkKeys(j, path, {"vector", "points"});
  if (j.contains("vector") == j.contains("points")) {
    throw ConfigError(path + " must give exactly one of \"vector\" or \"points\"");
  }
  if (j.contains("vector")) {
    Eigen::VectorXd v = vector(j.at("vector"), path + ".vector");
    if (v.size() != want) {
      throw ConfigError(path + ".vector: expected " + std::to_string(want) + " values, got " +
                        std::to_string(v.size()));
    }
    return v;
  }
  const Eigen::VectorXd pts = pointList(j.at("points"), path + ".points");
  if (pts.size() != 2 * count) {
    throw ConfigError(path + ".points: expected " + std::to_string(count) + " points");
  }
  return shapeVariablesOf(pts);
}

Eigen::VectorXd intraShape(const json& j, const GroupLayout& layout) {
  const std::string path = "formation.intra";
  Eigen::VectorXd out(layout.allIntraBlock().size);
  // A single vector spanning every group is accepted as-is.
  if (j.is_object() && j.contains("vector") && j.at("vector").is_array() &&
      static_cast<Eigen::Index>(j.at("vector").size()) == out.size() && layout.groups() > 1) {
    checkKeys(j, path, {"vector"});
    return vector(j.at("vector"), path + ".vector");
  }
  const bool per_group = j.is_array();
  if (per_group && j.size() != static_cast<std::size_t>(layout.groups())) {
    throw ConfigError(path + ": expected one entry per group (" +
                      std::to_string(layout.groups()) + ")");
  }
  for (int g = 0; g < layout.groups(); ++g) {
    const json& spec = per_group ? j[static_cast<std::size_t>(g)] : j;
    const std::string p = per_group ? path + "[" + std::to_string(g) + "]" : path;
    layout.intraBlock(g).of(out) = shape(spec, layout.groupSize(g), p);
  }
  return out;
}

CentroidTrajectory centroidTrajectory(const json& j) {
  const std::string path = "formation.centroid";
  checkKeys(j, path, {"origin", "velocity", "amplitude", "frequency", "phase"});
  CentroidTrajectory c;
  if (j.contains("origin")) c.origin = pair(j.at("origin"), path + ".origin");
  if (j.contains("velocity")) c.velocity = pair(j.at("velocity"), path + ".velocity");
  if (j.contains("amplitude")) c.amplitude = pair(j.at("amplitude"), path + ".amplitude");
  if (j.contains("frequency")) c.frequency = pair(j.at("frequency"), path + ".frequency");
  if (j.contains("phase")) c.phase = pair(j.at("phase"), path + ".phase");
  return c;
}

ControllerConfig controller(const json& j, const GroupLayout& layout) {
  checkKeys(j, "controller", {"mode", "epsilons", "gains", "coupling"});
  ControllerConfig c;
  if (j.contains("mode")) {
    const auto& mode = j.at("mode");
    if (mode == "three_time_scale") {
      c.mode = TimeScaleMode::kThree;
    } else if (mode == "multi_time_scale") {
      c.mode = TimeScaleMode::kMulti;
    } else {
      throw ConfigError("controller.mode must be \"three_time_scale\" or \"multi_time_scale\"");
    }
  }
  if (j.contains("epsilons")) c.epsilons = numbers(j.at("epsilons"), "controller.epsilons");
  else if (c.mode == TimeScaleMode::kMulti) {
    c.epsilons.assign(static_cast<std::size_t>(layout.groups()) + 1, 0.1);
  }
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    checkKeys(g, "controller.gains", {"intra", "inter", "centroid"});
    if (g.contains("intra")) {
      const auto& intra = g.at("intra");
      c.intra.clear();
      if (intra.is_array()) {
        for (std::size_t k = 0; k < intra.size(); ++k) {
          c.intra.push_back(gains(intra[k], "controller.gains.intra[" + std::to_string(k) + "]"));
        }
      } else {
        c.intra.push_back(gains(intra, "controller.gains.intra"));
      }
    }
    if (g.contains("inter")) c.inter = gains(g.at("inter"), "controller.gains.inter");
    if (g.contains("centroid")) c.centroid = gains(g.at("centroid"), "controller.gains.centroid");
  }
  if (j.contains("coupling")) {
    const auto& k = j.at("coupling");
    checkKeys(k, "controller.coupling", {"fill", "blocks", "matrix"});
    c.coupling.fill = numberOr(k, "fill", "controller.coupling", c.coupling.fill);
    if (k.contains("blocks")) {
      const auto& blocks = k.at("blocks");
      if (!blocks.is_object()) throw ConfigError("controller.coupling.blocks must be an object");
      for (const auto& item : blocks.items()) {
        const auto comma = item.key().find(',');
        if (comma == std::string::npos) {
          throw ConfigError("controller.coupling.blocks key \"" + item.key() +
                            "\" must be \"to,from\"");
        }
        c.coupling.blocks[{item.key().substr(0, comma), item.key().substr(comma + 1)}] =
            number(item.value(), "controller.coupling.blocks[\"" + item.key() + "\"]");
      }
    }
    if (k.contains("matrix")) {
      const auto& rows = k.at("matrix");
      if (!rows.is_array() || rows.empty()) {
        throw ConfigError("controller.coupling.matrix must be a nonempty array of rows");
      }
      Eigen::MatrixXd m(rows.size(), rows[0].is_array() ? rows[0].size() : 0);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = numbers(rows[r], "controller.coupling.matrix[" + std::to_string(r) + "]");
        if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
          throw ConfigError("controller.coupling.matrix rows differ in length");
        }
        for (std::size_t col = 0; col < row.size(); ++col) {
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = row[col];
        }
      }
      c.coupling.matrix = m;
    }
  }
  return c;
}

std::vector<RobotState> randomInitial(const json& j, int robots, SimConfig& sim) {
  const std::string path = "initial.random";
  checkKeys(j, path, {"seed", "half_width", "min_separation"});
  if (!j.contains("seed") || !j.at("seed").is_number_integer()) {
    throw ConfigError(path + ".seed must be an integer");
  }
  const auto seed = j.at("seed").get<std::uint64_t>();
  const double half = numberOr(j, "half_width", path, 20.0);
  const double sep = numberOr(j, "min_separation", path, 1.0);
  if (!(half > 0.0) || !(sep >= 0.0)) {
    throw ConfigError(path + ": half_width must be positive, min_separation nonnegative");
  }
  sim.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-half, half);
  std::vector<RobotState> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < robots) {
    if (++attempts > 100000) {
      throw ConfigError(path + ": could not place robots with the requested separation");
    }
    const double x = coord(rng);
    const double y = coord(rng);
    RobotState s;
    s.position = {x, y};
    bool clear = true;
    for (const auto& o : out) clear = clear && (o.position - s.position).norm() > sep;
    if (clear) out.push_back(s);
  }
  return out;
}

std::vector<RobotState> initialState(const json& j, int robots, SimConfig& sim) {
  checkKeys(j, "initial", {"positions", "velocities", "headings", "angular_rates", "random"});
  std::vector<RobotState> out;
  if (j.contains("random")) {
    if (j.contains("positions")) {
      throw ConfigError("initial: give either \"positions\" or \"random\", not both");
    }
    out = randomInitial(j.at("random"), robots, sim);
  } else {
    if (!j.contains("positions")) throw ConfigError("initial.positions is required");
    const Eigen::VectorXd p = pointList(j.at("positions"), "initial.positions");
    out.resize(static_cast<std::size_t>(p.size() / 2));
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i].position = p.segment<2>(2 * static_cast<Eigen::Index>(i));
    }
  }
  const auto n = out.size();
  if (j.contains("velocities")) {
    const Eigen::VectorXd v = pointList(j.at("velocities"), "initial.velocities");
    if (static_cast<std::size_t>(v.size()) != 2 * n) {
      throw ConfigError("initial.velocities must have one entry per robot");
    }
    for (std::size_t i = 0; i < n; ++i) {
      out[i].velocity = v.segment<2>(2 * static_cast<Eigen::Index>(i));
    }
  }
  if (j.contains("headings")) {
    const auto h = numbers(j.at("headings"), "initial.headings");
    if (h.size() != n) throw ConfigError("initial.headings must have one entry per robot");
    for (std::size_t i = 0; i < n; ++i) out[i].heading = h[i];
  }
  if (j.contains("angular_rates")) {
    const auto w = numbers(j.at("angular_rates"), "initial.angular_rates");
    if (w.size() != n) throw ConfigError("initial.angular_rates must have one entry per robot");
    for (std::size_t i = 0; i < n; ++i) out[i].angular_rate = w[i];
  }
  return out;
}

SimConfig simConfig(const json& j) {
  checkKeys(j, "sim", {"dt", "horizon", "integrator", "settling_fraction", "settling_floor",
                       "record_stride"});
  SimConfig s;
  s.dt = numberOr(j, "dt", "sim", s.dt);
  s.horizon = numberOr(j, "horizon", "sim", s.horizon);
  s.settling_fraction = numberOr(j, "settling_fraction", "sim", s.settling_fraction);
  s.settling_floor = numberOr(j, "settling_floor", "sim", s.settling_floor);
  if (j.contains("record_stride")) {
    if (!j.at("record_stride").is_number_integer()) {
      throw ConfigError("sim.record_stride must be an integer");
    }
    s.record_stride = j.at("record_stride").get<int>();
  }
  if (j.contains("integrator")) {
    const auto& m = j.at("integrator");
    if (m == "rk4") s.integrator = Integrator::kRk4;
    else if (m == "euler") s.integrator = Integrator::kEuler;
    else throw ConfigError("sim.integrator must be \"rk4\" or \"euler\"");
  }
  return s;
}

StabilityOptions stabilityOptions(const json& j) {
  checkKeys(j, "stability", {"weights", "epsilon_cap", "fallback_fraction", "growth_constants"});
  StabilityOptions s;
  if (j.contains("weights")) s.weights = numbers(j.at("weights"), "stability.weights");
  s.epsilon_cap = numberOr(j, "epsilon_cap", "stability", s.epsilon_cap);
  s.fallback_fraction = numberOr(j, "fallback_fraction", "stability", s.fallback_fraction);
  if (j.contains("growth_constants")) {
    const auto& g = j.at("growth_constants");
    const std::string path = "stability.growth_constants";
    checkKeys(g, path, {"alpha1", "alpha2", "beta1", "beta2", "gamma"});
    GrowthConstants c;
    c.alpha1 = numberOr(g, "alpha1", path, c.alpha1);
    c.alpha2 = numberOr(g, "alpha2", path, c.alpha2);
    c.beta1 = numberOr(g, "beta1", path, c.beta1);
    c.beta2 = numberOr(g, "beta2", path, c.beta2);
    c.gamma = numberOr(g, "gamma", path, c.gamma);
    s.growth = c;
  }
  return s;
}

}  // namespace

Scenario parseScenario(const std::string& text, bool require_positive_gains) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed scenario JSON: ") + e.what());
  }
  checkKeys(root, "scenario", {"name", "notes", "layout", "robot", "controller", "formation",
                               "potential", "initial", "sim", "stability"});
  Scenario s;
  try {
    if (root.contains("name")) {
      if (!root.at("name").is_string()) throw ConfigError("name must be a string");
      s.name = root.at("name").get<std::string>();
      if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos) {
        throw ConfigError("name must be a nonempty file-name-safe string");
      }
    }
    if (root.contains("notes")) {
      const auto& n = root.at("notes");
      if (n.is_string()) s.notes.push_back(n.get<std::string>());
      else if (n.is_array()) {
        for (const auto& line : n) {
          if (!line.is_string()) throw ConfigError("notes must be strings");
          s.notes.push_back(line.get<std::string>());
        }
      } else {
        throw ConfigError("notes must be a string or an array of strings");
      }
    }

    if (!root.contains("layout")) throw ConfigError("layout is required");
    const auto& lj = root.at("layout");
    if (!lj.is_array()) throw ConfigError("layout must be an array of group sizes");
    std::vector<int> sizes;
    for (std::size_t k = 0; k < lj.size(); ++k) {
      if (!lj[k].is_number_integer()) {
        throw ConfigError("layout[" + std::to_string(k) + "] must be an integer");
      }
      sizes.push_back(lj[k].get<int>());
    }
    s.layout = GroupLayout(sizes);

    if (root.contains("robot")) {
      const auto& r = root.at("robot");
      checkKeys(r, "robot", {"mass", "inertia", "com_offset", "half_separation", "wheel_radius"});
      s.robot.mass = numberOr(r, "mass", "robot", s.robot.mass);
      s.robot.inertia = numberOr(r, "inertia", "robot", s.robot.inertia);
      s.robot.com_offset = numberOr(r, "com_offset", "robot", s.robot.com_offset);
      s.robot.half_separation = numberOr(r, "half_separation", "robot", s.robot.half_separation);
      s.robot.wheel_radius = numberOr(r, "wheel_radius", "robot", s.robot.wheel_radius);
    }

    s.controller = controller(root.contains("controller") ? root.at("controller") : json::object(),
                              s.layout);

    if (!root.contains("formation")) throw ConfigError("formation is required");
    const auto& f = root.at("formation");
    checkKeys(f, "formation", {"intra", "inter", "centroid"});
    if (!f.contains("intra")) throw ConfigError("formation.intra is required");
    s.formation.intra = intraShape(f.at("intra"), s.layout);
    if (s.layout.groups() > 1) {
      if (!f.contains("inter")) throw ConfigError("formation.inter is required for several groups");
      s.formation.inter = shape(f.at("inter"), s.layout.groups(), "formation.inter");
    } else if (f.contains("inter")) {
      throw ConfigError("formation.inter must be absent for a single group");
    }
    if (f.contains("centroid")) s.formation.centroid = centroidTrajectory(f.at("centroid"));

    if (root.contains("potential")) {
      const auto& p = root.at("potential");
      checkKeys(p, "potential", {"enabled", "sensing_radius", "safe_distance"});
      if (p.contains("enabled")) s.sim.potential_enabled = boolean(p.at("enabled"), "potential.enabled");
      s.potential.sensing_radius =
          numberOr(p, "sensing_radius", "potential", s.potential.sensing_radius);
      s.potential.safe_distance =
          numberOr(p, "safe_distance", "potential", s.potential.safe_distance);
    }

    if (root.contains("sim")) {
      const bool enabled = s.sim.potential_enabled;
      s.sim = simConfig(root.at("sim"));
      s.sim.potential_enabled = enabled;
    }
    if (!root.contains("initial")) throw ConfigError("initial is required");
    s.initial = initialState(root.at("initial"), s.layout.robots(), s.sim);
    if (root.contains("stability")) s.stability = stabilityOptions(root.at("stability"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  s.validate(require_positive_gains);
  return s;
}

Scenario loadScenario(const std::filesystem::path& path, bool require_positive_gains) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parseScenario(text.str(), require_positive_gains);
}

}  // namespace mtsf
