// mtsf: run formation scenarios, certify stability and render figures.
//
// Exit codes: 0 success, 2 configuration or input error, 3 runtime failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mtsf/cbt.hpp"
#include "mtsf/errors.hpp"
#include "mtsf/log_io.hpp"
#include "mtsf/plot.hpp"
#include "mtsf/report.hpp"
#include "mtsf/scenario.hpp"
#include "mtsf/sim.hpp"
#include "mtsf/stability.hpp"

namespace fs = std::filesystem;
using namespace mtsf;

namespace {

constexpr int kConfigExit = 2;
constexpr int kRuntimeExit = 3;

fs::path outputDir(const std::string& flag) {
  fs::path dir = "mtsf_out";
  if (const char* env = std::getenv("MTSF_OUT_DIR"); env && *env) dir = env;
  if (!flag.empty()) dir = flag;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return s.str();
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct RunArgs {
  std::string config;
  std::string potential;
  std::string out;
  std::string name;
  double dt = 0.0;
  double horizon = -1.0;
  bool contrast = false;
};

int cmdRun(const RunArgs& a) {
  Scenario s = loadScenario(a.config);
  if (a.potential == "on") s.sim.potential_enabled = true;
  if (a.potential == "off") s.sim.potential_enabled = false;
  if (a.dt > 0.0) s.sim.dt = a.dt;
  if (a.horizon >= 0.0) s.sim.horizon = a.horizon;
  if (!a.name.empty()) s.name = a.name;
  s.validate();

  const fs::path dir = outputDir(a.out);
  const std::string stem = s.name + "_" + timestamp();

  const TrajectoryLog log = runScenario(s);
  const fs::path csv = dir / (stem + ".csv");
  writeCsv(csv, log);

  std::optional<MinDistance> contrast;
  std::string contrast_note;
  if (a.contrast) {
    Scenario paired = s;
    paired.sim.potential_enabled = !s.sim.potential_enabled;
    try {
      const TrajectoryLog other = runScenario(paired);
      writeCsv(dir / (stem + "_contrast.csv"), other);
      contrast = minPairDistance(other);
    } catch (const BarrierViolation& e) {
      contrast_note = std::string("paired run aborted: ") + e.what() + "\n";
    }
  }

  const SettlingReport settling =
      settlingTimes(log, s.controller, s.sim.settling_fraction, s.sim.settling_floor);
  std::ostringstream summary;
  writeRunSummary(summary, s, log, settling, minPairDistance(log), contrast);
  summary << contrast_note;
  writeText(dir / (stem + "_summary.txt"), summary.str());
  const PlotFiles plots = writePlots(log, dir, stem);

  std::cout << summary.str() << "\nwrote " << csv.string() << "\n      "
            << plots.trajectory.string() << "\n      " << plots.errors.string() << '\n';
  return 0;
}

int cmdStability(const std::string& config, const std::string& out) {
  const Scenario s = loadScenario(config, /*require_positive_gains=*/false);
  const StabilityReport report = analyzeStability(s.controller, s.layout, s.stability);

  std::ostringstream text;
  writeStabilityReport(text, report);
  std::ostringstream csv;
  writeStabilityCsv(csv, report);
  const fs::path dir = outputDir(out);
  writeText(dir / (s.name + "_stability.txt"), text.str());
  writeText(dir / (s.name + "_stability.csv"), csv.str());
  std::cout << text.str();
  if (!report.allHurwitz()) {
    std::cerr << "error: certificate failure, at least one level is not Hurwitz\n";
    return kRuntimeExit;
  }
  return 0;
}

int cmdPlot(const std::string& path, const std::string& out) {
  const TrajectoryLog log = readCsv(fs::path(path));
  const fs::path dir = out.empty() ? fs::path(path).parent_path() : outputDir(out);
  const PlotFiles plots = writePlots(log, dir.empty() ? fs::path(".") : dir,
                                     fs::path(path).stem().string());
  std::cout << "wrote " << plots.trajectory.string() << "\n      " << plots.errors.string()
            << '\n';
  return 0;
}

int cmdValidate(const std::string& config) {
  const Scenario s = loadScenario(config);
  std::cout << "ok: " << s.name << " (layout " << s.layout.describe() << ", "
            << s.layout.robots() << " robots, " << toString(s.controller.mode) << ")\n";
  return 0;
}

int cmdPrintPhi(const std::string& config, const std::string& layout_text) {
  GroupLayout layout({2});
  if (!layout_text.empty()) {
    std::vector<int> sizes;
    std::stringstream in(layout_text);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        sizes.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ConfigError("--layout must be comma-separated group sizes, got \"" + layout_text +
                          "\"");
      }
    }
    layout = GroupLayout(sizes);
  } else {
    layout = loadScenario(config).layout;
  }
  const CbtMatrix phi(layout);
  const auto names = transformedNames(layout);
  std::cout << "row";
  for (int i = 1; i <= layout.robots(); ++i) std::cout << ",x_" << i << ",y_" << i;
  std::cout << '\n' << std::setprecision(17);
  for (Eigen::Index r = 0; r < phi.matrix().rows(); ++r) {
    std::cout << names[static_cast<std::size_t>(r / 2)] << (r % 2 ? "_y" : "_x");
    for (Eigen::Index c = 0; c < phi.matrix().cols(); ++c) std::cout << ',' << phi.matrix()(r, c);
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-time-scale formation control simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario and write CSV, summary and plots");
  run_cmd->add_option("config", run.config, "Scenario JSON file")->required();
  run_cmd->add_option("--potential", run.potential, "Override collision avoidance")
      ->check(CLI::IsMember({"on", "off"}));
  run_cmd->add_option("--out", run.out, "Output directory (default $MTSF_OUT_DIR or ./mtsf_out)");
  run_cmd->add_option("--dt", run.dt, "Step size override [s]");
  run_cmd->add_option("--horizon", run.horizon, "Horizon override [s]");
  run_cmd->add_option("--name", run.name, "Scenario name override used in file names");
  run_cmd->add_flag("--contrast", run.contrast,
                    "Also run with the potential toggled and report its closest approach");

  std::string stab_config, stab_out;
  auto* stab_cmd = app.add_subcommand("stability", "Lyapunov certificates and epsilon bounds");
  stab_cmd->add_option("config", stab_config, "Scenario JSON file")->required();
  stab_cmd->add_option("--out", stab_out, "Output directory");

  std::string plot_log, plot_out;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG figures from a CSV log");
  plot_cmd->add_option("log", plot_log, "CSV log written by run")->required();
  plot_cmd->add_option("--out", plot_out, "Output directory (default: next to the log)");

  std::string val_config;
  auto* val_cmd = app.add_subcommand("validate", "Parse and validate a scenario");
  val_cmd->add_option("config", val_config, "Scenario JSON file")->required();

  std::string phi_config, phi_layout;
  auto* phi_cmd = app.add_subcommand("print-phi", "Print the transformation rows as CSV");
  phi_cmd->add_option("config", phi_config, "Scenario JSON file");
  phi_cmd->add_option("--layout", phi_layout, "Group sizes, e.g. 3,3,3");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*run_cmd) return cmdRun(run);
    if (*stab_cmd) return cmdStability(stab_config, stab_out);
    if (*plot_cmd) return cmdPlot(plot_log, plot_out);
    if (*val_cmd) return cmdValidate(val_config);
    if (*phi_cmd) {
      if (phi_config.empty() == phi_layout.empty()) {
        throw ConfigError("print-phi needs exactly one of a config file or --layout");
      }
      return cmdPrintPhi(phi_config, phi_layout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return 0;
}
