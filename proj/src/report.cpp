#include "mtsf/report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace mtsf {

namespace {

void matrix(std::ostream& out, const Eigen::MatrixXd& m, const char* indent) {
  const Eigen::IOFormat f(6, 0, ", ", "\n", std::string(indent) + "[", "]");
  // Adding zero turns -0 into 0 for display.
  out << (m.array() + 0.0).matrix().format(f) << '\n';
}

void settlingLine(std::ostream& out, const LevelSettling& s) {
  out << "  " << std::left << std::setw(10) << s.level << std::right << " initial |e| = "
      << std::setw(10) << s.initial_norm << "  tol = " << std::setw(10) << s.tolerance << "  t = ";
  if (s.time) out << *s.time << " s\n";
  else out << "not settled\n";
}

void closestLine(std::ostream& out, const char* label, const MinDistance& d) {
  out << label;
  if (d.first < 0) {
    out << "n/a\n";
    return;
  }
  out << d.distance << " m (robots " << d.first + 1 << " and " << d.second + 1 << ", t = "
      << d.time << " s)\n";
}

}  // namespace

void writeStabilityReport(std::ostream& out, const StabilityReport& report) {
  out << std::setprecision(6);
  out << "Stability certificates\n======================\n\n";
  for (const auto& l : report.levels) {
    out << "level " << l.level << ": " << (l.verdict.hurwitz ? "Hurwitz" : "NOT Hurwitz")
        << " (spectral abscissa " << l.verdict.abscissa << ")\n";
    if (l.certificate) {
      out << "  Lyapunov residual max|A^T P + P A + Q| = " << l.certificate->residual << '\n';
      if (l.certificate->P.rows() <= 8) {
        out << "  P =\n";
        matrix(out, l.certificate->P, "    ");
      } else {
        out << "  P: " << l.certificate->P.rows() << "x" << l.certificate->P.cols()
            << ", min eigenvalue " << minSymmetricEigenvalue(l.certificate->P) << '\n';
      }
    } else {
      out << "  advice: choose k1 > 0 and k2 > 0 for this level; the companion matrix "
             "[[0, I], [-k1 I, -k2 I]] is Hurwitz exactly when both base gains are positive\n";
    }
  }
  out << '\n';
  if (!report.allHurwitz()) {
    out << "epsilon bounds: skipped (a boundary-layer or reduced matrix is not Hurwitz)\n";
  } else {
    out << "Epsilon bounds (slowest to fastest)\n";
    for (const auto& s : report.chain) {
      out << "  " << s.parameter << " (fast level " << s.fast_level << "): bound "
          << s.bound.bound << (s.bound.capped ? " (capped)" : "") << ", configured "
          << s.configured << (s.admissible ? " admissible" : " NOT strictly admissible")
          << ", next step evaluated at " << s.evaluated << '\n'
          << "    weight d = " << s.bound.weight << ", min eig Q_eps at 0.99*bound = "
          << s.bound.min_eigenvalue_at_99 << (s.bound.verified() ? " (PD)" : " (NOT PD)")
          << ", det diagnostic = " << s.bound.determinant_diagnostic << '\n'
          << "    grid:";
      for (const auto& g : s.grid) {
        out << "  eps=" << g.eps << (g.positive_definite ? " PD" : " not PD");
      }
      out << '\n';
    }
  }
  if (report.growth) {
    const auto& c = *report.growth;
    out << "\nGrowth constants: alpha1=" << c.alpha1 << " alpha2=" << c.alpha2
        << " beta1=" << c.beta1 << " beta2=" << c.beta2 << " gamma=" << c.gamma << '\n';
    if (report.eps_star) {
      out << "  eps* = " << report.eps_star->eps_star << ", d* = " << report.eps_star->d_star;
      if (report.eps_star->eps_at_d_star) out << ", eps_d(d*) = " << *report.eps_star->eps_at_d_star;
      out << '\n';
    }
  }
}

void writeStabilityCsv(std::ostream& out, const StabilityReport& report) {
  out << std::setprecision(17);
  out << "parameter,fast_level,configured,bound,capped,admissible,evaluated,weight,"
         "min_eig_at_99,verified\n";
  for (const auto& s : report.chain) {
    out << s.parameter << ',' << s.fast_level << ',' << s.configured << ',' << s.bound.bound
        << ',' << s.bound.capped << ',' << s.admissible << ',' << s.evaluated << ','
        << s.bound.weight << ',' << s.bound.min_eigenvalue_at_99 << ',' << s.bound.verified()
        << '\n';
  }
}

void writeRunSummary(std::ostream& out, const Scenario& scenario, const TrajectoryLog& log,
                     const SettlingReport& settling, const MinDistance& closest,
                     const std::optional<MinDistance>& contrast) {
  out << std::setprecision(6);
  out << "scenario " << scenario.name << " (layout " << scenario.layout.describe() << ", "
      << toString(scenario.controller.mode) << ", potential "
      << (scenario.sim.potential_enabled ? "on" : "off") << ")\n";
  out << "dt = " << scenario.sim.dt << " s, horizon = " << scenario.sim.horizon << " s, "
      << toString(scenario.sim.integrator) << ", " << log.size() << " logged samples\n\n";
  out << "settling (tolerance " << scenario.sim.settling_fraction * 100.0
      << "% of initial error norm)\n";
  for (const auto& l : settling.levels) settlingLine(out, l);
  // With one intra level the aggregate rows repeat the per-level ones.
  if (scenario.controller.mode == TimeScaleMode::kMulti) settlingLine(out, settling.intra);
  if (settling.ratio_inter_intra) out << "  t_r / t_intra = " << *settling.ratio_inter_intra << '\n';
  if (settling.ratio_centroid_inter) out << "  t_c / t_r = " << *settling.ratio_centroid_inter << '\n';
  out << '\n';
  closestLine(out, "closest approach (logged samples): ", closest);
  if (log.step_minimum) closestLine(out, "closest approach (every step):     ", *log.step_minimum);
  if (scenario.sim.potential_enabled || contrast) {
    out << "safety distance r_safe = " << scenario.potential.safe_distance << " m\n";
  }
  if (contrast) closestLine(out, "paired run, potential toggled:     ", *contrast);
}

}  // namespace mtsf
