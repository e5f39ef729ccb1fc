#include "mtsf/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "mtsf/errors.hpp"

namespace mtsf {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr std::size_t kMaxPoints = 2000;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

const char* color(std::size_t k) { return kPalette[k % (sizeof kPalette / sizeof *kPalette)]; }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  bool log_x = false;
  bool log_y = false;

  double tx(double x) const {
    const double v = log_x ? std::log10(x) : x;
    return kLeft + (v - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double ty(double y) const {
    const double v = log_y ? std::log10(y) : y;
    return kHeight - kBottom - (v - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void header(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape(title) << "</text>\n";
}

// Box, ticks and axis labels. Log axes get decade ticks.
void axes(std::ostream& out, const Frame& f, const std::string& xlabel,
          const std::string& ylabel) {
  const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
  out << "<rect x=\"" << fmt(l) << "\" y=\"" << fmt(t) << "\" width=\"" << fmt(r - l)
      << "\" height=\"" << fmt(b - t) << "\" fill=\"none\" stroke=\"black\"/>\n";
  auto ticks = [](double lo, double hi, bool logarithmic) {
    std::vector<double> v;
    if (logarithmic) {
      for (double e = std::ceil(lo); e <= hi + 1e-9; e += 1.0) v.push_back(e);
      return v;
    }
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    }
    for (double x = std::ceil(lo / step) * step; x <= hi + 1e-9 * span; x += step) {
      v.push_back(std::abs(x) < 1e-12 * span ? 0.0 : x);
    }
    return v;
  };
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v : ticks(f.x0, f.x1, f.log_x)) {
    const double px = f.tx(f.log_x ? std::pow(10.0, v) : v);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(b) << "\" x2=\"" << fmt(px)
        << "\" y2=\"" << fmt(b + 5) << "\" stroke=\"black\"/>"
        << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(b + 18) << "\" text-anchor=\"middle\">"
        << (f.log_x ? "1e" + label(v) : label(v)) << "</text>\n";
  }
  for (double v : ticks(f.y0, f.y1, f.log_y)) {
    const double py = f.ty(f.log_y ? std::pow(10.0, v) : v);
    out << "<line x1=\"" << fmt(l - 5) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(l)
        << "\" y2=\"" << fmt(py) << "\" stroke=\"black\"/>"
        << "<text x=\"" << fmt(l - 8) << "\" y=\"" << fmt(py + 4) << "\" text-anchor=\"end\">"
        << (f.log_y ? "1e" + label(v) : label(v)) << "</text>\n";
  }
  out << "<text x=\"" << fmt((l + r) / 2) << "\" y=\"" << fmt(kHeight - 12)
      << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n"
      << "<text x=\"16\" y=\"" << fmt((t + b) / 2) << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 16 " << fmt((t + b) / 2) << ")\">" << escape(ylabel)
      << "</text>\n</g>\n";
}

void polyline(std::ostream& out, const std::vector<std::pair<double, double>>& pts,
              const char* stroke, double width = 1.2, const char* dash = nullptr) {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width << '"';
  if (dash) out << " stroke-dasharray=\"" << dash << '"';
  out << " points=\"";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) out << ' ';
    out << fmt(pts[k].first) << ',' << fmt(pts[k].second);
  }
  out << "\"/>\n";
}

std::size_t strideFor(std::size_t n) { return std::max<std::size_t>(1, n / kMaxPoints); }

}  // namespace

void trajectorySvg(std::ostream& out, const TrajectoryLog& log, const std::string& title) {
  const auto& layout = log.layout;
  const int n = layout.robots();
  header(out, title.empty() ? "Robot trajectories" : title);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& x : log.state) {
    for (int i = 0; i < n; ++i) {
      xmin = std::min(xmin, x(2 * i));
      xmax = std::max(xmax, x(2 * i));
      ymin = std::min(ymin, x(2 * i + 1));
      ymax = std::max(ymax, x(2 * i + 1));
    }
  }
  if (log.empty()) {
    xmin = ymin = -1.0;
    xmax = ymax = 1.0;
  }
  // Equal scaling on both axes so formations keep their shape.
  const double span = std::max({xmax - xmin, (ymax - ymin) * 4.0 / 3.0, 1e-6}) * 1.05;
  const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
  const Frame f{cx - span / 2, cx + span / 2, cy - span * 3.0 / 8.0, cy + span * 3.0 / 8.0};
  axes(out, f, "x [m]", "y [m]");

  const std::size_t stride = strideFor(log.size());
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < log.size(); k += stride) {
      pts.emplace_back(f.tx(log.state[k](2 * i)), f.ty(log.state[k](2 * i + 1)));
    }
    if (!log.empty()) {
      pts.emplace_back(f.tx(log.state.back()(2 * i)), f.ty(log.state.back()(2 * i + 1)));
    }
    polyline(out, pts, color(static_cast<std::size_t>(layout.groupOf(i))), 0.8);
  }

  if (!log.empty()) {
    const std::size_t snaps[] = {0, log.size() / 2, log.size() - 1};
    for (std::size_t s : snaps) {
      const auto& x = log.state[s];
      for (int g = 0; g < layout.groups(); ++g) {
        std::vector<std::pair<double, double>> pts;
        for (int k = 0; k < layout.groupSize(g); ++k) {
          const int i = layout.firstRobot(g) + k;
          pts.emplace_back(f.tx(x(2 * i)), f.ty(x(2 * i + 1)));
        }
        if (pts.size() > 2) pts.push_back(pts.front());
        polyline(out, pts, color(static_cast<std::size_t>(g)), 1.6, "4 2");
        for (const auto& p : pts) {
          out << "<circle cx=\"" << fmt(p.first) << "\" cy=\"" << fmt(p.second)
              << "\" r=\"3\" fill=\"" << color(static_cast<std::size_t>(g)) << "\"/>\n";
        }
      }
      out << "<text x=\"" << fmt(f.tx(x(0)) + 6) << "\" y=\"" << fmt(f.ty(x(1)) - 6)
          << "\" font-family=\"sans-serif\" font-size=\"10\">t=" << label(log.time[s])
          << "</text>\n";
    }
  }
  out << "</svg>\n";
}

void errorSvg(std::ostream& out, const TrajectoryLog& log, const std::string& title) {
  const auto& layout = log.layout;
  header(out, title.empty() ? "Transformed error norms" : title);

  struct Curve {
    std::string name;
    RowBlock rows;
    const char* stroke;
  };
  std::vector<Curve> curves;
  for (int g = 0; g < layout.groups(); ++g) {
    curves.push_back({"intra group " + std::to_string(g + 1), layout.intraBlock(g), "#1f77b4"});
  }
  if (layout.groups() > 1) curves.push_back({"inter", layout.interBlock(), "#2ca02c"});
  curves.push_back({"centroid", layout.centroidBlock(), "#d62728"});

  constexpr double kFloor = 1e-12;
  double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  double emax = kFloor;
  for (std::size_t k = 0; k < log.size(); ++k) {
    if (log.time[k] > 0.0) tmin = std::min(tmin, log.time[k]);
    tmax = std::max(tmax, log.time[k]);
    for (const auto& c : curves) emax = std::max(emax, c.rows.of(log.error[k]).norm());
  }
  if (!(tmin < tmax)) {
    tmin = 1e-3;
    tmax = 1.0;
  }
  Frame f{std::floor(std::log10(tmin)), std::ceil(std::log10(tmax)), std::log10(kFloor),
          std::ceil(std::log10(emax)) + 0.1, true, true};
  if (f.y1 <= f.y0) f.y1 = f.y0 + 1.0;
  axes(out, f, "time [s] (log)", "|Z_e| (log)");

  const std::size_t stride = strideFor(log.size());
  for (const auto& c : curves) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < log.size(); ++k) {
      if (!(log.time[k] > 0.0) || (k % stride != 0 && k + 1 != log.size())) continue;
      const double e = std::max(c.rows.of(log.error[k]).norm(), kFloor);
      pts.emplace_back(f.tx(log.time[k]), f.ty(e));
    }
    polyline(out, pts, c.stroke, 1.2);
  }

  // Legend: one entry per curve family.
  const char* names[] = {"intra", "inter", "centroid"};
  const char* strokes[] = {"#1f77b4", "#2ca02c", "#d62728"};
  double y = kTop + 16;
  for (int k = 0; k < 3; ++k) {
    if (k == 1 && layout.groups() == 1) continue;
    out << "<line x1=\"" << fmt(kWidth - 150) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(kWidth - 125) << "\" y2=\"" << fmt(y) << "\" stroke=\"" << strokes[k]
        << "\" stroke-width=\"2\"/><text x=\"" << fmt(kWidth - 118) << "\" y=\"" << fmt(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << names[k] << "</text>\n";
    y += 16;
  }
  out << "</svg>\n";
}

PlotFiles writePlots(const TrajectoryLog& log, const std::filesystem::path& dir,
                     const std::string& stem) {
  PlotFiles files{dir / (stem + "_trajectory.svg"), dir / (stem + "_errors.svg")};
  {
    std::ofstream out(files.trajectory, std::ios::binary);
    if (!out) throw Error("cannot write " + files.trajectory.string());
    trajectorySvg(out, log, stem);
  }
  {
    std::ofstream out(files.errors, std::ios::binary);
    if (!out) throw Error("cannot write " + files.errors.string());
    errorSvg(out, log, stem);
  }
  return files;
}

}  // namespace mtsf
