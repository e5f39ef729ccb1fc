#include "mtsf/log_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mtsf/errors.hpp"

namespace mtsf {

namespace {

const char* const kTermColumns[] = {"feedback_norm", "coupling_norm", "cancellation_norm",
                                    "feedforward_norm", "potential_norm"};

void put(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  line.push_back(',');
  line.append(buf, res.ptr);
}

void putVector(std::string& line, const Eigen::VectorXd& v) {
  for (Eigen::Index k = 0; k < v.size(); ++k) put(line, v(k));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

GroupLayout inferLayout(const std::vector<std::string>& header) {
  std::map<int, int> intra;
  int inter = 0;
  for (const auto& name : header) {
    if (name.rfind("Z_", 0) != 0 || name.size() < 4 || name.substr(name.size() - 2) != "_x") {
      continue;
    }
    const std::string var = name.substr(2, name.size() - 4);
    if (var.rfind("r_", 0) == 0) {
      ++inter;
    } else if (var != "c") {
      const auto sep = var.find('_');
      int g = 0;
      const auto res = std::from_chars(var.data(), var.data() + sep, g);
      if (sep == std::string::npos || res.ec != std::errc() || g < 1) {
        throw ConfigError("log header: unrecognized transformed column " + name);
      }
      ++intra[g];
    }
  }
  if (intra.empty()) throw ConfigError("log header: no transformed Z_ columns found");
  std::vector<int> sizes;
  for (const auto& [g, count] : intra) {
    if (g != static_cast<int>(sizes.size()) + 1) {
      throw ConfigError("log header: group numbers are not contiguous");
    }
    sizes.push_back(count + 1);
  }
  if (inter != static_cast<int>(sizes.size()) - 1) {
    throw ConfigError("log header: inter columns do not match the group count");
  }
  return GroupLayout(sizes);
}

}  // namespace

std::vector<std::string> logColumns(const GroupLayout& layout) {
  std::vector<std::string> cols{"t"};
  const int n = layout.robots();
  for (int i = 1; i <= n; ++i) {
    const auto s = std::to_string(i);
    for (const char* p : {"x_", "y_", "vx_", "vy_", "theta_", "omega_"}) cols.push_back(p + s);
  }
  const auto names = transformedNames(layout);
  for (const char* prefix : {"Z_", "E_", "dE_"}) {
    for (const auto& v : names) {
      cols.push_back(prefix + v + "_x");
      cols.push_back(prefix + v + "_y");
    }
  }
  for (int i = 1; i <= n; ++i) {
    cols.push_back("tau_r_" + std::to_string(i));
    cols.push_back("tau_l_" + std::to_string(i));
  }
  cols.emplace_back("min_dist");
  for (const char* c : kTermColumns) cols.emplace_back(c);
  return cols;
}

void writeCsv(std::ostream& out, const TrajectoryLog& log) {
  const auto cols = logColumns(log.layout);
  std::string line;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (k) line.push_back(',');
    line += cols[k];
  }
  out << line << '\n';
  const Eigen::Index n = log.layout.robots();
  for (std::size_t k = 0; k < log.size(); ++k) {
    line.clear();
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, log.time[k]);
    line.append(buf, res.ptr);
    const auto& x = log.state[k];
    for (Eigen::Index i = 0; i < n; ++i) {
      put(line, x(2 * i));
      put(line, x(2 * i + 1));
      put(line, x(2 * n + 2 * i));
      put(line, x(2 * n + 2 * i + 1));
      put(line, x(4 * n + i));
      put(line, x(5 * n + i));
    }
    putVector(line, log.z[k]);
    putVector(line, log.error[k]);
    putVector(line, log.error_rate[k]);
    putVector(line, log.torques[k]);
    put(line, log.min_distance[k]);
    const auto& t = log.terms[k];
    for (double v : {t.feedback, t.coupling, t.cancellation, t.feedforward, t.potential}) {
      put(line, v);
    }
    out << line << '\n';
  }
}

void writeCsv(const std::filesystem::path& path, const TrajectoryLog& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  writeCsv(out, log);
  if (!out) throw Error("write failed for " + path.string());
}

TrajectoryLog readCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ConfigError("log is empty: missing header");
  if (line.back() == '\r') line.pop_back();
  const auto header = split(line);
  TrajectoryLog log;
  log.layout = inferLayout(header);
  const auto cols = logColumns(log.layout);
  if (header != cols) {
    throw ConfigError("log header does not match the expected columns for layout " +
                      log.layout.describe());
  }
  const Eigen::Index n = log.layout.robots();
  const Eigen::Index dim = 2 * n;
  std::size_t lineno = 1;
  std::vector<double> row(cols.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols.size()) {
      throw ConfigError("log line " + std::to_string(lineno) + ": expected " +
                        std::to_string(cols.size()) + " fields, got " +
                        std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& cell = cells[c];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ConfigError("log line " + std::to_string(lineno) + ": column " + cols[c] +
                          " is not a number (\"" + cell + "\")");
      }
      const bool inf_ok = cols[c] == "min_dist" && std::isinf(v) && v > 0.0;
      if (!std::isfinite(v) && !inf_ok) {
        throw ConfigError("log line " + std::to_string(lineno) + " (row " +
                          std::to_string(lineno - 1) + "): non-finite value in column " +
                          cols[c]);
      }
      row[c] = v;
    }
    const double t = row[0];
    if (!log.empty() && !(t > log.time.back())) {
      throw ConfigError("log line " + std::to_string(lineno) + ": time is not increasing");
    }
    Eigen::VectorXd x(6 * n);
    std::size_t c = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      x(2 * i) = row[c++];
      x(2 * i + 1) = row[c++];
      x(2 * n + 2 * i) = row[c++];
      x(2 * n + 2 * i + 1) = row[c++];
      x(4 * n + i) = row[c++];
      x(5 * n + i) = row[c++];
    }
    auto take = [&](Eigen::Index len) {
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(row.data() + c, len);
      c += static_cast<std::size_t>(len);
      return v;
    };
    log.time.push_back(t);
    log.state.push_back(x);
    log.z.push_back(take(dim));
    log.error.push_back(take(dim));
    log.error_rate.push_back(take(dim));
    log.torques.push_back(take(dim));
    log.min_distance.push_back(row[c++]);
    TermNorms tn;
    tn.feedback = row[c++];
    tn.coupling = row[c++];
    tn.cancellation = row[c++];
    tn.feedforward = row[c++];
    tn.potential = row[c++];
    log.terms.push_back(tn);
  }
  return log;
}

TrajectoryLog readCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read log " + path.string());
  return readCsv(in);
}

}  // namespace mtsf
