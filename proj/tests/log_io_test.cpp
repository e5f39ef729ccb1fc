#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "mtsf/errors.hpp"
#include "mtsf/log_io.hpp"
#include "mtsf/plot.hpp"

using namespace mtsf;

namespace {

TrajectoryLog shortRun(double horizon = 0.02) {
  Scenario s = loadScenario(std::string(MTSF_SCENARIO_DIR) + "/paper_fig2.json");
  s.sim.horizon = horizon;
  return runScenario(s);
}

std::string csvOf(const TrajectoryLog& log) {
  std::ostringstream out;
  writeCsv(out, log);
  return out.str();
}

std::string headerLine(const GroupLayout& layout) {
  std::string h;
  for (const auto& c : logColumns(layout)) h += (h.empty() ? "" : ",") + c;
  return h;
}

}  // namespace

TEST(LogColumns, NamesAndCount) {
  const GroupLayout layout({3, 3, 3});
  const auto cols = logColumns(layout);
  // t, 6 per robot, 3 x 2N transformed, 2 torques per robot, min_dist, 5 term norms.
  EXPECT_EQ(cols.size(), 1u + 6 * 9 + 3 * 18 + 2 * 9 + 1 + 5);
  EXPECT_EQ(cols[0], "t");
  EXPECT_EQ(cols[1], "x_1");
  EXPECT_NE(std::find(cols.begin(), cols.end(), "Z_r_1_x"), cols.end());
  EXPECT_NE(std::find(cols.begin(), cols.end(), "dE_c_y"), cols.end());
  EXPECT_NE(std::find(cols.begin(), cols.end(), "tau_l_9"), cols.end());
  EXPECT_EQ(cols.back(), "potential_norm");
}

TEST(Csv, RoundtripIsExact) {
  const TrajectoryLog log = shortRun();
  std::istringstream in(csvOf(log));
  const TrajectoryLog back = readCsv(in);
  EXPECT_EQ(back.layout, log.layout);
  ASSERT_EQ(back.size(), log.size());
  for (std::size_t k = 0; k < log.size(); ++k) {
    EXPECT_EQ(back.time[k], log.time[k]);
    EXPECT_EQ(back.state[k], log.state[k]);
    EXPECT_EQ(back.z[k], log.z[k]);
    EXPECT_EQ(back.error[k], log.error[k]);
    EXPECT_EQ(back.error_rate[k], log.error_rate[k]);
    EXPECT_EQ(back.torques[k], log.torques[k]);
    EXPECT_EQ(back.min_distance[k], log.min_distance[k]);
    EXPECT_EQ(back.terms[k].coupling, log.terms[k].coupling);
  }
  // Writing the parsed log again reproduces the bytes.
  EXPECT_EQ(csvOf(back), csvOf(log));
}

TEST(Csv, HeaderOnlyIsEmptyLog) {
  const GroupLayout layout({3, 2});
  std::istringstream in(headerLine(layout) + "\n");
  const TrajectoryLog log = readCsv(in);
  EXPECT_TRUE(log.empty());
  EXPECT_EQ(log.layout, layout);
}

TEST(Csv, LayoutIsInferred) {
  for (const auto& sizes : {std::vector<int>{2}, std::vector<int>{4, 2, 3}}) {
    std::istringstream in(headerLine(GroupLayout(sizes)) + "\n");
    EXPECT_EQ(readCsv(in).layout, GroupLayout(sizes));
  }
}

TEST(Csv, NonFiniteRowNamesLine) {
  std::string text = csvOf(shortRun());
  // Corrupt the first value of the third data row (file line 4).
  std::size_t pos = 0;
  for (int line = 0; line < 3; ++line) pos = text.find('\n', pos) + 1;
  const std::size_t comma = text.find(',', pos);
  const std::size_t second = text.find(',', comma + 1);
  text.replace(comma + 1, second - comma - 1, "nan");
  std::istringstream in(text);
  try {
    readCsv(in);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 4"), std::string::npos) << what;
    EXPECT_NE(what.find("x_1"), std::string::npos) << what;
  }
}

TEST(Csv, MalformedInputRejected) {
  const std::string header = headerLine(GroupLayout({2}));
  const auto reject = [](const std::string& text) {
    std::istringstream in(text);
    EXPECT_THROW(readCsv(in), ConfigError) << text.substr(0, 60);
  };
  reject("");
  reject("t,x_1,y_1\n1,2,3\n");
  reject(header + "\n1,2,3\n");
  std::string row = "0";
  for (std::size_t k = 1; k < logColumns(GroupLayout({2})).size(); ++k) row += ",0";
  reject(header + "\n" + row + "\n" + row + "\n");  // time does not increase
  std::string bad = row;
  bad.replace(bad.rfind(','), 2, ",abc");
  reject(header + "\n" + bad + "\n");
  std::istringstream ok(header + "\n" + row + "\n");
  EXPECT_EQ(readCsv(ok).size(), 1u);
  EXPECT_THROW(readCsv(std::filesystem::path("/nonexistent/log.csv")), ConfigError);
}

TEST(Plot, DeterministicSvg) {
  const TrajectoryLog log = shortRun(0.05);
  std::ostringstream a, b, c, d;
  trajectorySvg(a, log, "run");
  trajectorySvg(b, log, "run");
  errorSvg(c, log, "run");
  errorSvg(d, log, "run");
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(c.str(), d.str());
  EXPECT_NE(a.str().find("<svg"), std::string::npos);
  EXPECT_NE(a.str().find("</svg>"), std::string::npos);
  EXPECT_NE(c.str().find("<polyline"), std::string::npos);
  EXPECT_EQ(a.str().find("nan"), std::string::npos);
}

TEST(Plot, EmptyLogStillRenders) {
  TrajectoryLog log;
  log.layout = GroupLayout({3, 3});
  std::ostringstream a, b;
  EXPECT_NO_THROW(trajectorySvg(a, log));
  EXPECT_NO_THROW(errorSvg(b, log));
  EXPECT_NE(a.str().find("</svg>"), std::string::npos);
  EXPECT_NE(b.str().find("</svg>"), std::string::npos);
}
