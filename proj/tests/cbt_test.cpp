#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mtsf/cbt.hpp"
#include "mtsf/errors.hpp"
#include "mtsf/scenario.hpp"

using namespace mtsf;

namespace {

Eigen::VectorXd ninePoints() {
  Eigen::VectorXd x(18);
  x << -4, 7, -3, 8, -6, 12, -1, -5, 0, 6, 1, -8, 3, -12, -7, -16, 4, 16;
  return x;
}

Eigen::Vector2d point(const Eigen::VectorXd& x, int i) { return x.segment<2>(2 * i); }

}  // namespace

TEST(SingleGroupPhi, ThreeRobotsRowsMatchJacobiPattern) {
  const Eigen::MatrixXd phi = buildSingleGroupPhi(3);
  ASSERT_EQ(phi.rows(), 6);
  ASSERT_EQ(phi.cols(), 6);
  Eigen::VectorXd x(6);
  x << 1, 2, 4, -1, 0.5, 3;
  const Eigen::VectorXd z = phi * x;
  const Eigen::Vector2d p1(1, 2), p2(4, -1), p3(0.5, 3);
  EXPECT_TRUE(z.segment<2>(0).isApprox((p2 - p1) / std::sqrt(2.0), 1e-15));
  EXPECT_TRUE(z.segment<2>(2).isApprox(p3 - 0.5 * (p1 + p2), 1e-15));
  EXPECT_TRUE(z.segment<2>(4).isApprox((p1 + p2 + p3) / 3.0, 1e-15));
}

TEST(SingleGroupPhi, TwoRobots) {
  const Eigen::MatrixXd phi = buildSingleGroupPhi(2);
  Eigen::VectorXd x(4);
  x << 1, 1, 3, -1;
  const Eigen::VectorXd z = phi * x;
  EXPECT_TRUE(z.head<2>().isApprox(Eigen::Vector2d(2, -2) / std::sqrt(2.0)));
  EXPECT_TRUE(z.tail<2>().isApprox(Eigen::Vector2d(2, 0)));
}

TEST(SingleGroupPhi, CoincidentPointsHaveZeroShape) {
  for (int rho = 2; rho <= 6; ++rho) {
    Eigen::VectorXd x(2 * rho);
    for (int i = 0; i < rho; ++i) x.segment<2>(2 * i) = Eigen::Vector2d(3.5, -2.25);
    const Eigen::VectorXd z = buildSingleGroupPhi(rho) * x;
    EXPECT_LT(z.head(2 * (rho - 1)).cwiseAbs().maxCoeff(), 1e-14) << rho;
    EXPECT_TRUE(z.tail<2>().isApprox(Eigen::Vector2d(3.5, -2.25), 1e-15));
  }
}

TEST(SingleGroupPhi, RejectsSingleRobot) {
  EXPECT_THROW(buildSingleGroupPhi(1), InvalidLayout);
  EXPECT_THROW(GroupLayout({3, 1}), InvalidLayout);
  EXPECT_THROW(GroupLayout(std::vector<int>{}), InvalidLayout);
}

TEST(SingleGroupPhi, PlanarExpansionUsesIdenticalCoefficients) {
  const Eigen::MatrixXd phi = buildSingleGroupPhi(4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const auto block = phi.block<2, 2>(2 * i, 2 * j);
      EXPECT_EQ(block(0, 0), block(1, 1));
      EXPECT_EQ(block(0, 1), 0.0);
      EXPECT_EQ(block(1, 0), 0.0);
    }
  }
}

TEST(GroupLayout, Bookkeeping) {
  const GroupLayout layout({3, 2, 4});
  EXPECT_EQ(layout.robots(), 9);
  EXPECT_EQ(layout.groups(), 3);
  EXPECT_EQ(layout.totalIntraCount(), 6);
  EXPECT_EQ(layout.interCount(), 2);
  EXPECT_EQ(layout.firstRobot(2), 5);
  EXPECT_EQ(layout.groupOf(4), 1);
  EXPECT_EQ(layout.intraBlock(1).start, 4);
  EXPECT_EQ(layout.intraBlock(2).size, 6);
  EXPECT_EQ(layout.interBlock().start, 12);
  EXPECT_EQ(layout.centroidBlock().start, 16);
  EXPECT_EQ(layout.describe(), "3,2,4");
  const auto names = transformedNames(layout);
  ASSERT_EQ(names.size(), 9u);
  EXPECT_EQ(names[0], "1_1");
  EXPECT_EQ(names[2], "2_1");
  EXPECT_EQ(names[6], "r_1");
  EXPECT_EQ(names[8], "c");
}

TEST(MultiGroupPhi, NineRobotsInterRowsActOnGroupCentroids) {
  const CbtMatrix phi(GroupLayout({3, 3, 3}));
  ASSERT_EQ(phi.matrix().rows(), 18);
  const Eigen::VectorXd x = ninePoints();
  const Eigen::VectorXd z = phi.toTransformed(x);
  Eigen::Vector2d mu[3];
  for (int g = 0; g < 3; ++g) {
    mu[g] = (point(x, 3 * g) + point(x, 3 * g + 1) + point(x, 3 * g + 2)) / 3.0;
  }
  // Uniform convention: second minus first.
  EXPECT_TRUE(z.segment<2>(12).isApprox((mu[1] - mu[0]) / std::sqrt(2.0), 1e-14));
  EXPECT_TRUE(z.segment<2>(14).isApprox(mu[2] - 0.5 * (mu[0] + mu[1]), 1e-14));
  const Eigen::MatrixXd centroid = phi.rows(GroupLayout({3, 3, 3}).centroidBlock());
  for (int i = 0; i < 9; ++i) {
    EXPECT_TRUE((centroid.block<2, 2>(0, 2 * i).isApprox(Eigen::Matrix2d::Identity() / 9.0)));
  }
}

TEST(MultiGroupPhi, InitialCentroidIsMeanOfListedPositions) {
  const CbtMatrix phi(GroupLayout({3, 3, 3}));
  const Eigen::VectorXd z = phi.toTransformed(ninePoints());
  EXPECT_NEAR(z(16), -13.0 / 9.0, 1e-15);
  EXPECT_NEAR(z(17), 8.0 / 9.0, 1e-15);
}

TEST(MultiGroupPhi, SingleGroupEqualsSingleGroupPhi) {
  const CbtMatrix phi(GroupLayout({2}));
  EXPECT_TRUE(phi.matrix().isApprox(buildSingleGroupPhi(2)));
  const CbtMatrix phi4(GroupLayout({4}));
  EXPECT_TRUE(phi4.matrix().isApprox(buildSingleGroupPhi(4)));
}

TEST(MultiGroupPhi, ThreeTwoLayoutIsInvertible) {
  const CbtMatrix phi = buildMultiGroupPhi(GroupLayout({3, 2}));
  ASSERT_EQ(phi.matrix().rows(), 10);
  EXPECT_GT(std::abs(phi.matrix().determinant()), 1e-6);
  const Eigen::MatrixXd eye = phi.inverse() * phi.matrix();
  EXPECT_LT((eye - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(phi.conditionNumber(), 100.0);
}

TEST(MultiGroupPhi, OriginMapsToZero) {
  const CbtMatrix phi(GroupLayout({3, 3, 3}));
  EXPECT_EQ(phi.toTransformed(Eigen::VectorXd::Zero(18)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(MultiGroupPhi, DimensionMismatchThrows) {
  const CbtMatrix phi(GroupLayout({3, 3}));
  EXPECT_THROW(phi.toTransformed(Eigen::VectorXd::Zero(10)), ShapeError);
  EXPECT_THROW(phi.fromTransformed(Eigen::VectorXd::Zero(14)), ShapeError);
}

TEST(MultiGroupPhi, ZeroShapeReconstructsCoincidentRobots) {
  const CbtMatrix phi(GroupLayout({3, 2, 2}));
  Eigen::VectorXd z = Eigen::VectorXd::Zero(14);
  z.tail<2>() << 2.0, -7.0;
  const Eigen::VectorXd x = phi.fromTransformed(z);
  for (int i = 0; i < 7; ++i) {
    EXPECT_TRUE(point(x, i).isApprox(Eigen::Vector2d(2.0, -7.0), 1e-12));
  }
}

TEST(EquilateralShape, SideSevenMagnitudes) {
  const Eigen::VectorXd z = shapeVariablesOf(equilateralPoints(7.0));
  ASSERT_EQ(z.size(), 4);
  EXPECT_NEAR(z(0), -4.9497, 5e-5);
  EXPECT_NEAR(z(1), 0.0, 1e-14);
  EXPECT_NEAR(z(2), 0.0, 1e-14);
  EXPECT_NEAR(z(3), 6.0622, 5e-5);
  EXPECT_NEAR(std::abs(z(0)), 7.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(z(3), 7.0 * std::sqrt(3.0) / 2.0, 1e-14);

  const Eigen::VectorXd r = shapeVariablesOf(equilateralPoints(20.0));
  EXPECT_NEAR(r(0), -14.1421, 5e-5);
  EXPECT_NEAR(r(3), 17.3205, 5e-5);
}

TEST(EquilateralShape, DesiredConfigurationReconstructsNestedTriangles) {
  const GroupLayout layout({3, 3, 3});
  const CbtMatrix phi(layout);
  Eigen::VectorXd z(18);
  const Eigen::VectorXd intra = shapeVariablesOf(equilateralPoints(7.0));
  z << intra, intra, intra, shapeVariablesOf(equilateralPoints(20.0)), 0.0, 0.0;
  const Eigen::VectorXd x = phi.fromTransformed(z);
  Eigen::Vector2d mu[3];
  for (int g = 0; g < 3; ++g) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        EXPECT_NEAR((point(x, 3 * g + a) - point(x, 3 * g + b)).norm(), 7.0, 1e-12);
      }
    }
    mu[g] = (point(x, 3 * g) + point(x, 3 * g + 1) + point(x, 3 * g + 2)) / 3.0;
  }
  EXPECT_NEAR((mu[0] - mu[1]).norm(), 20.0, 1e-12);
  EXPECT_NEAR((mu[1] - mu[2]).norm(), 20.0, 1e-12);
  EXPECT_NEAR((mu[0] - mu[2]).norm(), 20.0, 1e-12);
}

class RandomLayouts : public ::testing::Test {
 protected:
  std::mt19937 rng{20240611};

  GroupLayout draw() {
    std::uniform_int_distribution<int> groups(1, 4), size(2, 5);
    std::vector<int> sizes(static_cast<std::size_t>(groups(rng)));
    for (auto& s : sizes) s = size(rng);
    return GroupLayout(sizes);
  }

  Eigen::VectorXd positions(int n) {
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    Eigen::VectorXd x(2 * n);
    for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = u(rng);
    return x;
  }
};

TEST_F(RandomLayouts, Roundtrip) {
  for (int trial = 0; trial < 200; ++trial) {
    const GroupLayout layout = draw();
    const CbtMatrix phi(layout);
    const Eigen::VectorXd x = positions(layout.robots());
    const Eigen::VectorXd back = phi.fromTransformed(phi.toTransformed(x));
    EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-10) << layout.describe();
  }
}

TEST_F(RandomLayouts, TranslationInvarianceAndCentroid) {
  for (int trial = 0; trial < 200; ++trial) {
    const GroupLayout layout = draw();
    const CbtMatrix phi(layout);
    const int n = layout.robots();
    const Eigen::VectorXd x = positions(n);
    const Eigen::Vector2d shift(13.25, -4.5);
    Eigen::VectorXd moved = x;
    for (int i = 0; i < n; ++i) moved.segment<2>(2 * i) += shift;
    const Eigen::VectorXd z0 = phi.toTransformed(x);
    const Eigen::VectorXd z1 = phi.toTransformed(moved);
    const Eigen::Index shape = 2 * (n - 1);
    EXPECT_LE((z1.head(shape) - z0.head(shape)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((z1.tail<2>() - z0.tail<2>() - shift).cwiseAbs().maxCoeff(), 1e-12);

    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (int i = 0; i < n; ++i) mean += x.segment<2>(2 * i);
    mean /= n;
    EXPECT_LE((z0.tail<2>() - mean).cwiseAbs().maxCoeff(), 1e-13);

    for (Eigen::Index r = 0; r < n - 1; ++r) {
      EXPECT_NEAR(phi.coefficients().row(r).sum(), 0.0, 1e-14);
    }
  }
}

TEST_F(RandomLayouts, BlocksAgreeWithSingleGroupConstruction) {
  for (int trial = 0; trial < 100; ++trial) {
    const GroupLayout layout = draw();
    const CbtMatrix phi(layout);
    const Eigen::VectorXd x = positions(layout.robots());
    const Eigen::VectorXd z = phi.toTransformed(x);
    for (int g = 0; g < layout.groups(); ++g) {
      const Eigen::VectorXd local =
          x.segment(2 * layout.firstRobot(g), 2 * layout.groupSize(g));
      const Eigen::VectorXd expect = shapeVariablesOf(local);
      EXPECT_LE((layout.intraBlock(g).of(z) - expect).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}
