#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mtsf/errors.hpp"
#include "mtsf/potential.hpp"

using namespace mtsf;

namespace {

const PotentialParams kDefault{2.0, 0.5};

Eigen::Vector2d atDistance(double s, double angle = 0.3) {
  return {s * std::cos(angle), s * std::sin(angle)};
}

}  // namespace

TEST(PairPotential, VanishesAtAndBeyondSensingRadius) {
  const Eigen::Vector2d o = Eigen::Vector2d::Zero();
  EXPECT_EQ(pairPotential(o, atDistance(2.0), kDefault), 0.0);
  EXPECT_EQ(pairPotential(o, atDistance(2.5), kDefault), 0.0);
  EXPECT_EQ(pairPotential(o, atDistance(100.0), kDefault), 0.0);
  EXPECT_EQ(pairPotentialGradient(o, atDistance(3.0), kDefault).norm(), 0.0);
}

TEST(PairPotential, UnitSeparationValue) {
  EXPECT_NEAR(pairPotential(Eigen::Vector2d::Zero(), atDistance(1.0), kDefault), 16.0, 1e-12);
}

TEST(PairPotential, DivergesTowardSafeDistance) {
  const Eigen::Vector2d o = Eigen::Vector2d::Zero();
  double last = 0.0;
  for (double s : {1.5, 1.0, 0.7, 0.55, 0.501, 0.50001}) {
    const double v = pairPotential(o, atDistance(s), kDefault);
    EXPECT_GT(v, last);
    last = v;
  }
  EXPECT_GT(last, 1e8);
}

TEST(PairPotential, BarrierViolationReportsPair) {
  const Eigen::Vector2d o = Eigen::Vector2d::Zero();
  try {
    pairPotential(o, atDistance(0.5), kDefault, 2, 6);
    FAIL();
  } catch (const BarrierViolation& e) {
    EXPECT_EQ(e.first(), 2);
    EXPECT_EQ(e.second(), 6);
    EXPECT_NEAR(e.distance(), 0.5, 1e-15);
  }
  EXPECT_THROW(pairPotentialGradient(o, atDistance(0.2), kDefault), BarrierViolation);
}

TEST(PairPotential, ParamsValidation) {
  EXPECT_NO_THROW(kDefault.validate());
  EXPECT_THROW((PotentialParams{0.5, 0.5}.validate()), ConfigError);
  EXPECT_THROW((PotentialParams{2.0, 0.0}.validate()), ConfigError);
  EXPECT_THROW((PotentialParams{1.0, 2.0}.validate()), ConfigError);
}

TEST(PairPotential, GradientContinuousAtSensingRadius) {
  const Eigen::Vector2d o = Eigen::Vector2d::Zero();
  const Eigen::Vector2d inside = pairPotentialGradient(atDistance(2.0 - 1e-9), o, kDefault);
  EXPECT_LT(inside.norm(), 1e-7);
}

TEST(AvoidanceGradient, FarApartIsZero) {
  Eigen::VectorXd x(6);
  x << 0, 0, 10, 0, 0, 10;
  for (int i = 0; i < 3; ++i) EXPECT_EQ(avoidanceGradient(x, i, kDefault).norm(), 0.0);
  EXPECT_EQ(stackedAvoidance(x, kDefault).norm(), 0.0);
}

TEST(AvoidanceGradient, PairIsAntisymmetricAndRepulsive) {
  Eigen::VectorXd x(4);
  x << 0.0, 0.0, 1.2, 0.4;
  const Eigen::Vector2d g1 = avoidanceGradient(x, 0, kDefault);
  const Eigen::Vector2d g2 = avoidanceGradient(x, 1, kDefault);
  EXPECT_LT((g1 + g2).norm(), 1e-14);
  // Robot 1 is pushed away from robot 2.
  EXPECT_LT(g1.dot(x.segment<2>(2) - x.segment<2>(0)), 0.0);
  const Eigen::VectorXd stacked = stackedAvoidance(x, kDefault);
  EXPECT_LT((stacked.head<2>() - g1).norm(), 1e-14);
  EXPECT_LT((stacked.tail<2>() - g2).norm(), 1e-14);
}

TEST(AvoidanceGradient, MatchesCentralDifferencesInAnnulus) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> sep(0.55, 1.95), ang(0.0, 2 * std::numbers::pi);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Vector2d qj(0.3, -0.7);
    const Eigen::Vector2d qi = qj + atDistance(sep(rng), ang(rng));
    const Eigen::Vector2d g = pairPotentialGradient(qi, qj, kDefault);
    Eigen::Vector2d fd;
    for (int k = 0; k < 2; ++k) {
      Eigen::Vector2d e = Eigen::Vector2d::Zero();
      e(k) = h;
      fd(k) = (pairPotential(qi + e, qj, kDefault) - pairPotential(qi - e, qj, kDefault)) / (2 * h);
    }
    EXPECT_LE((g - fd).norm(), 1e-5 * std::max(g.norm(), 1e-300)) << trial;
  }
}

TEST(AvoidanceGradient, StackedIsNegativeGradientOfTotal) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  const double h = 1e-6;
  int checked = 0;
  while (checked < 20) {
    Eigen::VectorXd x(8);
    for (auto& v : x) v = u(rng);
    if (closestPair(x).distance < 0.6) continue;
    const Eigen::VectorXd g = stackedAvoidance(x, kDefault);
    for (Eigen::Index k = 0; k < 8; ++k) {
      Eigen::VectorXd a = x, b = x;
      a(k) += h;
      b(k) -= h;
      const double fd = -(totalPotential(a, kDefault) - totalPotential(b, kDefault)) / (2 * h);
      EXPECT_NEAR(g(k), fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
    ++checked;
  }
}

TEST(TransformedPotential, FarApartIsZero) {
  const CbtMatrix phi(GroupLayout({2, 2}));
  Eigen::VectorXd x(8);
  x << 0, 0, 5, 0, 0, 5, 5, 5;
  EXPECT_EQ(transformedPotential(x, phi, kDefault).transformed.norm(), 0.0);
}

TEST(TransformedPotential, TranslationInvariant) {
  const CbtMatrix phi(GroupLayout({3, 2}));
  Eigen::VectorXd x(10);
  x << 0, 0, 1.1, 0.2, 0.4, 1.0, 3.0, 3.0, 3.9, 3.5;
  Eigen::VectorXd moved = x;
  for (int i = 0; i < 5; ++i) moved.segment<2>(2 * i) += Eigen::Vector2d(-40.0, 12.5);
  const auto a = transformedPotential(x, phi, kDefault);
  const auto b = transformedPotential(moved, phi, kDefault);
  EXPECT_LT((a.transformed - b.transformed).cwiseAbs().maxCoeff(), 1e-10);
  // Pair forces cancel in the centroid row.
  EXPECT_LT(a.transformed.tail<2>().norm(), 1e-12);
}

TEST(TransformedPotential, OneInteractingPairEqualsMatrixProduct) {
  const GroupLayout layout({3, 3});
  const CbtMatrix phi(layout);
  Eigen::VectorXd x(12);
  x << 0, 0, 1.0, 0.3, 10, 0, 30, 30, 40, 30, 35, 40;
  const auto field = transformedPotential(x, phi, kDefault);
  EXPECT_TRUE(field.stacked.segment(4, 8).isZero());
  EXPECT_LT((field.transformed - phi.matrix() * field.stacked).norm(), 1e-14);
  // Group 2 does not interact, so its intra rows see nothing.
  EXPECT_EQ(layout.intraBlock(1).of(field.transformed).norm(), 0.0);
  EXPECT_GT(layout.intraBlock(0).of(field.transformed).norm(), 0.0);
}

TEST(ClosestPair, FindsMinimum) {
  Eigen::VectorXd x(6);
  x << 0, 0, 5, 0, 5, 1.5;
  const auto p = closestPair(x);
  EXPECT_DOUBLE_EQ(p.distance, 1.5);
  EXPECT_EQ(p.first, 1);
  EXPECT_EQ(p.second, 2);
  EXPECT_TRUE(std::isinf(closestPair(Eigen::VectorXd::Zero(2)).distance));
}
