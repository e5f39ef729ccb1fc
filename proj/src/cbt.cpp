#include "mtsf/cbt.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mtsf/errors.hpp"

namespace mtsf {

GroupLayout::GroupLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) {
    throw InvalidLayout("layout must contain at least one group");
  }
  first_robot_.reserve(sizes_.size());
  for (std::size_t g = 0; g < sizes_.size(); ++g) {
    if (sizes_[g] < 2) {
      throw InvalidLayout("group " + std::to_string(g + 1) + " has " +
                          std::to_string(sizes_[g]) +
                          " robots; every group needs at least 2");
    }
    first_robot_.push_back(robots_);
    robots_ += sizes_[g];
  }
}

int GroupLayout::groupOf(int robot) const {
  for (int g = groups() - 1; g >= 0; --g) {
    if (robot >= first_robot_[g]) return g;
  }
  return 0;
}

RowBlock GroupLayout::intraBlock(int g) const {
  int offset = 0;
  for (int k = 0; k < g; ++k) offset += intraCount(k);
  return {2 * offset, 2 * intraCount(g)};
}

std::string GroupLayout::describe() const {
  std::ostringstream out;
  for (std::size_t g = 0; g < sizes_.size(); ++g) {
    if (g) out << ',';
    out << sizes_[g];
  }
  return out.str();
}

Eigen::MatrixXd jacobiCoefficients(int n) {
  if (n < 2) {
    throw InvalidLayout("shape variables need at least 2 points, got " +
                        std::to_string(n));
  }
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  const double s = 1.0 / std::sqrt(2.0);
  c(0, 0) = -s;
  c(0, 1) = s;
  for (int k = 2; k < n; ++k) {
    c.row(k - 1).head(k).setConstant(-1.0 / k);
    c(k - 1, k) = 1.0;
  }
  c.row(n - 1).setConstant(1.0 / n);
  return c;
}

Eigen::MatrixXd expandPlanar(const Eigen::MatrixXd& coefficients) {
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(2 * coefficients.rows(), 2 * coefficients.cols());
  for (Eigen::Index i = 0; i < coefficients.rows(); ++i) {
    for (Eigen::Index j = 0; j < coefficients.cols(); ++j) {
      out(2 * i, 2 * j) = coefficients(i, j);
      out(2 * i + 1, 2 * j + 1) = coefficients(i, j);
    }
  }
  return out;
}

Eigen::MatrixXd buildSingleGroupPhi(int rho) {
  return expandPlanar(jacobiCoefficients(rho));
}

namespace {

Eigen::MatrixXd multiGroupCoefficients(const GroupLayout& layout) {
  const int n = layout.robots();
  const int m = layout.groups();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);

  // Step 1: intra rows, block diagonal over groups.
  int row = 0;
  for (int g = 0; g < m; ++g) {
    const int rho = layout.groupSize(g);
    const Eigen::MatrixXd local = jacobiCoefficients(rho);
    c.block(row, layout.firstRobot(g), rho - 1, rho) = local.topRows(rho - 1);
    row += rho - 1;
  }

  // Steps 2-3: inter rows are the shape rows applied to the group centroids.
  if (m > 1) {
    Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(m, n);
    for (int g = 0; g < m; ++g) {
      centroids.row(g)
          .segment(layout.firstRobot(g), layout.groupSize(g))
          .setConstant(1.0 / layout.groupSize(g));
    }
    c.block(row, 0, m - 1, n) = jacobiCoefficients(m).topRows(m - 1) * centroids;
    row += m - 1;
  }

  // Step 4: overall centroid.
  c.row(row).setConstant(1.0 / n);
  return c;
}

}  // namespace

CbtMatrix::CbtMatrix(GroupLayout layout) : layout_(std::move(layout)) {
  coefficients_ = multiGroupCoefficients(layout_);
  phi_ = expandPlanar(coefficients_);

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(coefficients_);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  condition_ = smallest > 0.0 ? sv(0) / smallest
                              : std::numeric_limits<double>::infinity();
  if (!(condition_ < 1e12)) {
    std::ostringstream msg;
    msg << "Phi_M for layout [" << layout_.describe()
        << "] is numerically singular (condition number " << condition_ << ")";
    throw ConstructionError(msg.str());
  }

  // Block structure makes inverting the scalar matrix enough.
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(coefficients_);
  inverse_ = expandPlanar(lu.inverse());
}

Eigen::VectorXd CbtMatrix::toTransformed(const Eigen::VectorXd& x) const {
  if (x.size() != phi_.cols()) {
    throw ShapeError("expected stacked positions of length " +
                     std::to_string(phi_.cols()) + ", got " +
                     std::to_string(x.size()));
  }
  return phi_ * x;
}

Eigen::VectorXd CbtMatrix::fromTransformed(const Eigen::VectorXd& z) const {
  if (z.size() != inverse_.cols()) {
    throw ShapeError("expected transformed vector of length " +
                     std::to_string(inverse_.cols()) + ", got " +
                     std::to_string(z.size()));
  }
  return inverse_ * z;
}

CbtMatrix buildMultiGroupPhi(const GroupLayout& layout) {
  return CbtMatrix(layout);
}

Eigen::VectorXd shapeVariablesOf(const Eigen::VectorXd& points) {
  if (points.size() % 2 != 0) {
    throw ShapeError("stacked planar points must have even length");
  }
  const int n = static_cast<int>(points.size() / 2);
  const Eigen::MatrixXd phi = buildSingleGroupPhi(n);
  return (phi * points).head(2 * (n - 1));
}

std::vector<std::string> transformedNames(const GroupLayout& layout) {
  std::vector<std::string> names;
  names.reserve(layout.robots());
  for (int g = 0; g < layout.groups(); ++g) {
    for (int k = 0; k < layout.intraCount(g); ++k) {
      names.push_back(std::to_string(g + 1) + "_" + std::to_string(k + 1));
    }
  }
  for (int k = 0; k < layout.interCount(); ++k) {
    names.push_back("r_" + std::to_string(k + 1));
  }
  names.push_back("c");
  return names;
}

}  // namespace mtsf
