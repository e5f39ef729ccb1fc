#pragma once

// Centroid-based transformation for multiple groups of planar robots.
//
// Stacked positions X = [p_1; ...; p_N] map to Z = [Z_1; ...; Z_m; Z_r; z_c]
// where Z_g are the intra-group shape variables of group g, Z_r the
// inter-group shape variables built on the group centroids and z_c the
// centroid of all robots. Every row acts on planar points through 2x2
// identity blocks, so the scalar coefficient matrix fully describes Phi.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mtsf {

// Index range [start, start + size) inside a stacked 2N vector.
struct RowBlock {
  Eigen::Index start = 0;
  Eigen::Index size = 0;

  template <typename Derived>
  auto of(Eigen::MatrixBase<Derived>& v) const {
    return v.segment(start, size);
  }
  template <typename Derived>
  auto of(const Eigen::MatrixBase<Derived>& v) const {
    return v.segment(start, size);
  }
};

class GroupLayout {
 public:
  // Throws InvalidLayout if sizes is empty or any group has fewer than 2 robots.
  explicit GroupLayout(std::vector<int> sizes);

  int groups() const { return static_cast<int>(sizes_.size()); }
  int robots() const { return robots_; }
  int groupSize(int g) const { return sizes_.at(g); }
  const std::vector<int>& sizes() const { return sizes_; }

  // Index of the first robot of group g.
  int firstRobot(int g) const { return first_robot_.at(g); }
  int groupOf(int robot) const;

  int intraCount(int g) const { return sizes_.at(g) - 1; }
  int totalIntraCount() const { return robots_ - groups(); }
  int interCount() const { return groups() - 1; }

  // Row blocks of the transformed vector (lengths are 2x the variable counts).
  RowBlock intraBlock(int g) const;
  RowBlock allIntraBlock() const { return {0, 2 * totalIntraCount()}; }
  RowBlock interBlock() const { return {2 * totalIntraCount(), 2 * interCount()}; }
  RowBlock centroidBlock() const { return {2 * (robots_ - 1), 2}; }

  int dimension() const { return 2 * robots_; }

  std::string describe() const;

  bool operator==(const GroupLayout&) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<int> first_robot_;
  int robots_ = 0;
};

// Scalar Jacobi-style coefficients for n points: row k < n-1 is the k-th shape
// variable, the last row is the centroid. Row 0 is (p_2 - p_1)/sqrt(2); row
// k >= 1 is p_{k+2} - mean(p_1..p_{k+1}).
Eigen::MatrixXd jacobiCoefficients(int n);

// Expands an r x c scalar coefficient matrix into 2r x 2c by Kronecker product
// with I_2.
Eigen::MatrixXd expandPlanar(const Eigen::MatrixXd& coefficients);

// [Phi_r; Phi_c] for one group of rho robots: 2(rho-1)+2 rows by 2 rho columns.
Eigen::MatrixXd buildSingleGroupPhi(int rho);

// Phi_M for a layout with its inverse cached. Immutable after construction.
class CbtMatrix {
 public:
  explicit CbtMatrix(GroupLayout layout);

  const GroupLayout& layout() const { return layout_; }
  const Eigen::MatrixXd& matrix() const { return phi_; }
  const Eigen::MatrixXd& inverse() const { return inverse_; }
  // Scalar N x N coefficient matrix underlying Phi_M.
  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  // 2-norm condition number of Phi_M.
  double conditionNumber() const { return condition_; }

  Eigen::MatrixXd rows(const RowBlock& block) const {
    return phi_.middleRows(block.start, block.size);
  }

  // Z = Phi_M X. Throws ShapeError on dimension mismatch.
  Eigen::VectorXd toTransformed(const Eigen::VectorXd& x) const;
  // X = Phi_M^{-1} Z. Throws ShapeError on dimension mismatch.
  Eigen::VectorXd fromTransformed(const Eigen::VectorXd& z) const;

 private:
  GroupLayout layout_;
  Eigen::MatrixXd coefficients_;
  Eigen::MatrixXd phi_;
  Eigen::MatrixXd inverse_;
  double condition_ = 0.0;
};

CbtMatrix buildMultiGroupPhi(const GroupLayout& layout);

// Shape variables (no centroid) of a point set under jacobiCoefficients.
// points is 2n stacked; result is 2(n-1).
Eigen::VectorXd shapeVariablesOf(const Eigen::VectorXd& points);

// Transformed-coordinate variable names, e.g. "1_2" (group 1, variable 2),
// "r_1", "c". One entry per planar variable (N entries).
std::vector<std::string> transformedNames(const GroupLayout& layout);

}  // namespace mtsf
