#pragma once

#include <Eigen/Core>
#include <vector>

namespace seroifr {

struct NaturalSplineDef {
  double boundary_lo = 0.0;
  double boundary_hi = 0.0;
  std::vector<double> internal_knots;  // strictly inside the boundary, ascending

  int dim() const { return static_cast<int>(internal_knots.size()) + 1; }
  void validate() const;
};

/// Natural cubic spline basis of age, excluding the intercept column: cubic
/// between the boundary knots, linear beyond them (vanishing second
/// derivative at and outside the boundary).
///
/// Construction: truncated-power natural spline columns
///   h_1(x) = x,   h_{k+1}(x) = d_k(x) - d_{K-1}(x),
///   d_k(x) = [ (x - k_k)_+^3 - (x - k_K)_+^3 ] / (k_K - k_k),
/// over the full knot sequence (boundary + internal). The columns are then
/// orthogonalized against the constant column and against each other
/// (Gram-Schmidt under the uniform measure on the integer age grid 0..100)
/// and scaled to unit standard deviation on that grid, so coefficient priors
/// act on comparable, decorrelated O(1) covariates. Any invertible affine
/// recombination of columns spans the same curve space.
class NaturalCubicBasis {
 public:
  explicit NaturalCubicBasis(const NaturalSplineDef& def);

  int dim() const { return dim_; }
  Eigen::VectorXd operator()(double age) const;

 private:
  Eigen::VectorXd raw(double age) const;

  std::vector<double> knots_;
  int dim_ = 0;
  Eigen::VectorXd center_;
  Eigen::MatrixXd transform_;  // maps centered raw columns to the orthonormal set
};

/// One-off evaluation (builds the basis each call).
Eigen::VectorXd basis_eval(const NaturalSplineDef& def, double age);

}  // namespace seroifr
