#include "seroifr/spline.hpp"

#include <cmath>

#include "seroifr/common.hpp"

namespace seroifr {

void NaturalSplineDef::validate() const {
  if (!(boundary_lo < boundary_hi)) fail(Errc::bad_config, "spline boundary knots must be ordered");
  double prev = boundary_lo;
  for (double k : internal_knots) {
    if (!(k > prev)) fail(Errc::bad_config, "spline internal knots must ascend strictly inside the boundary");
    prev = k;
  }
  if (!internal_knots.empty() && !(internal_knots.back() < boundary_hi))
    fail(Errc::bad_config, "spline internal knots must lie below the upper boundary knot");
}

NaturalCubicBasis::NaturalCubicBasis(const NaturalSplineDef& def) {
  def.validate();
  knots_.push_back(def.boundary_lo);
  for (double k : def.internal_knots) knots_.push_back(k);
  knots_.push_back(def.boundary_hi);
  dim_ = static_cast<int>(knots_.size()) - 1;

  // orthogonalize over the integer age grid: center, then sequentially remove
  // projections on earlier columns, then scale to unit grid sd
  Eigen::MatrixXd grid(101, dim_);
  for (int a = 0; a <= 100; ++a) grid.row(a) = raw(static_cast<double>(a)).transpose();
  center_ = grid.colwise().mean();
  Eigen::MatrixXd centered = grid.rowwise() - center_.transpose();

  transform_ = Eigen::MatrixXd::Identity(dim_, dim_);
  Eigen::MatrixXd ortho = centered;
  for (int j = 0; j < dim_; ++j) {
    for (int k = 0; k < j; ++k) {
      double proj = ortho.col(k).dot(centered.col(j)) / ortho.col(k).squaredNorm();
      ortho.col(j) -= proj * ortho.col(k);
      transform_.col(j) -= proj * transform_.col(k);
    }
    double sd = std::sqrt(ortho.col(j).squaredNorm() / 101.0);
    if (sd <= 0) fail(Errc::degenerate_fit, "spline basis column collapsed during orthogonalization");
    ortho.col(j) /= sd;
    transform_.col(j) /= sd;
  }
}

Eigen::VectorXd NaturalCubicBasis::raw(double age) const {
  const std::size_t K = knots_.size();
  auto cube_plus = [](double v) { return v > 0 ? v * v * v : 0.0; };
  auto d = [&](std::size_t k) {
    return (cube_plus(age - knots_[k]) - cube_plus(age - knots_[K - 1])) / (knots_[K - 1] - knots_[k]);
  };
  Eigen::VectorXd out(dim_);
  out[0] = age;
  for (std::size_t k = 0; k + 2 < K; ++k) out[static_cast<int>(k) + 1] = d(k) - d(K - 2);
  return out;
}

Eigen::VectorXd NaturalCubicBasis::operator()(double age) const {
  return transform_.transpose() * (raw(age) - center_);
}

Eigen::VectorXd basis_eval(const NaturalSplineDef& def, double age) {
  return NaturalCubicBasis(def)(age);
}

}  // namespace seroifr
