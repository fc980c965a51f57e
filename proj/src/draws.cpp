#include "seroifr/draws.hpp"

#include "seroifr/common.hpp"

namespace seroifr {

Eigen::MatrixXd PosteriorDraws::stacked() const {
  Eigen::MatrixXd out(total_draws(), layout.dim());
  int row = 0;
  for (const auto& ch : constrained) {
    out.middleRows(row, ch.rows()) = ch;
    row += static_cast<int>(ch.rows());
  }
  return out;
}

PosteriorDraws make_posterior_draws(const ParameterLayout& layout, RawDraws raw) {
  PosteriorDraws out;
  out.layout = layout;
  out.names = layout.names();
  for (const auto& ch : raw.chains) {
    Eigen::MatrixXd c(ch.rows(), ch.cols());
    for (Eigen::Index r = 0; r < ch.rows(); ++r)
      c.row(r) = layout.to_constrained(ch.row(r).transpose()).transpose();
    out.constrained.push_back(std::move(c));
  }
  out.raw = std::move(raw);
  return out;
}

PosteriorDraws posterior_draws_from_constrained(const ParameterLayout& layout,
                                                std::vector<Eigen::MatrixXd> constrained) {
  if (constrained.empty()) fail(Errc::no_draws, "no draws given");
  PosteriorDraws out;
  out.layout = layout;
  out.names = layout.names();
  for (const auto& ch : constrained)
    if (ch.cols() != layout.dim()) fail(Errc::bad_config, "draw width does not match the parameter layout");
  out.constrained = std::move(constrained);
  return out;
}

}  // namespace seroifr
