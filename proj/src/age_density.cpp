#include "seroifr/age_density.hpp"

#include <algorithm>
#include <cmath>

#include "seroifr/common.hpp"
#include "seroifr/loess.hpp"

namespace seroifr {

double AgeDensity::operator()(double age) const {
  if (age <= 0.0) return grid_values.front();
  if (age >= kAgeCeiling) return grid_values.back();
  double fl = std::floor(age);
  std::size_t i = static_cast<std::size_t>(fl);
  double t = age - fl;
  return grid_values[i] + t * (grid_values[i + 1] - grid_values[i]);
}

double AgeDensity::grid_integral() const {
  double s = 0.5 * (grid_values.front() + grid_values.back());
  for (std::size_t i = 1; i + 1 < grid_values.size(); ++i) s += grid_values[i];
  return s;
}

void AgeDensity::validate() const {
  if (grid_values.size() != static_cast<std::size_t>(kAgeCeiling) + 1)
    fail(Errc::schema_violation, "age density grid must have 101 values");
  for (double v : grid_values)
    if (v < 0 || !std::isfinite(v)) fail(Errc::non_normalized, "age density values must be finite and >= 0");
  if (std::abs(grid_integral() - 1.0) > 1e-6)
    fail(Errc::non_normalized, "age density integral is " + std::to_string(grid_integral()) + ", expected 1");
}

AgeDensity smooth_to_density(const StepDensity& step, double loess_span) {
  std::vector<double> xs, ys;
  for (int a = 0; a <= 85; ++a) {
    xs.push_back(static_cast<double>(a));
    ys.push_back(step.value(static_cast<double>(a)));
  }
  xs.push_back(kAgeCeiling);
  ys.push_back(0.0);

  std::size_t distinct = 1;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] != xs[i - 1]) ++distinct;
  if (distinct < 4) fail(Errc::degenerate_fit, "fewer than 4 distinct sample points for smoothing");

  Loess fit(xs, ys, loess_span);
  AgeDensity out;
  out.grid_values.resize(101);
  for (int a = 0; a <= 100; ++a) out.grid_values[a] = fit.predict(static_cast<double>(a));

  double lowest = *std::min_element(out.grid_values.begin(), out.grid_values.end());
  if (lowest < 0.0)
    for (double& v : out.grid_values) v -= lowest;

  double integral = out.grid_integral();
  if (integral <= 0.0) fail(Errc::degenerate_fit, "smoothed density has nonpositive mass");
  for (double& v : out.grid_values) v /= integral;
  out.validate();
  return out;
}

double bin_mass(const AgeDensity& f, const AgeBin& bin, const QuadratureMesh& mesh) {
  if (bin.lo < 0 || bin.hi > kAgeCeiling)
    fail(Errc::schema_violation, "bin " + bin.describe() + " outside [0,100]");
  auto nodes = mesh.nodes(bin);
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.ages.size(); ++i) s += nodes.weights[i] * f(nodes.ages[i]);
  return s;
}

double population_in_bin(const LocationRecord& loc, const AgeDensity& f, const AgeBin& bin,
                         const QuadratureMesh& mesh) {
  return loc.total_population * bin_mass(f, bin, mesh);
}

AgeDensity build_density(const LocationRecord& loc, const std::vector<PopulationBin>& national_bins,
                         double loess_span) {
  double total = 0.0, nat_total = 0.0;
  for (const auto& pb : loc.population_bins) total += pb.count;
  for (const auto& pb : national_bins) nat_total += pb.count;
  if (total <= 0) fail(Errc::count_violation, "location '" + loc.location_id + "' has zero population");

  std::vector<std::pair<AgeBin, double>> local;
  bool any_wide = false;
  for (const auto& pb : loc.population_bins) {
    local.emplace_back(pb.bin, pb.count / total);
    if (pb.bin.width() > 5.0) any_wide = true;
  }

  StepDensity step;
  if (any_wide) {
    if (nat_total <= 0)
      fail(Errc::count_violation, "national population for location '" + loc.location_id + "' is empty");
    std::vector<std::pair<AgeBin, double>> national;
    for (const auto& pb : national_bins) national.emplace_back(pb.bin, pb.count / nat_total);
    step = refine_with_national(local, expand_step(national));
  } else {
    step = expand_step(local);
  }
  return smooth_to_density(step, loess_span);
}

}  // namespace seroifr
