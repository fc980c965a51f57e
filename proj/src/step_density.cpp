#include "seroifr/step_density.hpp"

#include <algorithm>
#include <cmath>

#include "seroifr/common.hpp"

namespace seroifr {

namespace {

std::vector<std::pair<AgeBin, double>> sorted_disjoint(std::vector<std::pair<AgeBin, double>> bins) {
  if (bins.empty()) fail(Errc::schema_violation, "no bins given");
  std::sort(bins.begin(), bins.end(), [](const auto& a, const auto& b) { return a.first.lo < b.first.lo; });
  for (std::size_t i = 0; i + 1 < bins.size(); ++i)
    if (bins[i].first.overlaps(bins[i + 1].first))
      fail(Errc::bin_overlap, "bins " + bins[i].first.describe() + " and " + bins[i + 1].first.describe() + " overlap");
  return bins;
}

void check_normalized(const std::vector<std::pair<AgeBin, double>>& bins) {
  double total = 0.0;
  for (const auto& [bin, p] : bins) {
    if (p < 0) fail(Errc::non_normalized, "negative proportion in bin " + bin.describe());
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    fail(Errc::non_normalized, "bin proportions sum to " + std::to_string(total) + ", expected 1");
}

// Appends contiguous pieces, inserting explicit zero-height pieces over gaps.
struct StepBuilder {
  StepDensity out;
  void piece(double lo, double hi, double h) {
    if (!(hi > lo)) return;
    if (out.edges.empty()) {
      out.edges.push_back(lo);
    } else if (out.edges.back() < lo) {
      out.edges.push_back(lo);
      out.heights.push_back(0.0);
    }
    out.edges.push_back(hi);
    out.heights.push_back(h);
  }
};

}  // namespace

double StepDensity::value(double age) const {
  // pieces are [edges[i], edges[i+1]); upper_bound finds the piece containing age
  auto it = std::upper_bound(edges.begin(), edges.end(), age);
  if (it == edges.begin() || it == edges.end()) return 0.0;
  return heights[static_cast<std::size_t>(it - edges.begin()) - 1];
}

double StepDensity::total_mass() const {
  double m = 0.0;
  for (std::size_t i = 0; i < heights.size(); ++i) m += heights[i] * (edges[i + 1] - edges[i]);
  return m;
}

void StepDensity::validate() const {
  if (edges.size() != heights.size() + 1 || heights.empty())
    fail(Errc::schema_violation, "step density needs one more edge than heights");
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    if (!(edges[i] < edges[i + 1])) fail(Errc::schema_violation, "step density edges must ascend");
  for (double h : heights)
    if (h < 0 || !std::isfinite(h)) fail(Errc::non_normalized, "step density heights must be finite and >= 0");
  double m = total_mass();
  if (std::abs(m - 1.0) > 1e-9)
    fail(Errc::non_normalized, "step density mass is " + std::to_string(m) + ", expected 1");
}

StepDensity expand_step(const std::vector<std::pair<AgeBin, double>>& bins_in) {
  auto bins = sorted_disjoint(bins_in);
  check_normalized(bins);
  StepBuilder b;
  for (const auto& [bin, p] : bins) b.piece(bin.lo, bin.hi, p / bin.width());
  b.out.validate();
  return b.out;
}

StepDensity refine_with_national(const std::vector<std::pair<AgeBin, double>>& local_in,
                                 const StepDensity& national_step) {
  auto local = sorted_disjoint(local_in);
  check_normalized(local);

  StepBuilder b;
  for (const auto& [bin, p] : local) {
    if (bin.width() <= 5.0) {
      b.piece(bin.lo, bin.hi, p / bin.width());
      continue;
    }
    // national values summed at the integer ages inside [lo, hi)
    double denom = 0.0;
    for (long k = static_cast<long>(std::ceil(bin.lo)); k < static_cast<long>(std::ceil(bin.hi)); ++k)
      denom += national_step.value(static_cast<double>(k));
    if (denom <= 0.0)
      fail(Errc::zero_national_mass, "national step has zero mass over local bin " + bin.describe());
    double scale = p / denom;
    for (std::size_t i = 0; i < national_step.heights.size(); ++i) {
      double lo = std::max(bin.lo, national_step.edges[i]);
      double hi = std::min(bin.hi, national_step.edges[i + 1]);
      if (hi > lo) b.piece(lo, hi, national_step.heights[i] * scale);
    }
  }
  b.out.validate();
  return b.out;
}

}  // namespace seroifr
