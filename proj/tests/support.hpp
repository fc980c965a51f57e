#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "seroifr/age_density.hpp"
#include "seroifr/dataset.hpp"
#include "seroifr/layout.hpp"
#include "seroifr/model.hpp"

namespace test_support {

using namespace seroifr;

/// Scratch directory under the build tree, wiped on construction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

inline AgeBin bin(long lo, std::optional<long> hi) { return AgeBin::from_labels(lo, hi); }

/// Three locations in two countries sharing two assays; five serology bins
/// and six death bins per location; 5-year population bins with a decreasing
/// pyramid. Counts (positives/deaths) start at zero and are filled by
/// forward simulation.
inline StudyDataset make_template_dataset(long n_per_sero_bin = 2000, double total_pop = 1e6) {
  StudyDataset d;
  d.tests.push_back({"assay_1", 500, 460, 2000, 1989});
  d.tests.push_back({"assay_2", 300, 264, 1500, 1492});

  auto make_loc = [&](const std::string& id, const std::string& country, const std::string& test) {
    LocationRecord loc;
    loc.location_id = id;
    loc.country_id = country;
    loc.test_id = test;
    for (long a : {0L, 20L, 40L, 60L}) loc.serology.push_back({bin(a, a + 19), n_per_sero_bin, 0});
    loc.serology.push_back({bin(80, std::nullopt), n_per_sero_bin, 0});
    loc.deaths.push_back({bin(0, 29), 0});
    loc.deaths.push_back({bin(30, 49), 0});
    loc.deaths.push_back({bin(50, 59), 0});
    loc.deaths.push_back({bin(60, 69), 0});
    loc.deaths.push_back({bin(70, 79), 0});
    loc.deaths.push_back({bin(80, std::nullopt), 0});
    double weight_sum = 0.0;
    std::vector<double> weights;
    for (int k = 0; k < 20; ++k) {
      weights.push_back(std::exp(-0.055 * 5.0 * k));
      weight_sum += weights.back();
    }
    double count_sum = 0.0;
    for (int k = 0; k < 20; ++k) {
      long lo = 5 * k;
      auto b = k == 19 ? bin(lo, std::nullopt) : bin(lo, lo + 4);
      loc.population_bins.push_back({b, total_pop * weights[k] / weight_sum});
      count_sum += loc.population_bins.back().count;
    }
    loc.total_population = count_sum;  // matches the loader's derivation exactly
    d.locations.push_back(std::move(loc));
  };
  make_loc("site_a", "country_x", "assay_1");
  make_loc("site_b", "country_x", "assay_1");
  make_loc("site_c", "country_y", "assay_2");

  for (const char* c : {"country_x", "country_y"}) {
    std::vector<PopulationBin> nat;
    double decay = std::string(c) == "country_x" ? 0.045 : 0.06;
    double sum = 0.0;
    std::vector<double> w;
    for (int k = 0; k < 10; ++k) {
      w.push_back(std::exp(-decay * 10.0 * k));
      sum += w.back();
    }
    for (int k = 0; k < 10; ++k) {
      long lo = 10 * k;
      auto b = k == 9 ? bin(lo, std::nullopt) : bin(lo, lo + 9);
      nat.push_back({b, 5e7 * w[k] / sum});
    }
    d.national_populations[c] = std::move(nat);
  }
  return d;
}

/// Ground-truth constrained parameter vector for the template dataset. The
/// location curves are deliberately dispersed (sigma around 0.5) so the
/// hierarchy is informed away from the degenerate sigma -> 0 corner.
inline Eigen::VectorXd synthetic_truth(const ParameterLayout& lay) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(lay.dim());
  const double g0[3] = {-1.0986, -0.85, -1.3};
  const double g1[3] = {0.05, 0.0, -0.04};
  const double g2[3] = {-0.03, 0.0, 0.05};
  const double b0[3] = {-6.0, -5.3, -6.7};
  const double bs[3][3] = {{1.7, 0.8, -0.5}, {1.0, 0.1, 0.2}, {1.5, 0.45, -0.6}};
  for (int l = 0; l < lay.n_locations(); ++l) {
    c[lay.idx_gamma0(l)] = g0[l];
    if (lay.sero_dim() >= 2) {
      c[lay.idx_gamma(l, 0)] = g1[l];
      c[lay.idx_gamma(l, 1)] = g2[l];
    }
    if (lay.has_ifr_block()) {
      c[lay.idx_beta_loc(l, 0)] = b0[l];
      for (int i = 1; i <= lay.ifr_dim() && i <= 3; ++i) c[lay.idx_beta_loc(l, i)] = bs[l][i - 1];
    }
  }
  if (lay.has_ifr_block()) {
    c[lay.idx_beta_global(0)] = -6.0;
    c[lay.idx_beta_global(1)] = 1.4;
    c[lay.idx_beta_global(2)] = 0.45;
    c[lay.idx_beta_global(3)] = -0.3;
    for (int k = 0; k < lay.n_countries(); ++k) c[lay.idx_beta_country(k)] = k == 0 ? 0.4 : -0.4;
    for (int i = 0; i <= lay.ifr_dim(); ++i) c[lay.idx_sigma(i)] = 0.5;
    c[lay.idx_sigma_country()] = 0.5;
  }
  for (int t = 0; t < lay.n_sampled_tests(); ++t) {
    c[lay.idx_sens(t)] = t == 0 ? 0.92 : 0.88;
    c[lay.idx_spec(t)] = t == 0 ? 0.99 : 0.995;
  }
  return c;
}

inline std::vector<AgeDensity> densities_for(const StudyDataset& d, double span = 0.75) {
  std::vector<AgeDensity> out;
  for (const auto& loc : d.locations)
    out.push_back(build_density(loc, d.national_populations.at(loc.country_id), span));
  return out;
}

/// Template dataset with observations drawn from the synthetic truth.
inline PreparedModel make_synthetic_model(std::uint64_t seed, const ModelSpec& spec = {},
                                          long n_per_sero_bin = 2000, double total_pop = 1e6) {
  StudyDataset tpl = make_template_dataset(n_per_sero_bin, total_pop);
  auto dens = densities_for(tpl, spec.loess_span);
  PreparedModel shell(tpl, dens, spec);
  StudyDataset sim = shell.simulate(synthetic_truth(shell.layout()), seed);
  return PreparedModel(std::move(sim), std::move(dens), spec);
}

inline void save_dataset_dir(const StudyDataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_dataset(d, DatasetPaths::in_dir(dir));
}

}  // namespace test_support
