#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seroifr/age_bin.hpp"

namespace seroifr {

struct SerologyBinObs {
  AgeBin bin;
  long n_tested = 0;
  long n_positive = 0;
  bool operator==(const SerologyBinObs&) const = default;
};

struct DeathBinObs {
  AgeBin bin;
  long deaths = 0;
  bool operator==(const DeathBinObs&) const = default;
};

struct PopulationBin {
  AgeBin bin;
  double count = 0.0;
  bool operator==(const PopulationBin&) const = default;
};

/// Lab validation counts for one antibody test assay: positive controls for
/// sensitivity, negative controls for specificity.
struct TestValidation {
  std::string test_id;
  long n_sens = 0, x_sens = 0;
  long n_spec = 0, x_spec = 0;
  bool operator==(const TestValidation&) const = default;
};

struct LocationRecord {
  std::string location_id;
  std::string country_id;
  std::string test_id;
  double total_population = 0.0;  // derived: sum of population_bins counts
  std::vector<SerologyBinObs> serology;
  std::vector<DeathBinObs> deaths;
  std::vector<PopulationBin> population_bins;
  bool operator==(const LocationRecord&) const = default;
};

struct StudyDataset {
  std::vector<LocationRecord> locations;
  std::vector<TestValidation> tests;
  std::map<std::string, std::vector<PopulationBin>> national_populations;

  int location_index(const std::string& id) const;  // -1 if absent
  int test_index(const std::string& id) const;
  const TestValidation& test_for(const LocationRecord& loc) const;
  std::vector<std::string> country_ids() const;  // unique, order of first appearance

  bool has_deaths() const;
  bool operator==(const StudyDataset&) const = default;
};

struct DatasetPaths {
  std::filesystem::path serology, deaths, tests, locations, population, national_population;
  static DatasetPaths in_dir(const std::filesystem::path& dir);
};

/// Parse and validate all six input tables. Every malformed input throws an
/// Error naming the file, line and rule; nothing is silently defaulted.
StudyDataset load_dataset(const DatasetPaths& paths);

void save_dataset(const StudyDataset& data, const DatasetPaths& paths);

/// (x_sens/n_sens, x_spec/n_spec)
std::pair<double, double> crude_rates(const TestValidation& v);

}  // namespace seroifr
