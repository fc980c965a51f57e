#include "seroifr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seroifr/common.hpp"
#include "seroifr/csv.hpp"

namespace seroifr {

namespace {

std::string opt_label(const std::optional<long>& v) { return v ? std::to_string(*v) : std::string(); }

AgeBin bin_from_row(const CsvTable& t, std::size_t r) {
  long lo = t.integer(r, "age_lo");
  auto hi = t.opt_integer(r, "age_hi");
  try {
    return AgeBin::from_labels(lo, hi);
  } catch (const Error& e) {
    fail(Errc::schema_violation, t.file() + " line " + std::to_string(t.line_of(r)) + ": " + e.what());
  }
}

void check_disjoint(const std::vector<AgeBin>& bins, const std::string& what, const std::string& loc) {
  for (std::size_t i = 0; i < bins.size(); ++i)
    for (std::size_t j = i + 1; j < bins.size(); ++j)
      if (bins[i].overlaps(bins[j]))
        fail(Errc::bin_overlap, what + " bins " + bins[i].describe() + " and " + bins[j].describe() +
                                    " overlap for location '" + loc + "'");
}

// Population tables must tile [0, 100] exactly: sorted, contiguous, ending at the ceiling.
void check_tiling(std::vector<PopulationBin>& bins, const std::string& what, const std::string& key) {
  if (bins.empty()) fail(Errc::schema_violation, what + ": no population bins for '" + key + "'");
  std::sort(bins.begin(), bins.end(), [](const auto& a, const auto& b) { return a.bin.lo < b.bin.lo; });
  if (bins.front().bin.lo != 0.0)
    fail(Errc::schema_violation, what + " for '" + key + "': bins must start at age 0");
  for (std::size_t i = 0; i + 1 < bins.size(); ++i) {
    if (bins[i].bin.hi > bins[i + 1].bin.lo)
      fail(Errc::bin_overlap, what + " for '" + key + "': bins " + bins[i].bin.describe() + " and " +
                                  bins[i + 1].bin.describe() + " overlap");
    if (bins[i].bin.hi < bins[i + 1].bin.lo)
      fail(Errc::schema_violation, what + " for '" + key + "': gap between " + bins[i].bin.describe() +
                                       " and " + bins[i + 1].bin.describe());
  }
  if (bins.back().bin.hi != kAgeCeiling)
    fail(Errc::schema_violation, what + " for '" + key + "': bins must reach age 100 (use an open top bin)");
}

}  // namespace

int StudyDataset::location_index(const std::string& id) const {
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (locations[i].location_id == id) return static_cast<int>(i);
  return -1;
}

int StudyDataset::test_index(const std::string& id) const {
  for (std::size_t i = 0; i < tests.size(); ++i)
    if (tests[i].test_id == id) return static_cast<int>(i);
  return -1;
}

const TestValidation& StudyDataset::test_for(const LocationRecord& loc) const {
  int i = test_index(loc.test_id);
  if (i < 0) fail(Errc::referential_integrity, "location '" + loc.location_id + "' references unknown test '" + loc.test_id + "'");
  return tests[i];
}

std::vector<std::string> StudyDataset::country_ids() const {
  std::vector<std::string> out;
  for (const auto& loc : locations)
    if (std::find(out.begin(), out.end(), loc.country_id) == out.end()) out.push_back(loc.country_id);
  return out;
}

bool StudyDataset::has_deaths() const {
  for (const auto& loc : locations)
    if (!loc.deaths.empty()) return true;
  return false;
}

DatasetPaths DatasetPaths::in_dir(const std::filesystem::path& dir) {
  DatasetPaths p;
  p.serology = dir / "serology.csv";
  p.deaths = dir / "deaths.csv";
  p.tests = dir / "tests.csv";
  p.locations = dir / "locations.csv";
  p.population = dir / "population.csv";
  p.national_population = dir / "national_population.csv";
  return p;
}

StudyDataset load_dataset(const DatasetPaths& paths) {
  StudyDataset data;

  CsvTable tests_t(paths.tests);
  tests_t.require_columns({"test_id", "n_sens", "x_sens", "n_spec", "x_spec"});
  std::set<std::string> test_ids;
  for (std::size_t r = 0; r < tests_t.rows(); ++r) {
    TestValidation v;
    v.test_id = tests_t.str(r, "test_id");
    v.n_sens = tests_t.integer(r, "n_sens");
    v.x_sens = tests_t.integer(r, "x_sens");
    v.n_spec = tests_t.integer(r, "n_spec");
    v.x_spec = tests_t.integer(r, "x_spec");
    if (!test_ids.insert(v.test_id).second)
      fail(Errc::schema_violation, tests_t.file() + " line " + std::to_string(tests_t.line_of(r)) +
                                       ": duplicate test_id '" + v.test_id + "'");
    if (v.n_sens < 1 || v.n_spec < 1)
      fail(Errc::count_violation, tests_t.file() + " line " + std::to_string(tests_t.line_of(r)) +
                                      ": n_sens and n_spec must be >= 1");
    if (v.x_sens < 0 || v.x_sens > v.n_sens || v.x_spec < 0 || v.x_spec > v.n_spec)
      fail(Errc::count_violation, tests_t.file() + " line " + std::to_string(tests_t.line_of(r)) +
                                      ": control positives must lie in [0, n]");
    data.tests.push_back(std::move(v));
  }

  CsvTable loc_t(paths.locations);
  loc_t.require_columns({"location_id", "country_id", "test_id"});
  std::set<std::string> loc_ids;
  for (std::size_t r = 0; r < loc_t.rows(); ++r) {
    LocationRecord loc;
    loc.location_id = loc_t.str(r, "location_id");
    loc.country_id = loc_t.str(r, "country_id");
    loc.test_id = loc_t.str(r, "test_id");
    if (!loc_ids.insert(loc.location_id).second)
      fail(Errc::schema_violation, loc_t.file() + " line " + std::to_string(loc_t.line_of(r)) +
                                       ": duplicate location_id '" + loc.location_id + "'");
    if (data.test_index(loc.test_id) < 0)
      fail(Errc::referential_integrity, loc_t.file() + " line " + std::to_string(loc_t.line_of(r)) +
                                            ": unknown test_id '" + loc.test_id + "'");
    data.locations.push_back(std::move(loc));
  }

  auto require_location = [&](const CsvTable& t, std::size_t r, const std::string& id) -> LocationRecord& {
    int i = data.location_index(id);
    if (i < 0)
      fail(Errc::referential_integrity,
           t.file() + " line " + std::to_string(t.line_of(r)) + ": unknown location_id '" + id + "'");
    return data.locations[static_cast<std::size_t>(i)];
  };

  CsvTable sero_t(paths.serology);
  sero_t.require_columns({"location_id", "age_lo", "age_hi", "n_tested", "n_positive"});
  for (std::size_t r = 0; r < sero_t.rows(); ++r) {
    auto& loc = require_location(sero_t, r, sero_t.str(r, "location_id"));
    SerologyBinObs obs;
    obs.bin = bin_from_row(sero_t, r);
    obs.n_tested = sero_t.integer(r, "n_tested");
    obs.n_positive = sero_t.integer(r, "n_positive");
    if (obs.n_tested < 1)
      fail(Errc::count_violation, sero_t.file() + " line " + std::to_string(sero_t.line_of(r)) + ": n_tested must be >= 1");
    if (obs.n_positive < 0 || obs.n_positive > obs.n_tested)
      fail(Errc::count_violation, sero_t.file() + " line " + std::to_string(sero_t.line_of(r)) +
                                      ": n_positive must lie in [0, n_tested]");
    loc.serology.push_back(obs);
  }

  CsvTable death_t(paths.deaths);
  death_t.require_columns({"location_id", "age_lo", "age_hi", "deaths"});
  for (std::size_t r = 0; r < death_t.rows(); ++r) {
    auto& loc = require_location(death_t, r, death_t.str(r, "location_id"));
    DeathBinObs obs;
    obs.bin = bin_from_row(death_t, r);
    obs.deaths = death_t.integer(r, "deaths");
    if (obs.deaths < 0)
      fail(Errc::count_violation, death_t.file() + " line " + std::to_string(death_t.line_of(r)) + ": deaths must be >= 0");
    loc.deaths.push_back(obs);
  }

  CsvTable pop_t(paths.population);
  pop_t.require_columns({"location_id", "age_lo", "age_hi", "count"});
  for (std::size_t r = 0; r < pop_t.rows(); ++r) {
    auto& loc = require_location(pop_t, r, pop_t.str(r, "location_id"));
    PopulationBin pb;
    pb.bin = bin_from_row(pop_t, r);
    pb.count = pop_t.real(r, "count");
    if (pb.count < 0 || !std::isfinite(pb.count))
      fail(Errc::count_violation, pop_t.file() + " line " + std::to_string(pop_t.line_of(r)) + ": count must be >= 0");
    loc.population_bins.push_back(pb);
  }

  CsvTable nat_t(paths.national_population);
  nat_t.require_columns({"country_id", "age_lo", "age_hi", "count"});
  for (std::size_t r = 0; r < nat_t.rows(); ++r) {
    std::string cid = nat_t.str(r, "country_id");
    PopulationBin pb;
    pb.bin = bin_from_row(nat_t, r);
    pb.count = nat_t.real(r, "count");
    if (pb.count < 0 || !std::isfinite(pb.count))
      fail(Errc::count_violation, nat_t.file() + " line " + std::to_string(nat_t.line_of(r)) + ": count must be >= 0");
    data.national_populations[cid].push_back(pb);
  }

  // cross-table validation
  for (auto& loc : data.locations) {
    std::vector<AgeBin> sbins, dbins;
    for (const auto& s : loc.serology) sbins.push_back(s.bin);
    for (const auto& d : loc.deaths) dbins.push_back(d.bin);
    check_disjoint(sbins, "serology", loc.location_id);
    check_disjoint(dbins, "death", loc.location_id);

    check_tiling(loc.population_bins, paths.population.string(), loc.location_id);
    loc.total_population = 0.0;
    for (const auto& pb : loc.population_bins) loc.total_population += pb.count;
    if (loc.total_population <= 0)
      fail(Errc::count_violation, "location '" + loc.location_id + "' has zero total population");

    if (data.national_populations.find(loc.country_id) == data.national_populations.end())
      fail(Errc::referential_integrity, "country '" + loc.country_id + "' referenced by location '" +
                                            loc.location_id + "' has no national population table");
    std::sort(loc.serology.begin(), loc.serology.end(),
              [](const auto& a, const auto& b) { return a.bin.lo < b.bin.lo; });
    std::sort(loc.deaths.begin(), loc.deaths.end(),
              [](const auto& a, const auto& b) { return a.bin.lo < b.bin.lo; });
  }
  for (auto& [cid, bins] : data.national_populations)
    check_tiling(bins, paths.national_population.string(), cid);

  return data;
}

void save_dataset(const StudyDataset& data, const DatasetPaths& paths) {
  CsvWriter sero(paths.serology, {"location_id", "age_lo", "age_hi", "n_tested", "n_positive"});
  CsvWriter death(paths.deaths, {"location_id", "age_lo", "age_hi", "deaths"});
  CsvWriter pop(paths.population, {"location_id", "age_lo", "age_hi", "count"});
  for (const auto& loc : data.locations) {
    for (const auto& s : loc.serology)
      sero.row({loc.location_id, std::to_string(s.bin.lo_label()), opt_label(s.bin.hi_label()),
                std::to_string(s.n_tested), std::to_string(s.n_positive)});
    for (const auto& d : loc.deaths)
      death.row({loc.location_id, std::to_string(d.bin.lo_label()), opt_label(d.bin.hi_label()),
                 std::to_string(d.deaths)});
    for (const auto& p : loc.population_bins)
      pop.row({loc.location_id, std::to_string(p.bin.lo_label()), opt_label(p.bin.hi_label()),
               CsvWriter::num(p.count)});
  }
  CsvWriter tests(paths.tests, {"test_id", "n_sens", "x_sens", "n_spec", "x_spec"});
  for (const auto& t : data.tests)
    tests.row({t.test_id, std::to_string(t.n_sens), std::to_string(t.x_sens), std::to_string(t.n_spec),
               std::to_string(t.x_spec)});
  CsvWriter locs(paths.locations, {"location_id", "country_id", "test_id"});
  for (const auto& loc : data.locations) locs.row({loc.location_id, loc.country_id, loc.test_id});
  CsvWriter nat(paths.national_population, {"country_id", "age_lo", "age_hi", "count"});
  for (const auto& [cid, bins] : data.national_populations)
    for (const auto& p : bins)
      nat.row({cid, std::to_string(p.bin.lo_label()), opt_label(p.bin.hi_label()), CsvWriter::num(p.count)});
}

std::pair<double, double> crude_rates(const TestValidation& v) {
  return {static_cast<double>(v.x_sens) / static_cast<double>(v.n_sens),
          static_cast<double>(v.x_spec) / static_cast<double>(v.n_spec)};
}

}  // namespace seroifr
