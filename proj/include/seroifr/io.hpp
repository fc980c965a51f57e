#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seroifr/diagnostics.hpp"
#include "seroifr/draws.hpp"
#include "seroifr/summaries.hpp"

namespace seroifr {

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws);

/// Constrained draw table read back from draws.csv: per-chain matrices plus
/// the column names (in file order, excluding chain/iteration).
struct StoredDraws {
  std::vector<std::string> names;
  std::vector<Eigen::MatrixXd> chains;
};
StoredDraws read_draws_csv(const std::filesystem::path& path);

void write_sampler_stats_csv(const std::filesystem::path& path, const RawDraws& raw);
void write_diagnostics_csv(const std::filesystem::path& path, const ConvergenceReport& report);
void write_trace_csv(const std::filesystem::path& path, const StoredDraws& draws, const std::string& param);

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSummary>& curves);
void write_population_ifr_csv(const std::filesystem::path& path,
                              const std::vector<PopulationIfrSummary>& rows);

struct Age60Row {
  std::string location_id;
  IfrAtAge summary;
};
void write_age60_csv(const std::filesystem::path& path, const std::vector<Age60Row>& rows);

struct RoganGladenRow {
  std::string location_id;
  AgeBin bin;
  RoganGladenEstimate est;
};
void write_rogan_gladen_csv(const std::filesystem::path& path, const std::vector<RoganGladenRow>& rows);

void write_density_csv(const std::filesystem::path& path, const AgeDensity& f);

}  // namespace seroifr
