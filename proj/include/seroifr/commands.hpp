#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "seroifr/model.hpp"
#include "seroifr/run_config.hpp"

namespace seroifr {

/// Load the dataset named by the config, build per-location age densities and
/// prepare the model.
PreparedModel load_model(const RunConfig& cfg);

/// Exit codes: 0 success (fit: converged), 1 data/config error,
/// 2 ran but failed the convergence thresholds (outputs still written).
int cmd_fit(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& truth_file);
int cmd_diagnose(const std::filesystem::path& draws_csv, const std::filesystem::path& out_dir,
                 const std::vector<std::string>& trace_params);
int cmd_summarize(const RunConfig& cfg, const std::filesystem::path& draws_csv);

}  // namespace seroifr
