#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "seroifr/dataset.hpp"
#include "seroifr/model_spec.hpp"
#include "seroifr/sampler.hpp"

namespace seroifr {

/// Full run configuration: data location, model spec, sampler settings and
/// outputs. The seed is mandatory; every piece of randomness in a run flows
/// from it.
struct RunConfig {
  std::filesystem::path data_dir;
  std::filesystem::path output_dir = "out";
  ModelSpec model;
  SamplerConfig sampler;
  std::optional<double> benchmark_ifr_60;
  bool export_densities = false;

  DatasetPaths dataset_paths() const { return DatasetPaths::in_dir(data_dir); }

  static RunConfig from_json_file(const std::filesystem::path& path);
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  nlohmann::json to_json() const;
};

}  // namespace seroifr
