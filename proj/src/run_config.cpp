#include "seroifr/run_config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "seroifr/common.hpp"

namespace seroifr {

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::missing_file, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::bad_config, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  try {
    if (!j.contains("data_dir")) fail(Errc::bad_config, "config field 'data_dir' is required");
    cfg.data_dir = base_dir / j["data_dir"].get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = base_dir / j["output_dir"].get<std::string>();
    if (j.contains("model")) cfg.model = ModelSpec::from_json(j["model"]);
    if (j.contains("sampler")) {
      const auto& s = j["sampler"];
      if (s.contains("chains")) cfg.sampler.chains = s["chains"].get<int>();
      if (s.contains("warmup")) cfg.sampler.warmup = s["warmup"].get<int>();
      if (s.contains("samples")) cfg.sampler.samples = s["samples"].get<int>();
      if (s.contains("target_accept")) cfg.sampler.target_accept = s["target_accept"].get<double>();
      if (s.contains("max_tree_depth")) cfg.sampler.max_tree_depth = s["max_tree_depth"].get<int>();
      if (s.contains("init_jitter")) cfg.sampler.init_jitter = s["init_jitter"].get<double>();
      if (s.contains("threads")) cfg.sampler.threads = s["threads"].get<int>();
    }
    if (!j.contains("seed")) fail(Errc::bad_config, "config field 'seed' is required (no implicit seeding)");
    cfg.sampler.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("benchmark_ifr_60")) cfg.benchmark_ifr_60 = j["benchmark_ifr_60"].get<double>();
    if (j.contains("export_densities")) cfg.export_densities = j["export_densities"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::bad_config, std::string("config: ") + e.what());
  }
  cfg.sampler.validate();
  cfg.model.validate();
  return cfg;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["data_dir"] = data_dir.string();
  j["output_dir"] = output_dir.string();
  j["seed"] = sampler.seed;
  j["model"] = model.to_json();
  j["sampler"] = {{"chains", sampler.chains},
                  {"warmup", sampler.warmup},
                  {"samples", sampler.samples},
                  {"target_accept", sampler.target_accept},
                  {"max_tree_depth", sampler.max_tree_depth},
                  {"init_jitter", sampler.init_jitter},
                  {"threads", sampler.threads}};
  if (benchmark_ifr_60) j["benchmark_ifr_60"] = *benchmark_ifr_60;
  j["export_densities"] = export_densities;
  return j;
}

}  // namespace seroifr
