#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "seroifr/commands.hpp"

namespace {

seroifr::RunConfig load_config(const std::string& config_path, const std::optional<std::string>& out_dir,
                               const std::optional<std::uint64_t>& seed) {
  seroifr::RunConfig cfg = seroifr::RunConfig::from_json_file(config_path);
  if (out_dir) cfg.output_dir = *out_dir;
  if (seed) cfg.sampler.seed = *seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint age-specific seroprevalence and infection-fatality-rate estimation"};
  app.require_subcommand(1);

  std::string config_path, truth_path, draws_path = "draws.csv", diag_out = ".";
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> trace_params;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "master seed (overrides config)");
  };

  CLI::App* fit = app.add_subcommand("fit", "run the MCMC fit and write all outputs");
  add_common(fit);

  CLI::App* simulate = app.add_subcommand("simulate", "forward-simulate a dataset from true parameters");
  add_common(simulate);
  simulate->add_option("--truth", truth_path, "JSON file of true parameter values")->required();

  CLI::App* diagnose = app.add_subcommand("diagnose", "recompute convergence diagnostics from draws.csv");
  diagnose->add_option("--draws", draws_path, "stored draws.csv")->required();
  diagnose->add_option("--out", diag_out, "output directory");
  diagnose->add_option("--trace", trace_params, "parameter name(s) to export as trace CSVs");

  CLI::App* summarize = app.add_subcommand("summarize", "re-derive summary CSVs from draws.csv");
  add_common(summarize);
  summarize->add_option("--draws", draws_path, "stored draws.csv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return seroifr::cmd_fit(load_config(config_path, out_dir, seed));
    if (simulate->parsed()) return seroifr::cmd_simulate(load_config(config_path, out_dir, seed), truth_path);
    if (diagnose->parsed()) return seroifr::cmd_diagnose(draws_path, diag_out, trace_params);
    if (summarize->parsed()) return seroifr::cmd_summarize(load_config(config_path, out_dir, seed), draws_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
