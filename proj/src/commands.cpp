#include "seroifr/commands.hpp"

#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "seroifr/common.hpp"
#include "seroifr/diagnostics.hpp"
#include "seroifr/io.hpp"
#include "seroifr/summaries.hpp"

namespace seroifr {

namespace {

std::vector<AgeDensity> build_densities(const StudyDataset& data, const ModelSpec& spec) {
  std::vector<AgeDensity> out;
  for (const auto& loc : data.locations)
    out.push_back(build_density(loc, data.national_populations.at(loc.country_id), spec.loess_span));
  return out;
}

ConvergenceReport run_report(const PosteriorDraws& draws) {
  std::vector<std::string> groups;
  for (int j = 0; j < draws.layout.dim(); ++j) groups.push_back(draws.layout.group(j));
  return convergence_report(draws.constrained, draws.names, groups);
}

Eigen::VectorXd truth_vector(const ParameterLayout& lay, const nlohmann::json& j) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(lay.dim());
  if (lay.has_ifr_block()) {
    for (int i = 0; i <= lay.ifr_dim(); ++i) c[lay.idx_sigma(i)] = 1.0;
    c[lay.idx_sigma_country()] = 1.0;
  }
  auto fill_block = [&](const nlohmann::json& arr, int base, int count, const std::string& what) {
    if (static_cast<int>(arr.size()) != count)
      fail(Errc::bad_config, "truth: " + what + " needs " + std::to_string(count) + " values");
    for (int i = 0; i < count; ++i) c[base + i] = arr[i].get<double>();
  };

  if (!j.contains("locations")) fail(Errc::bad_config, "truth file needs a 'locations' object");
  for (int l = 0; l < lay.n_locations(); ++l) {
    const std::string& id = lay.location_ids()[l];
    if (!j["locations"].contains(id)) fail(Errc::bad_config, "truth: missing location '" + id + "'");
    const auto& jl = j["locations"][id];
    if (!jl.contains("gamma0")) fail(Errc::bad_config, "truth: location '" + id + "' needs gamma0");
    c[lay.idx_gamma0(l)] = jl["gamma0"].get<double>();
    if (lay.sero_dim() > 0) {
      if (!jl.contains("gamma")) fail(Errc::bad_config, "truth: location '" + id + "' needs gamma");
      fill_block(jl["gamma"], lay.idx_gamma(l, 0), lay.sero_dim(), id + ".gamma");
    }
    if (lay.has_ifr_block()) {
      if (!jl.contains("beta")) fail(Errc::bad_config, "truth: location '" + id + "' needs beta");
      fill_block(jl["beta"], lay.idx_beta_loc(l, 0), lay.ifr_dim() + 1, id + ".beta");
    }
  }
  for (int t = 0; t < lay.n_sampled_tests(); ++t) {
    const std::string& id = lay.sampled_test_ids()[t];
    if (!j.contains("tests") || !j["tests"].contains(id))
      fail(Errc::bad_config, "truth: missing test '" + id + "'");
    c[lay.idx_sens(t)] = j["tests"][id]["sens"].get<double>();
    c[lay.idx_spec(t)] = j["tests"][id]["spec"].get<double>();
  }
  if (lay.has_ifr_block()) {
    if (j.contains("beta_global"))
      fill_block(j["beta_global"], lay.idx_beta_global(0), lay.ifr_dim() + 1, "beta_global");
    if (j.contains("sigma")) fill_block(j["sigma"], lay.idx_sigma(0), lay.ifr_dim() + 1, "sigma");
    if (j.contains("sigma_country")) c[lay.idx_sigma_country()] = j["sigma_country"].get<double>();
    if (j.contains("beta_country"))
      for (int k = 0; k < lay.n_countries(); ++k) {
        const std::string& id = lay.country_ids()[k];
        if (j["beta_country"].contains(id)) c[lay.idx_beta_country(k)] = j["beta_country"][id].get<double>();
      }
  }
  return c;
}

void write_summary_outputs(const std::filesystem::path& out_dir, const PreparedModel& model,
                           const PosteriorDraws& draws, const RunConfig& cfg) {
  const auto& lay = draws.layout;
  std::vector<CurveSummary> curves;
  std::vector<Age60Row> age60;
  std::vector<PopulationIfrSummary> pop_rows;
  std::vector<RoganGladenRow> rg_rows;

  AgeDensity standard = standardized_density(model.densities());
  for (int l = 0; l < lay.n_locations(); ++l) {
    curves.push_back(curve_summary(model, draws, l, CurveKind::sero));
    if (lay.has_ifr_block()) {
      curves.push_back(curve_summary(model, draws, l, CurveKind::ifr));
      age60.push_back({lay.location_ids()[l], ifr_at_age(model, draws, l, 60.0, cfg.benchmark_ifr_60)});
      pop_rows.push_back(
          population_ifr(model, draws, l, model.densities()[l], cfg.model.pop_ifr_mode));
      PopulationIfrSummary std_row =
          population_ifr(model, draws, l, standard, cfg.model.pop_ifr_mode);
      std_row.mode = "STANDARDIZED";
      pop_rows.push_back(std_row);
    }
    const LocationRecord& loc = model.data().locations[l];
    auto [sens, spec] = crude_rates(model.data().test_for(loc));
    for (const auto& obs : loc.serology) {
      if (sens + spec <= 1.0) continue;  // naive estimator undefined for this assay
      rg_rows.push_back({loc.location_id, obs.bin, rogan_gladen(obs, sens, spec)});
    }
  }
  write_curves_csv(out_dir / "curves.csv", curves);
  write_rogan_gladen_csv(out_dir / "rogan_gladen.csv", rg_rows);
  if (lay.has_ifr_block()) {
    write_population_ifr_csv(out_dir / "population_ifr.csv", pop_rows);
    write_age60_csv(out_dir / "age60_ifr.csv", age60);
  }
}

}  // namespace

PreparedModel load_model(const RunConfig& cfg) {
  StudyDataset data = load_dataset(cfg.dataset_paths());
  std::vector<AgeDensity> densities = build_densities(data, cfg.model);
  return PreparedModel(std::move(data), std::move(densities), cfg.model);
}

int cmd_fit(const RunConfig& cfg) {
  try {
    PreparedModel model = load_model(cfg);
    std::filesystem::create_directories(cfg.output_dir);

    LogDensityFn target{model.layout().dim(), [&model](const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
                          LogDensityResult r = model.log_posterior(q);
                          grad = std::move(r.gradient);
                          return r.value;
                        }};
    RawDraws raw = nuts_sample(target, cfg.sampler);
    PosteriorDraws draws = make_posterior_draws(model.layout(), std::move(raw));

    ConvergenceReport report = run_report(draws);

    write_draws_csv(cfg.output_dir / "draws.csv", draws);
    write_sampler_stats_csv(cfg.output_dir / "sampler_stats.csv", draws.raw);
    write_diagnostics_csv(cfg.output_dir / "diagnostics.csv", report);
    write_summary_outputs(cfg.output_dir, model, draws, cfg);
    if (cfg.export_densities)
      for (int l = 0; l < model.layout().n_locations(); ++l)
        write_density_csv(cfg.output_dir / ("density_" + model.layout().location_ids()[l] + ".csv"),
                          model.densities()[l]);

    RunDiagnosis sampler_diag = diagnose_run(draws.raw);
    nlohmann::json manifest;
    manifest["config"] = cfg.to_json();
    manifest["seed"] = cfg.sampler.seed;
    manifest["versions"] = {{"seroifr", "0.1.0"}, {"compiler", __VERSION__}};
    manifest["convergence"] = {{"pass", report.pass},
                               {"rhat_max_threshold", report.thresholds.rhat_max},
                               {"ess_min_threshold", report.thresholds.ess_min},
                               {"failing", report.failing}};
    manifest["sampler"] = {{"divergences", sampler_diag.total_divergences},
                           {"max_depth_hits", sampler_diag.total_max_depth_hits},
                           {"energy_flag", sampler_diag.energy_flag}};
    std::ofstream mf(cfg.output_dir / "run_manifest.json");
    mf << manifest.dump(2) << "\n";

    if (!report.pass) {
      std::cerr << "convergence thresholds not met for " << report.failing.size() << " parameter(s)\n";
      return 2;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& truth_file) {
  try {
    PreparedModel model = load_model(cfg);
    std::ifstream in(truth_file);
    if (!in) fail(Errc::missing_file, "cannot open truth file " + truth_file.string());
    nlohmann::json jt;
    try {
      in >> jt;
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::bad_config, truth_file.string() + ": " + e.what());
    }
    Eigen::VectorXd truth = truth_vector(model.layout(), jt);
    StudyDataset sim = model.simulate(truth, cfg.sampler.seed);

    std::filesystem::create_directories(cfg.output_dir);
    save_dataset(sim, DatasetPaths::in_dir(cfg.output_dir));

    nlohmann::json out;
    auto names = model.layout().names();
    for (int i = 0; i < model.layout().dim(); ++i) out["parameters"][names[i]] = truth[i];
    out["seed"] = cfg.sampler.seed;
    std::ofstream tf(cfg.output_dir / "truth.json");
    tf << out.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_diagnose(const std::filesystem::path& draws_csv, const std::filesystem::path& out_dir,
                 const std::vector<std::string>& trace_params) {
  try {
    StoredDraws stored = read_draws_csv(draws_csv);
    std::vector<std::string> groups;
    for (const auto& n : stored.names) groups.push_back(ParameterLayout::group_of_name(n));
    ConvergenceReport report = convergence_report(stored.chains, stored.names, groups);
    std::filesystem::create_directories(out_dir);
    write_diagnostics_csv(out_dir / "diagnostics.csv", report);
    for (const auto& p : trace_params) write_trace_csv(out_dir / ("trace_" + p + ".csv"), stored, p);
    return report.pass ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_summarize(const RunConfig& cfg, const std::filesystem::path& draws_csv) {
  try {
    PreparedModel model = load_model(cfg);
    StoredDraws stored = read_draws_csv(draws_csv);
    auto expected = model.layout().names();
    if (stored.names != expected)
      fail(Errc::bad_config, draws_csv.string() + ": parameter columns do not match this config");
    PosteriorDraws draws = posterior_draws_from_constrained(model.layout(), std::move(stored.chains));
    std::filesystem::create_directories(cfg.output_dir);
    write_summary_outputs(cfg.output_dir, model, draws, cfg);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace seroifr
