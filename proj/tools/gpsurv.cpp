// gpsurv command-line driver: simulate, fit, summarize, compare, study.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 convergence-gate failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpsurv/gpsurv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gpsurv;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kGate = 3 };

// Data problems (as opposed to configuration problems) exit with code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  if (!fs::exists(path)) throw ConfigError("config file '" + path + "' not found");
  return parse_run_config(read_text_file(path));
}

Dataset load_data(const std::string& path, const CsvSchema& schema) {
  if (!fs::exists(path)) throw DataError("data file '" + path + "' not found");
  try {
    return load_dataset(path, schema);
  } catch (const SchemaError& e) {
    throw DataError(e.what());
  } catch (const ParseError& e) {
    throw DataError(e.what());
  } catch (const ValidationError& e) {
    throw DataError(e.what());
  }
}

json config_echo(const RunConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.echo) j[k] = v;
  return j;
}

json coefficient_json(const std::vector<CoefficientSummary>& coefs) {
  json arr = json::array();
  for (const auto& c : coefs) {
    arr.push_back({{"name", c.name}, {"mean", c.mean}, {"sd", c.sd}, {"median", c.median},
                   {"lower", c.lower}, {"upper", c.upper}});
  }
  return arr;
}

std::vector<SampleChain> read_fit_chains(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("fit directory '" + dir.string() + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".samples") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .samples files in '" + dir.string() + "'");
  std::vector<SampleChain> chains;
  for (const auto& f : files) {
    try {
      chains.push_back(read_samples(read_text_file(f.string())));
    } catch (const ParseError& e) {
      throw DataError(f.filename().string() + ": " + e.what());
    }
  }
  return chains;
}

// Curves and partition summaries shared by `fit` and `summarize`.
void write_summaries(const fs::path& out, std::span<const ModelState> samples, std::size_t grid_points,
                     double grid_max, std::size_t bins, double level) {
  const double s_max = samples.front().partition.s_max();
  if (grid_max == 0.0) grid_max = s_max;
  if (grid_max > s_max) {
    throw ConfigError("grid maximum " + std::to_string(grid_max) + " exceeds s_max " +
                      std::to_string(s_max));
  }
  const auto grid = default_grid(grid_max, grid_points);
  write_file(out / "hazard.csv", write_curve_csv(baseline_hazard_curve(samples, grid, level)));
  std::vector<double> sgrid{0.0};
  sgrid.insert(sgrid.end(), grid.begin(), grid.end());
  write_file(out / "survival.csv", write_curve_csv(baseline_survival_curve(samples, sgrid, level)));
  const auto pp = partition_posterior(samples, bins);
  write_file(out / "j_posterior.csv", write_j_posterior_csv(pp));
  write_file(out / "split_positions.csv", write_split_histogram_csv(pp));
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.scenario.seed = *seed;
  cfg.scenario.validate();
  if (out_path.empty()) throw ConfigError("--out is required");
  const double limit = calibrate_censoring(cfg.scenario);
  Rng rng = make_stream(cfg.scenario.seed, 1);
  const Dataset d = simulate_dataset(cfg.scenario, limit, rng);
  write_file(out_path, write_dataset(d));
  std::cout << "wrote " << d.size() << " subjects (" << d.n_events() << " events) to " << out_path
            << "\n";
  return kOk;
}

int cmd_fit(const std::string& config_path, const std::string& data_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed, std::optional<std::size_t> n_chains) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.sampler.seed = *seed;
  if (n_chains) cfg.chains = *n_chains;
  validate_run_config(cfg);
  if (out_dir.empty()) throw ConfigError("--out is required");
  const Dataset d = load_data(data_path, cfg.schema);
  const Hyperparameters hp = resolve_hyperparameters(cfg.hp, d);

  const auto chains = run_chains(d, hp, cfg.sampler, cfg.chains);
  const auto samples = pooled_samples(chains);

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  for (std::size_t k = 0; k < chains.size(); ++k) {
    write_file(out / ("chain_" + std::to_string(k) + ".samples"), write_samples(chains[k]));
  }

  bool gate_ok = true;
  json psrf_json = nullptr;
  if (chains.size() >= 2) {
    const auto rep = psrf_report(chains, d.covariate_names(), cfg.psrf_threshold);
    write_file(out / "psrf.csv", write_psrf_csv(rep));
    gate_ok = rep.passed();
    psrf_json = json::array();
    for (const auto& r : rep.rows) {
      psrf_json.push_back({{"parameter", r.parameter}, {"psrf", r.value}, {"monitored", r.monitored},
                           {"flagged", r.flagged}});
    }
  }

  const FitSummary fs_ = fit_summary(log_likelihood_matrix(samples, d));
  std::string cpo = "subject,log_cpo\n";
  for (std::size_t i = 0; i < fs_.log_cpo.size(); ++i) {
    cpo += std::to_string(i + 1) + "," + detail::format_double(fs_.log_cpo[i]) + "\n";
  }
  write_file(out / "cpo.csv", cpo);

  std::vector<double> Js;
  for (const auto& s : samples) Js.push_back(static_cast<double>(s.partition.J()));
  json acc = json::array();
  for (const auto& c : chains) {
    json a = json::object();
    for (std::size_t m = 0; m < 4; ++m) {
      a[std::string(kMoveNames[m])] = {{"proposed", c.acceptance[m].proposed},
                                       {"accepted", c.acceptance[m].accepted},
                                       {"rate", c.acceptance[m].rate()}};
    }
    acc.push_back(a);
  }
  const std::string fingerprint = hex(dataset_fingerprint(d));
  json summary = {{"model_name", cfg.model_name},
                  {"dataset_fingerprint", fingerprint},
                  {"n", d.size()},
                  {"p", d.p()},
                  {"s_max", hp.s_max},
                  {"dic", fs_.dic},
                  {"lpml", fs_.lpml},
                  {"n_samples_used", fs_.n_samples_used},
                  {"coefficients", coefficient_json(coefficient_summaries(samples, d.covariate_names(), cfg.level))},
                  {"J_median", quantile(Js, 0.5)},
                  {"J_mean", mean(Js)},
                  {"acceptance", acc},
                  {"psrf", psrf_json},
                  {"psrf_gate_passed", gate_ok}};
  write_file(out / "summary.json", summary.dump(2) + "\n");

  write_summaries(out, samples, cfg.grid_points, 0.0, cfg.hist_bins, cfg.level);

  json manifest = {{"command", "fit"},
                   {"version", kVersion},
                   {"data", data_path},
                   {"dataset_fingerprint", fingerprint},
                   {"seed", cfg.sampler.seed},
                   {"chains", cfg.chains},
                   {"config", config_echo(cfg)}};
  write_file(out / "manifest.json", manifest.dump(2) + "\n");

  std::cout << cfg.model_name << ": DIC " << fs_.dic << ", LPML " << fs_.lpml << ", median J "
            << quantile(Js, 0.5) << "\n";
  if (!gate_ok) {
    std::cerr << "convergence gate failed: PSRF >= " << cfg.psrf_threshold << " (see psrf.csv)\n";
    return kGate;
  }
  return kOk;
}

int cmd_summarize(const std::string& config_path, const std::string& fit_dir, const std::string& out_dir,
                  std::optional<std::size_t> grid_points, double grid_max,
                  std::optional<std::size_t> bins) {
  RunConfig cfg = load_config(config_path);
  if (grid_points) cfg.grid_points = *grid_points;
  if (bins) cfg.hist_bins = *bins;
  validate_run_config(cfg);
  if (out_dir.empty()) throw ConfigError("--out is required");
  const auto chains = read_fit_chains(fit_dir);
  const auto samples = pooled_samples(chains);
  if (grid_max > samples.front().partition.s_max()) {
    throw ConfigError("grid maximum exceeds s_max of the fitted partition");
  }
  fs::create_directories(out_dir);
  write_summaries(out_dir, samples, cfg.grid_points, grid_max, cfg.hist_bins, cfg.level);
  std::cout << "summarized " << samples.size() << " draws from " << chains.size() << " chains\n";
  return kOk;
}

int cmd_compare(const std::vector<std::string>& fit_dirs, const std::string& data_path,
                const std::string& out_path) {
  if (fit_dirs.size() < 2) throw ConfigError("compare needs at least two --fit directories");
  struct Entry {
    std::string name;
    double dic;
    double lpml;
    std::string fingerprint;
  };
  std::vector<Entry> entries;
  for (const auto& dir : fit_dirs) {
    const fs::path f = fs::path(dir) / "summary.json";
    if (!fs::exists(f)) throw DataError("missing " + f.string());
    const json j = json::parse(read_text_file(f.string()));
    entries.push_back({j.at("model_name").get<std::string>() + " (" + dir + ")", j.at("dic").get<double>(),
                       j.at("lpml").get<double>(), j.at("dataset_fingerprint").get<std::string>()});
  }
  std::string expected = entries.front().fingerprint;
  if (!data_path.empty()) expected = hex(dataset_fingerprint(load_data(data_path, {})));
  for (const auto& e : entries) {
    if (e.fingerprint != expected) throw DataError("fits were not made on the same dataset: " + e.name);
  }
  double best = entries.front().dic;
  for (const auto& e : entries) best = std::min(best, e.dic);

  std::string table = "model,dic,lpml,delta_dic,annotation\n";
  for (const auto& e : entries) {
    const double delta = e.dic - best;
    table += e.name + "," + detail::format_double(e.dic) + "," + detail::format_double(e.lpml) + "," +
             detail::format_double(delta) + "," + std::string(dic_annotation(delta)) + "\n";
  }
  std::string pbf = "model";
  for (const auto& e : entries) pbf += "," + e.name;
  pbf += "\n";
  for (const auto& a : entries) {
    pbf += a.name;
    for (const auto& b : entries) pbf += "," + detail::format_double(pseudo_bayes_factor(a.lpml, b.lpml));
    pbf += "\n";
  }
  std::cout << table << "\npseudo-Bayes factors (row over column)\n" << pbf;
  if (!out_path.empty()) {
    fs::create_directories(out_path);
    write_file(fs::path(out_path) / "comparison.csv", table);
    write_file(fs::path(out_path) / "pbf.csv", pbf);
  }
  return kOk;
}

int cmd_study(const std::string& config_path, const std::vector<std::string>& model_paths,
              const std::string& out_dir, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> n_chains, std::optional<std::size_t> replicates) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.scenario.seed = cfg.sampler.seed = *seed;
  if (n_chains) cfg.chains = *n_chains;
  if (replicates) cfg.replicates = *replicates;
  validate_run_config(cfg);
  if (out_dir.empty()) throw ConfigError("--out is required");

  std::vector<StudyModel> models;
  if (model_paths.empty()) {
    models.push_back({"GP-RJ", cfg.hp, cfg.sampler});
    SamplerConfig eq = cfg.sampler;
    eq.partition_mode = PartitionMode::EqualWidth;
    eq.fixed_J = 10;
    models.push_back({"GP-EQ", cfg.hp, eq});
  }
  for (const auto& path : model_paths) {
    RunConfig m = load_config(path);
    if (seed) m.sampler.seed = *seed;
    validate_run_config(m);
    models.push_back({m.model_name, m.hp, m.sampler});
  }

  StudyOptions opt;
  opt.scenario_id = cfg.scenario_id;
  opt.n_datasets = cfg.replicates;
  opt.n_chains = cfg.chains;
  opt.psrf_threshold = cfg.psrf_threshold;
  opt.level = cfg.level;
  opt.curve_replicates = cfg.curve_replicates;
  if (cfg.curve_max > 0.0) {
    for (std::size_t g = 0; g < cfg.curve_points; ++g) {
      const double frac = cfg.curve_points == 1 ? 0.0 : static_cast<double>(g) / static_cast<double>(cfg.curve_points - 1);
      opt.curve_grid.push_back(cfg.curve_min + frac * (cfg.curve_max - cfg.curve_min));
    }
  }
  opt.progress = [](std::size_t k, std::size_t n) { std::cerr << "replicate " << k + 1 << "/" << n << "\r"; };

  const StudyResult res = run_scenario_study(cfg.scenario, models, opt);
  std::cerr << "\n";

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  std::string rows = "scenario,replicate,model,coefficient,estimate,lower,upper,covered,width,converged\n";
  for (const auto& r : res.rows) {
    rows += std::to_string(r.scenario) + "," + std::to_string(r.replicate) + "," + r.model + "," +
            r.coefficient + "," + detail::format_double(r.estimate) + "," + detail::format_double(r.lower) +
            "," + detail::format_double(r.upper) + "," + (r.covered ? "1" : "0") + "," +
            detail::format_double(r.width) + "," + (r.converged ? "1" : "0") + "\n";
  }
  write_file(out / "study_rows.csv", rows);

  std::string agg = "model,coefficient,truth,percent_bias,coverage,relative_width,n_used\n";
  for (const auto& a : res.aggregates) {
    agg += a.model + "," + a.coefficient + "," + detail::format_double(a.truth) + "," +
           detail::format_double(a.percent_bias) + "," + detail::format_double(a.coverage) + "," +
           detail::format_double(a.relative_width) + "," + std::to_string(a.n_used) + "\n";
  }
  write_file(out / "study_summary.csv", agg);

  std::string reps = "replicate,censored_fraction,model,converged,median_J\n";
  for (const auto& r : res.replicates) {
    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      reps += std::to_string(r.index) + "," + detail::format_double(r.censored_fraction) + "," +
              models[mi].name + "," + (r.converged[mi] ? "1" : "0") + "," +
              detail::format_double(r.median_J[mi]) + "\n";
    }
  }
  write_file(out / "study_replicates.csv", reps);

  if (!opt.curve_grid.empty()) {
    std::string curves = "t,truth";
    for (const auto& m : models) curves += "," + m.name;
    curves += "\n";
    for (std::size_t g = 0; g < opt.curve_grid.size(); ++g) {
      const double t = opt.curve_grid[g];
      curves += detail::format_double(t) + "," + detail::format_double(gpsurv::baseline_hazard(t, cfg.scenario.baseline));
      for (std::size_t mi = 0; mi < models.size(); ++mi) curves += "," + detail::format_double(res.mean_hazard[mi][g]);
      curves += "\n";
    }
    write_file(out / "study_curves.csv", curves);
  }
  std::cout << agg << "excluded replicates (PSRF gate): " << res.n_excluded << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian proportional hazards with gamma-process priors and adaptive time partitions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config, data, out;
  std::uint64_t seed_value = 0;
  std::size_t chains_value = 0, replicates_value = 0, grid_points_value = 0, bins_value = 0;
  double grid_max = 0.0;
  std::vector<std::string> fits, models;

  auto* sim = app.add_subcommand("simulate", "Simulate a dataset from a scenario config");
  sim->add_option("--config", config, "Scenario config file");
  sim->add_option("--out", out, "Output CSV path")->required();
  auto* sim_seed = sim->add_option("--seed", seed_value, "Override the seed");

  auto* fit = app.add_subcommand("fit", "Fit a model and write samples and summaries");
  fit->add_option("--config", config, "Model config file");
  fit->add_option("--data", data, "Input CSV")->required();
  fit->add_option("--out", out, "Output directory")->required();
  auto* fit_seed = fit->add_option("--seed", seed_value, "Override the seed");
  auto* fit_chains = fit->add_option("--chains", chains_value, "Number of chains")->check(CLI::PositiveNumber);

  auto* sum = app.add_subcommand("summarize", "Recompute curves and partition summaries from sample files");
  sum->add_option("--config", config, "Config file (grid_points, hist_bins, level)");
  sum->add_option("--fit", data, "Fit output directory")->required();
  sum->add_option("--out", out, "Output directory")->required();
  auto* sum_points = sum->add_option("--grid-points", grid_points_value, "Number of grid points");
  sum->add_option("--grid-max", grid_max, "Largest grid time (default s_max)");
  auto* sum_bins = sum->add_option("--bins", bins_value, "Split-position histogram bins");

  auto* cmp = app.add_subcommand("compare", "Compare DIC/LPML of fits on the same dataset");
  cmp->add_option("--fit", fits, "Fit output directory (repeatable)")->required();
  cmp->add_option("--data", data, "Dataset the fits must match");
  cmp->add_option("--out", out, "Output directory for comparison tables");

  auto* study = app.add_subcommand("study", "Replicated simulation study");
  study->add_option("--config", config, "Scenario config file");
  study->add_option("--model-config", models, "Model config file (repeatable)");
  study->add_option("--out", out, "Output directory")->required();
  auto* study_seed = study->add_option("--seed", seed_value, "Override the seed");
  auto* study_chains = study->add_option("--chains", chains_value, "Chains per fit")->check(CLI::PositiveNumber);
  auto* study_reps = study->add_option("--replicates", replicates_value, "Number of replicates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  auto opt_u64 = [&](CLI::Option* o) { return o->count() ? std::optional<std::uint64_t>(seed_value) : std::nullopt; };
  auto opt_sz = [](CLI::Option* o, std::size_t v) { return o->count() ? std::optional<std::size_t>(v) : std::nullopt; };

  try {
    if (*sim) return cmd_simulate(config, out, opt_u64(sim_seed));
    if (*fit) return cmd_fit(config, data, out, opt_u64(fit_seed), opt_sz(fit_chains, chains_value));
    if (*sum) {
      return cmd_summarize(config, data, out, opt_sz(sum_points, grid_points_value), grid_max,
                           opt_sz(sum_bins, bins_value));
    }
    if (*cmp) return cmd_compare(fits, data, out);
    if (*study) {
      return cmd_study(config, models, out, opt_u64(study_seed), opt_sz(study_chains, chains_value),
                       opt_sz(study_reps, replicates_value));
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ValidationError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "data error: malformed summary: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
