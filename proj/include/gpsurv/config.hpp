#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gpsurv/data.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/priors.hpp"
#include "gpsurv/rjmcmc.hpp"
#include "gpsurv/simulate.hpp"

namespace gpsurv {

// Everything a CLI run needs. Read from flat "key = value" text; '#' starts a
// comment. Unknown keys are rejected.
struct RunConfig {
  std::string model_name = "GP-RJ";
  Hyperparameters hp;
  SamplerConfig sampler;
  ScenarioConfig scenario;
  int scenario_id = 1;
  std::size_t chains = 2;
  double psrf_threshold = 1.05;
  std::size_t grid_points = 200;
  std::size_t hist_bins = 50;
  double level = 0.95;
  std::size_t replicates = 100;
  std::size_t curve_replicates = 20;
  double curve_min = 0.0;
  double curve_max = 0.0;  // 0 disables study curves
  std::size_t curve_points = 36;
  CsvSchema schema;
  // Key/value pairs exactly as read, for the run manifest.
  std::map<std::string, std::string> echo;
};

namespace detail {

inline double to_double(const std::string& key, std::string_view v) {
  const auto d = parse_double(trim(v));
  if (!d) throw ConfigError("key '" + key + "': expected a number, got '" + std::string(v) + "'");
  return *d;
}

inline std::size_t to_count(const std::string& key, std::string_view v) {
  const double d = to_double(key, v);
  if (d < 0.0 || d != static_cast<double>(static_cast<std::uint64_t>(d))) {
    throw ConfigError("key '" + key + "': expected a nonnegative integer");
  }
  return static_cast<std::size_t>(d);
}

inline bool to_bool(const std::string& key, std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true or false");
}

inline std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  for (auto piece : split_commas(v)) {
    if (!piece.empty()) out.emplace_back(piece);
  }
  return out;
}

}  // namespace detail

inline std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    kv[key] = value;
  }
  return kv;
}

// Applies key/value settings on top of `base`. A `scenario` key resets the
// scenario block to that preset before the other scenario keys apply.
inline RunConfig apply_config(const std::map<std::string, std::string>& kv, RunConfig cfg = {}) {
  using namespace detail;
  if (auto it = kv.find("scenario"); it != kv.end()) {
    cfg.scenario_id = static_cast<int>(to_count("scenario", it->second));
    const auto seed = cfg.scenario.seed;
    cfg.scenario = scenario_preset(cfg.scenario_id);
    cfg.scenario.seed = seed;
  }
  for (const auto& [key, value] : kv) {
    cfg.echo[key] = value;
    auto& hp = cfg.hp;
    auto& sm = cfg.sampler;
    auto& sc = cfg.scenario;
    if (key == "scenario") continue;
    else if (key == "model_name") cfg.model_name = value;
    else if (key == "eta0") hp.eta0 = to_double(key, value);
    else if (key == "kappa0") hp.kappa0 = to_double(key, value);
    else if (key == "c0") hp.c0 = to_double(key, value);
    else if (key == "alpha") hp.alpha = to_double(key, value);
    else if (key == "rho") hp.rho = to_double(key, value);
    else if (key == "c_cap") hp.c_cap = to_double(key, value);
    else if (key == "j_max") hp.j_max = to_count(key, value);
    else if (key == "s_max") hp.s_max = to_double(key, value);
    else if (key == "n_iter") sm.n_iter = to_count(key, value);
    else if (key == "n_burnin") sm.n_burnin = to_count(key, value);
    else if (key == "thin") sm.thin = to_count(key, value);
    else if (key == "beta_step") {
      sm.beta_step.clear();
      for (const auto& s : to_list(value)) sm.beta_step.push_back(to_double(key, s));
    }
    else if (key == "h_step") sm.h_step = to_double(key, value);
    else if (key == "adapt") sm.adapt = to_bool(key, value);
    else if (key == "target_acceptance") sm.target_acceptance = to_double(key, value);
    else if (key == "seed") sm.seed = sc.seed = to_count(key, value);
    else if (key == "partition") {
      if (value == "rj") sm.partition_mode = PartitionMode::Adaptive;
      else if (value == "eq") sm.partition_mode = PartitionMode::EqualWidth;
      else if (value == "uq") sm.partition_mode = PartitionMode::UniqueEvents;
      else throw ConfigError("partition must be rj, eq or uq");
    }
    else if (key == "j_fixed") sm.fixed_J = to_count(key, value);
    else if (key == "split_proposal") {
      if (value == "event_times") sm.split_proposal = SplitProposal::EventTimes;
      else if (value == "uniform") sm.split_proposal = SplitProposal::Uniform;
      else throw ConfigError("split_proposal must be event_times or uniform");
    }
    else if (key == "ignore_likelihood") sm.ignore_likelihood = to_bool(key, value);
    else if (key == "chains") cfg.chains = to_count(key, value);
    else if (key == "psrf_threshold") cfg.psrf_threshold = to_double(key, value);
    else if (key == "grid_points") cfg.grid_points = to_count(key, value);
    else if (key == "hist_bins") cfg.hist_bins = to_count(key, value);
    else if (key == "level") cfg.level = to_double(key, value);
    else if (key == "n") sc.n = to_count(key, value);
    else if (key == "censor_target") sc.censor_target = to_double(key, value);
    else if (key == "baseline") {
      if (value == "weibull") sc.baseline = WeibullBaseline{};
      else if (value == "piecewise_linear") sc.baseline = PiecewiseLinearBaseline{};
      else throw ConfigError("baseline must be weibull or piecewise_linear");
    }
    else if (key == "weibull_shape" || key == "weibull_rate" || key == "pwl_b" || key == "pwl_k") {
      continue;  // applied below, once the baseline family is known
    }
    else if (key == "beta_true") {
      sc.beta_true.clear();
      for (const auto& s : to_list(value)) sc.beta_true.push_back(to_double(key, s));
    }
    else if (key == "covariates") {
      sc.covariates.clear();
      for (const auto& s : to_list(value)) {
        if (s == "normal") sc.covariates.push_back(CovariateKind::Normal);
        else if (s == "bernoulli") sc.covariates.push_back(CovariateKind::Bernoulli);
        else throw ConfigError("covariates entries must be normal or bernoulli");
      }
    }
    else if (key == "replicates") cfg.replicates = to_count(key, value);
    else if (key == "curve_replicates") cfg.curve_replicates = to_count(key, value);
    else if (key == "curve_min") cfg.curve_min = to_double(key, value);
    else if (key == "curve_max") cfg.curve_max = to_double(key, value);
    else if (key == "curve_points") cfg.curve_points = to_count(key, value);
    else if (key == "time_column") cfg.schema.time_column = value;
    else if (key == "event_column") cfg.schema.event_column = value;
    else if (key == "covariate_columns") cfg.schema.covariates = to_list(value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  if (auto* w = std::get_if<WeibullBaseline>(&cfg.scenario.baseline)) {
    if (auto it = kv.find("weibull_shape"); it != kv.end()) w->shape = to_double(it->first, it->second);
    if (auto it = kv.find("weibull_rate"); it != kv.end()) w->rate = to_double(it->first, it->second);
  } else if (auto* pl = std::get_if<PiecewiseLinearBaseline>(&cfg.scenario.baseline)) {
    if (auto it = kv.find("pwl_b"); it != kv.end()) pl->b = to_double(it->first, it->second);
    if (auto it = kv.find("pwl_k"); it != kv.end()) pl->k = to_double(it->first, it->second);
  }
  return cfg;
}

inline RunConfig parse_run_config(std::string_view text, RunConfig base = {}) {
  return apply_config(parse_key_values(text), std::move(base));
}

inline void validate_run_config(const RunConfig& cfg) {
  cfg.hp.validate();
  cfg.sampler.validate();
  cfg.scenario.validate();
  if (cfg.chains == 0) throw ConfigError("chains must be at least 1");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw ConfigError("level must lie in (0, 1)");
  if (cfg.grid_points == 0 || cfg.hist_bins == 0) throw ConfigError("grid_points and hist_bins must be positive");
}

}  // namespace gpsurv
