#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gpsurv/comparison.hpp"
#include "gpsurv/diagnostics.hpp"
#include "gpsurv/rjmcmc.hpp"
#include "gpsurv/simulate.hpp"

namespace gpsurv {

// One model fitted to every replicate, e.g. GP-RJ or GP-EQ.
struct StudyModel {
  std::string name;
  Hyperparameters hp;
  SamplerConfig cfg;
};

struct StudyOptions {
  int scenario_id = 0;
  std::size_t n_datasets = 100;
  std::size_t n_chains = 2;
  double psrf_threshold = 1.05;
  double level = 0.95;
  // Posterior-mean baseline hazard is averaged over the first
  // curve_replicates replicates on this grid (skipped when empty).
  std::vector<double> curve_grid;
  std::size_t curve_replicates = 20;
  std::function<void(std::size_t replicate, std::size_t total)> progress;
};

struct StudyRow {
  int scenario = 0;
  std::size_t replicate = 0;
  std::string model;
  std::string coefficient;
  double truth = 0.0;
  double estimate = 0.0;  // posterior median
  double lower = 0.0;
  double upper = 0.0;
  bool covered = false;
  double width = 0.0;
  bool converged = true;
};

struct StudyAggregate {
  std::string model;
  std::string coefficient;
  double truth = 0.0;
  double percent_bias = 0.0;
  double coverage = 0.0;
  double relative_width = 0.0;  // relative to the first model
  std::size_t n_used = 0;
};

struct StudyReplicate {
  std::size_t index = 0;
  double censored_fraction = 0.0;
  std::vector<bool> converged;        // per model
  std::vector<double> median_J;       // per model
  std::vector<PsrfReport> psrf;       // per model
};

struct StudyResult {
  std::vector<StudyRow> rows;
  std::vector<StudyAggregate> aggregates;
  std::vector<StudyReplicate> replicates;
  std::size_t n_excluded = 0;
  std::vector<std::vector<double>> mean_hazard;  // per model, averaged over replicates
  std::size_t curve_replicates_used = 0;
};

// Per-replicate chain seed, so that every fit in the study is reproducible
// from (fit seed, replicate).
inline std::uint64_t replicate_seed(std::uint64_t base, std::size_t replicate) {
  return base * 1000003ULL + static_cast<std::uint64_t>(replicate) + 1;
}

// Simulates n_datasets replicates, fits every model, and aggregates percent
// bias, coverage and relative width of the credible intervals for beta.
// Replicates where any model fails the PSRF gate are excluded from the
// aggregates and counted.
inline StudyResult run_scenario_study(const ScenarioConfig& sc, const std::vector<StudyModel>& models,
                                      const StudyOptions& opt) {
  if (opt.n_datasets == 0) throw ConfigError("study needs at least one replicate");
  if (models.empty()) throw ConfigError("study needs at least one model");
  const double censor_limit = calibrate_censoring(sc);
  const std::size_t p = sc.beta_true.size();

  StudyResult res;
  res.mean_hazard.assign(models.size(), std::vector<double>(opt.curve_grid.size(), 0.0));

  for (std::size_t k = 0; k < opt.n_datasets; ++k) {
    if (opt.progress) opt.progress(k, opt.n_datasets);
    const Dataset d = simulate_replicate(sc, censor_limit, k);
    StudyReplicate rep;
    rep.index = k;
    rep.censored_fraction =
        1.0 - static_cast<double>(d.n_events()) / static_cast<double>(d.size());
    std::vector<StudyRow> rows;
    const bool want_curve = !opt.curve_grid.empty() && k < opt.curve_replicates;

    for (std::size_t mi = 0; mi < models.size(); ++mi) {
      SamplerConfig cfg = models[mi].cfg;
      cfg.seed = replicate_seed(cfg.seed, k);
      const auto chains = run_chains(d, models[mi].hp, cfg, opt.n_chains);
      const auto samples = pooled_samples(chains);
      const auto coefs = coefficient_summaries(samples, d.covariate_names(), opt.level);

      bool ok = true;
      if (opt.n_chains >= 2) {
        rep.psrf.push_back(psrf_report(chains, d.covariate_names(), opt.psrf_threshold));
        ok = rep.psrf.back().passed();
      }
      rep.converged.push_back(ok);
      std::vector<double> Js;
      for (const auto& s : samples) Js.push_back(static_cast<double>(s.partition.J()));
      rep.median_J.push_back(quantile(Js, 0.5));

      for (std::size_t m = 0; m < p; ++m) {
        StudyRow row;
        row.scenario = opt.scenario_id;
        row.replicate = k;
        row.model = models[mi].name;
        row.coefficient = coefs[m].name;
        row.truth = sc.beta_true[m];
        row.estimate = coefs[m].median;
        row.lower = coefs[m].lower;
        row.upper = coefs[m].upper;
        row.covered = row.lower <= row.truth && row.truth <= row.upper;
        row.width = row.upper - row.lower;
        row.converged = ok;
        rows.push_back(std::move(row));
      }
      if (want_curve) {
        const auto curve = baseline_hazard_curve(samples, opt.curve_grid, opt.level);
        for (std::size_t g = 0; g < curve.mean.size(); ++g) res.mean_hazard[mi][g] += curve.mean[g];
      }
    }
    if (want_curve) ++res.curve_replicates_used;
    const bool all_ok = std::all_of(rep.converged.begin(), rep.converged.end(), [](bool b) { return b; });
    if (!all_ok) {
      ++res.n_excluded;
      for (auto& r : rows) r.converged = false;
    }
    res.rows.insert(res.rows.end(), rows.begin(), rows.end());
    res.replicates.push_back(std::move(rep));
  }
  if (res.curve_replicates_used > 0) {
    for (auto& curve : res.mean_hazard) {
      for (double& v : curve) v /= static_cast<double>(res.curve_replicates_used);
    }
  }

  // Rows are laid out replicate-major, then model, then coefficient.
  const std::size_t stride = models.size() * p;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    for (std::size_t m = 0; m < p; ++m) {
      StudyAggregate agg;
      agg.model = models[mi].name;
      agg.truth = sc.beta_true[m];
      double bias = 0.0;
      double covered = 0.0;
      double rel_width = 0.0;
      for (std::size_t k = 0; k < opt.n_datasets; ++k) {
        const auto& row = res.rows[k * stride + mi * p + m];
        const auto& ref = res.rows[k * stride + m];
        agg.coefficient = row.coefficient;
        if (!row.converged) continue;
        ++agg.n_used;
        bias += row.estimate - row.truth;
        covered += row.covered ? 1.0 : 0.0;
        rel_width += row.width / ref.width;
      }
      if (agg.n_used > 0) {
        const double used = static_cast<double>(agg.n_used);
        agg.percent_bias = 100.0 * (bias / used) / agg.truth;
        agg.coverage = covered / used;
        agg.relative_width = rel_width / used;
      }
      res.aggregates.push_back(std::move(agg));
    }
  }
  return res;
}

}  // namespace gpsurv
