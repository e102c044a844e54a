#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gpsurv/error.hpp"
#include "gpsurv/likelihood.hpp"
#include "gpsurv/numeric.hpp"
#include "gpsurv/rjmcmc.hpp"

namespace gpsurv {

// Gelman-Rubin potential scale reduction for m >= 2 equal-length traces:
//   W = mean within-chain variance, B = n * variance of chain means,
//   V = (n-1)/n W + B/n, PSRF = sqrt(V / W).
inline double psrf(std::span<const std::vector<double>> traces) {
  if (traces.size() < 2) throw DomainError("PSRF needs at least two chains");
  const std::size_t n = traces.front().size();
  if (n < 2) throw DomainError("PSRF needs at least two draws per chain");
  std::vector<double> means;
  double W = 0.0;
  for (const auto& t : traces) {
    if (t.size() != n) throw DomainError("PSRF traces must have equal length");
    means.push_back(mean(t));
    W += variance(t);
  }
  W /= static_cast<double>(traces.size());
  if (!(W > 0.0)) throw DomainError("PSRF undefined: zero within-chain variance");
  const double nd = static_cast<double>(n);
  const double B = nd * variance(means);
  const double V = (nd - 1.0) / nd * W + B / nd;
  return std::sqrt(V / W);
}

inline double psrf(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> both[] = {a, b};
  return psrf(both);
}

struct PsrfRow {
  std::string parameter;
  double value = 0.0;
  bool monitored = true;  // false when the trace is constant in every chain
  bool flagged = false;
};

struct PsrfReport {
  std::vector<PsrfRow> rows;
  double threshold = 1.05;
  bool passed() const {
    return std::none_of(rows.begin(), rows.end(), [](const PsrfRow& r) { return r.flagged; });
  }
};

// PSRF for each coefficient, the log-likelihood trace and J. Chains are
// truncated to the shortest length. A trace that is the same constant in all
// chains (J under a fixed partition) is reported but not monitored; any other
// zero-variance case is flagged.
inline PsrfReport psrf_report(std::span<const SampleChain> chains,
                              const std::vector<std::string>& beta_names, double threshold = 1.05) {
  if (chains.size() < 2) throw DomainError("convergence report needs at least two chains");
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  if (n < 2) throw DomainError("convergence report needs at least two retained draws per chain");

  PsrfReport report;
  report.threshold = threshold;
  auto add = [&](std::string name, auto&& extract) {
    std::vector<std::vector<double>> traces;
    for (const auto& c : chains) {
      std::vector<double> t(n);
      for (std::size_t r = 0; r < n; ++r) t[r] = extract(c, r);
      traces.push_back(std::move(t));
    }
    PsrfRow row{std::move(name)};
    const double first = traces.front().front();
    const bool constant = std::all_of(traces.begin(), traces.end(), [&](const auto& t) {
      return std::all_of(t.begin(), t.end(), [&](double v) { return v == first; });
    });
    if (constant) {
      row.value = 1.0;
      row.monitored = false;
    } else {
      try {
        row.value = psrf(traces);
      } catch (const DomainError&) {
        row.value = std::numeric_limits<double>::infinity();
      }
      row.flagged = !(row.value < threshold);
    }
    report.rows.push_back(std::move(row));
  };

  const std::size_t p = chains.front().samples.front().beta.size();
  for (std::size_t m = 0; m < p; ++m) {
    const std::string name = m < beta_names.size() ? beta_names[m] : "beta" + std::to_string(m + 1);
    add("beta[" + name + "]", [m](const SampleChain& c, std::size_t r) { return c.samples[r].beta[m]; });
  }
  add("log_lik", [](const SampleChain& c, std::size_t r) { return c.log_lik[r]; });
  add("J", [](const SampleChain& c, std::size_t r) {
    return static_cast<double>(c.samples[r].partition.J());
  });
  return report;
}

// Pointwise posterior summary of a curve over a time grid.
struct GridCurve {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

// n points t_k = s_max k / n, k = 1..n.
inline std::vector<double> default_grid(double s_max, std::size_t n = 200) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = s_max * static_cast<double>(k + 1) / static_cast<double>(n);
  return g;
}

namespace detail {

template <class F>
GridCurve summarize_curve(std::span<const ModelState> samples, std::span<const double> grid,
                          double level, F&& eval) {
  if (samples.empty()) throw DomainError("no retained samples");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0, 1)");
  GridCurve c;
  c.grid.assign(grid.begin(), grid.end());
  std::vector<double> values(samples.size());
  for (double t : grid) {
    for (std::size_t r = 0; r < samples.size(); ++r) {
      if (t > samples[r].partition.s_max()) {
        throw DomainError("grid point " + std::to_string(t) + " exceeds s_max");
      }
      values[r] = eval(samples[r], t);
    }
    c.mean.push_back(gpsurv::mean(values));
    c.lower.push_back(quantile(values, 0.5 * (1.0 - level)));
    c.upper.push_back(quantile(values, 0.5 * (1.0 + level)));
  }
  return c;
}

}  // namespace detail

// h_0(t) per draw, averaged with pointwise equal-tailed bounds.
inline GridCurve baseline_hazard_curve(std::span<const ModelState> samples,
                                       std::span<const double> grid, double level = 0.95) {
  for (double t : grid) {
    if (!(t > 0.0)) throw DomainError("hazard grid must lie in (0, s_max]");
  }
  return detail::summarize_curve(samples, grid, level,
                                 [](const ModelState& s, double t) { return baseline_hazard(t, s); });
}

// S_0(t) = exp(-H_0(t)) per draw; t = 0 is admitted (S_0(0) = 1).
inline GridCurve baseline_survival_curve(std::span<const ModelState> samples,
                                         std::span<const double> grid, double level = 0.95) {
  for (double t : grid) {
    if (t < 0.0) throw DomainError("survival grid must be nonnegative");
  }
  return detail::summarize_curve(samples, grid, level, [](const ModelState& s, double t) {
    return std::exp(-baseline_cumhaz(t, s));
  });
}

struct PartitionPosterior {
  std::vector<std::size_t> j_counts;  // index J
  std::vector<double> bin_edges;      // n_bins + 1 edges over [0, s_max]
  std::vector<double> split_mass;     // splits per bin / number of draws
};

inline PartitionPosterior partition_posterior(std::span<const ModelState> samples,
                                              std::size_t n_bins) {
  if (samples.empty()) throw DomainError("no retained samples");
  if (n_bins == 0) throw DomainError("need at least one bin");
  PartitionPosterior pp;
  const double s_max = samples.front().partition.s_max();
  for (std::size_t k = 0; k <= n_bins; ++k) {
    pp.bin_edges.push_back(s_max * static_cast<double>(k) / static_cast<double>(n_bins));
  }
  pp.split_mass.assign(n_bins, 0.0);
  const double weight = 1.0 / static_cast<double>(samples.size());
  for (const auto& s : samples) {
    const std::size_t J = s.partition.J();
    if (pp.j_counts.size() <= J) pp.j_counts.resize(J + 1, 0);
    ++pp.j_counts[J];
    for (double t : s.partition.interior()) {
      // Bins are right-closed like the intervals: (edge_k, edge_{k+1}].
      auto bin = static_cast<std::size_t>(std::ceil(t / s_max * static_cast<double>(n_bins)));
      bin = std::clamp<std::size_t>(bin, 1, n_bins) - 1;
      pp.split_mass[bin] += weight;
    }
  }
  return pp;
}

struct CoefficientSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

inline std::vector<CoefficientSummary> coefficient_summaries(
    std::span<const ModelState> samples, const std::vector<std::string>& names, double level = 0.95) {
  if (samples.empty()) throw DomainError("no retained samples");
  std::vector<CoefficientSummary> out;
  const std::size_t p = samples.front().beta.size();
  for (std::size_t m = 0; m < p; ++m) {
    std::vector<double> v(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r) v[r] = samples[r].beta[m];
    CoefficientSummary c;
    c.name = m < names.size() ? names[m] : "beta" + std::to_string(m + 1);
    c.mean = mean(v);
    c.sd = v.size() > 1 ? std::sqrt(variance(v)) : 0.0;
    c.median = quantile(v, 0.5);
    c.lower = quantile(v, 0.5 * (1.0 - level));
    c.upper = quantile(v, 0.5 * (1.0 + level));
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace gpsurv
