#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpsurv/data.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/likelihood.hpp"
#include "gpsurv/numeric.hpp"
#include "gpsurv/rjmcmc.hpp"

namespace gpsurv {

// Per-draw, per-subject log-likelihoods: terms[r][i] = log L(D_i | Phi^(r)).
using LogLikMatrix = std::vector<std::vector<double>>;

struct FitSummary {
  double dic = 0.0;
  double lpml = 0.0;
  std::vector<double> log_cpo;
  std::size_t n_samples_used = 0;
};

// Pools the retained draws of several chains in chain order.
inline std::vector<ModelState> pooled_samples(std::span<const SampleChain> chains) {
  std::vector<ModelState> out;
  for (const auto& c : chains) out.insert(out.end(), c.samples.begin(), c.samples.end());
  return out;
}

inline LogLikMatrix log_likelihood_matrix(std::span<const ModelState> samples, const Dataset& d) {
  LogLikMatrix terms;
  terms.reserve(samples.size());
  for (const auto& s : samples) terms.push_back(log_likelihood_terms(d, s));
  return terms;
}

namespace detail {

inline std::size_t check_matrix(const LogLikMatrix& terms) {
  if (terms.empty()) throw DomainError("no retained samples");
  const std::size_t n = terms.front().size();
  for (const auto& row : terms) {
    if (row.size() != n) throw DomainError("ragged log-likelihood matrix");
  }
  return n;
}

inline std::vector<double> column(const LogLikMatrix& terms, std::size_t i, double sign = 1.0) {
  std::vector<double> out(terms.size());
  for (std::size_t r = 0; r < terms.size(); ++r) out[r] = sign * terms[r][i];
  return out;
}

}  // namespace detail

// DIC_3-style criterion:
//   -(4/R) sum_r log L(D | Phi^(r)) + 2 sum_i log[(1/R) sum_r L(D_i | Phi^(r))].
inline double dic(const LogLikMatrix& terms) {
  const std::size_t n = detail::check_matrix(terms);
  std::vector<double> totals(terms.size());
  for (std::size_t r = 0; r < terms.size(); ++r) totals[r] = exact_sum(terms[r]);
  const double mean_total = exact_sum(totals) / static_cast<double>(terms.size());
  std::vector<double> fit(n);
  for (std::size_t i = 0; i < n; ++i) fit[i] = log_mean_exp(detail::column(terms, i));
  // With R = 1 both sums are the same correctly rounded total, so this is
  // exactly -2 log L.
  return -4.0 * mean_total + 2.0 * exact_sum(fit);
}

// log CPO_i = -log[(1/R) sum_r 1/L(D_i | Phi^(r))], harmonic-mean estimator.
inline std::vector<double> log_cpo(const LogLikMatrix& terms) {
  const std::size_t n = detail::check_matrix(terms);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto neg = detail::column(terms, i, -1.0);
    bool any_finite = false;
    for (double v : neg) any_finite = any_finite || std::isfinite(v);
    if (!any_finite) {
      throw NumericError("subject " + std::to_string(i + 1) +
                         " has zero likelihood under every retained sample");
    }
    out[i] = -log_mean_exp(neg);
  }
  return out;
}

inline double lpml(const LogLikMatrix& terms) { return exact_sum(log_cpo(terms)); }

inline FitSummary fit_summary(const LogLikMatrix& terms) {
  FitSummary f;
  f.dic = dic(terms);
  f.log_cpo = log_cpo(terms);
  f.lpml = exact_sum(f.log_cpo);
  f.n_samples_used = terms.size();
  return f;
}

inline FitSummary fit_summary(std::span<const SampleChain> chains, const Dataset& d) {
  const auto samples = pooled_samples(chains);
  return fit_summary(log_likelihood_matrix(samples, d));
}

inline double pseudo_bayes_factor(double lpml_a, double lpml_b) { return std::exp(lpml_a - lpml_b); }

// Rule of thumb for DIC differences: < 2 negligible, 2-6 positive, > 6 strong.
inline std::string_view dic_annotation(double delta_dic) {
  const double d = std::fabs(delta_dic);
  if (d < 2.0) return "negligible";
  if (d <= 6.0) return "positive";
  return "strong";
}

}  // namespace gpsurv
