#pragma once

// Shared fixtures for the test suite: random datasets and states, plus an
// independent brute-force likelihood used as the oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "gpsurv/gpsurv.hpp"

namespace gpsurv::testing {

inline Dataset random_dataset(Rng& rng, std::size_t n, std::size_t p, double y_scale = 10.0) {
  std::vector<Subject> subjects(n);
  bool any_event = false;
  for (auto& s : subjects) {
    s.y = y_scale * uniform_open(rng);
    s.delta = uniform_open(rng) < 0.7 ? 1 : 0;
    any_event = any_event || s.delta == 1;
    s.x.resize(p);
    for (auto& v : s.x) v = standard_normal(rng);
  }
  if (!any_event) subjects.front().delta = 1;
  std::vector<std::string> names;
  for (std::size_t m = 0; m < p; ++m) names.push_back("x" + std::to_string(m + 1));
  return Dataset(std::move(subjects), std::move(names));
}

inline ModelState random_state(Rng& rng, std::size_t p, std::size_t J, double s_max) {
  ModelState s;
  s.beta.resize(p);
  for (auto& b : s.beta) b = 0.5 * standard_normal(rng);
  s.partition = sample_partition(J, s_max, rng);
  s.h.resize(J + 1);
  for (auto& h : s.h) h = 0.05 + 2.0 * uniform_open(rng);
  return s;
}

// Cumulative hazard integrated numerically: midpoint rule on each piece of
// (0, y] cut at every partition boundary, with the hazard found by linear
// scan. Exact for a step function up to rounding.
inline long double oracle_cumhaz(double y, const ModelState& st) {
  const auto& b = st.partition.bounds();
  auto rate_at = [&](long double t) -> long double {
    for (std::size_t j = 1; j < b.size(); ++j) {
      if (t > b[j - 1] && t <= b[j]) return static_cast<long double>(st.h[j - 1]) / (b[j] - b[j - 1]);
    }
    return 0.0L;
  };
  std::vector<long double> cuts{0.0L};
  for (std::size_t j = 1; j < b.size(); ++j) {
    if (b[j] < y) cuts.push_back(b[j]);
  }
  cuts.push_back(y);
  long double total = 0.0L;
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    const long double lo = cuts[k - 1];
    const long double hi = cuts[k];
    total += rate_at(0.5L * (lo + hi)) * (hi - lo);
  }
  return total;
}

inline long double oracle_log_likelihood(const Dataset& d, const ModelState& st) {
  long double total = 0.0L;
  for (const auto& s : d.subjects()) {
    long double eta = 0.0L;
    for (std::size_t m = 0; m < s.x.size(); ++m) eta += static_cast<long double>(s.x[m]) * st.beta[m];
    if (s.delta == 1) {
      const auto& b = st.partition.bounds();
      std::size_t j = 1;
      while (!(s.y > b[j - 1] && s.y <= b[j])) ++j;
      total += std::log(static_cast<long double>(st.h[j - 1]) / (b[j] - b[j - 1])) + eta;
    }
    total -= oracle_cumhaz(s.y, st) * std::exp(eta);
  }
  return total;
}

// Batch-means Monte Carlo standard error of the mean of a correlated trace.
inline double batch_se(const std::vector<double>& v, std::size_t n_batches = 50) {
  const std::size_t size = v.size() / n_batches;
  std::vector<double> means;
  for (std::size_t k = 0; k < n_batches; ++k) {
    double s = 0.0;
    for (std::size_t i = k * size; i < (k + 1) * size; ++i) s += v[i];
    means.push_back(s / static_cast<double>(size));
  }
  return std::sqrt(variance(means) / static_cast<double>(n_batches));
}

}  // namespace gpsurv::testing
