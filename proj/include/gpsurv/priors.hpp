#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gpsurv/error.hpp"
#include "gpsurv/likelihood.hpp"
#include "gpsurv/random.hpp"

namespace gpsurv {

// Prior settings. The gamma process GP(c0 H*, c0) uses H*(t) = eta0 t^kappa0;
// J ~ Poisson(alpha) truncated to {0..j_max}; rho scales the birth/death
// move probabilities. s_max <= 0 means "use the largest observed time".
struct Hyperparameters {
  double eta0 = 0.2;
  double kappa0 = 0.5;
  double c0 = 1.0;
  double alpha = 10.0;
  double rho = 0.2;
  double c_cap = 0.8;
  std::size_t j_max = 50;
  double s_max = 0.0;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
      }
    };
    positive(eta0, "eta0");
    positive(kappa0, "kappa0");
    positive(c0, "c0");
    positive(alpha, "alpha");
    positive(rho, "rho");
    positive(c_cap, "c_cap");
    if (!(c_cap < 1.0)) throw ConfigError("c_cap must be below 1");
    if (!(2.0 * rho <= c_cap)) throw ConfigError("rho must satisfy 2 rho <= c_cap");
    if (j_max < 1) throw ConfigError("j_max must be at least 1");
    if (s_max < 0.0 || !std::isfinite(s_max)) throw ConfigError("s_max must be nonnegative");
  }

  // Prior mean of H_0(t).
  double prior_cumhaz(double t) const { return eta0 * std::pow(t, kappa0); }
};

inline double gamma_log_density(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma shape and rate must be positive");
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

// Shape of the gamma prior on the increment over (s_lo, s_hi]; the rate is c0.
inline double increment_shape(double s_lo, double s_hi, const Hyperparameters& hp) {
  return hp.c0 * hp.eta0 * (std::pow(s_hi, hp.kappa0) - std::pow(s_lo, hp.kappa0));
}

inline double log_prior_increment(double h, double s_lo, double s_hi, const Hyperparameters& hp) {
  if (!(s_lo >= 0.0 && s_hi > s_lo)) throw DomainError("increment interval must satisfy 0 <= lo < hi");
  const double shape = increment_shape(s_lo, s_hi, hp);
  if (!(shape > 0.0)) throw DomainError("non-positive gamma shape");
  return gamma_log_density(h, shape, hp.c0);
}

inline double log_prior_increments(const ModelState& state, const Hyperparameters& hp) {
  const auto& part = state.partition;
  double total = 0.0;
  for (std::size_t j = 1; j <= part.n_intervals(); ++j) {
    total += log_prior_increment(state.h[j - 1], part.lower(j), part.upper(j), hp);
  }
  return total;
}

// Density of the even-numbered order statistics of 2J+1 uniforms on
// (0, s_max): (2J+1)! / s_max^(2J+1) * prod_j (s_j - s_{j-1}).
inline double log_prior_partition(const TimePartition& part) {
  const double J = static_cast<double>(part.J());
  double total = std::lgamma(2.0 * J + 2.0) - (2.0 * J + 1.0) * std::log(part.s_max());
  for (std::size_t j = 1; j <= part.n_intervals(); ++j) total += std::log(part.width(j));
  return total;
}

inline double log_poisson(std::size_t k, double rate) {
  const double kd = static_cast<double>(k);
  return kd * std::log(rate) - rate - std::lgamma(kd + 1.0);
}

// Poisson(alpha) restricted to {0, ..., j_max} and renormalized.
inline double log_prior_J(std::size_t J, const Hyperparameters& hp) {
  if (J > hp.j_max) throw DomainError("J exceeds j_max");
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= hp.j_max; ++k) peak = std::max(peak, log_poisson(k, hp.alpha));
  double sum = 0.0;
  for (std::size_t k = 0; k <= hp.j_max; ++k) sum += std::exp(log_poisson(k, hp.alpha) - peak);
  return log_poisson(J, hp.alpha) - peak - std::log(sum);
}

// Splits are the 2nd, 4th, ..., (2J)th order statistics of 2J+1 uniforms.
inline TimePartition sample_partition(std::size_t J, double s_max, Rng& rng) {
  if (!(s_max > 0.0)) throw DomainError("s_max must be positive");
  std::vector<double> u(2 * J + 1);
  for (auto& v : u) v = s_max * uniform_open(rng);
  std::sort(u.begin(), u.end());
  std::vector<double> interior(J);
  for (std::size_t k = 0; k < J; ++k) interior[k] = u[2 * k + 1];
  return TimePartition(interior, s_max);
}

inline TimePartition sample_partition(std::size_t J, const Hyperparameters& hp, Rng& rng) {
  if (J > hp.j_max) throw DomainError("J exceeds j_max");
  return sample_partition(J, hp.s_max, rng);
}

// Independent gamma increments for a given partition.
inline std::vector<double> sample_increments(const TimePartition& part, const Hyperparameters& hp,
                                             Rng& rng) {
  std::vector<double> h(part.n_intervals());
  for (std::size_t j = 1; j <= part.n_intervals(); ++j) {
    std::gamma_distribution<double> dist(increment_shape(part.lower(j), part.upper(j), hp),
                                         1.0 / hp.c0);
    h[j - 1] = std::max(dist(rng), std::numeric_limits<double>::min());
  }
  return h;
}

}  // namespace gpsurv
