#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gpsurv/data.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/random.hpp"

namespace gpsurv {

// H_0(t) = rate t^shape, i.e. h_0(t) = shape rate t^(shape-1).
struct WeibullBaseline {
  double shape = 0.8;
  double rate = 0.05;
};

// V-shaped hazard falling linearly from b at t = 0 to k at t = 40, then
// rising with half the slope.
struct PiecewiseLinearBaseline {
  double b = 0.1;
  double k = 0.0005;
};

using Baseline = std::variant<WeibullBaseline, PiecewiseLinearBaseline>;

enum class CovariateKind { Normal, Bernoulli };

struct ScenarioConfig {
  std::size_t n = 300;
  double censor_target = 0.3;
  Baseline baseline = WeibullBaseline{};
  std::vector<double> beta_true{0.5, 0.8, -0.5};
  std::vector<CovariateKind> covariates{CovariateKind::Normal, CovariateKind::Normal,
                                        CovariateKind::Bernoulli};
  std::uint64_t seed = 1;

  void validate() const {
    if (n == 0) throw ConfigError("scenario sample size must be positive");
    if (!(censor_target >= 0.0 && censor_target < 1.0)) {
      throw ConfigError("censor_target must lie in [0, 1)");
    }
    if (beta_true.size() != covariates.size()) {
      throw ConfigError("beta_true and covariate list differ in length");
    }
    std::visit(
        [](const auto& b) {
          using B = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<B, WeibullBaseline>) {
            if (!(b.shape > 0.0 && b.rate > 0.0)) throw ConfigError("Weibull parameters must be positive");
          } else {
            if (!(b.b > 0.0 && b.k > 0.0)) throw ConfigError("piecewise-linear b and k must be positive");
          }
        },
        baseline);
  }
};

// The four simulation scenarios: n, censoring and baseline family.
inline ScenarioConfig scenario_preset(int id) {
  ScenarioConfig sc;
  switch (id) {
    case 1: break;
    case 2: sc.baseline = PiecewiseLinearBaseline{}; break;
    case 3: sc.censor_target = 0.5; break;
    case 4: sc.n = 100; break;
    default: throw ConfigError("scenario must be 1, 2, 3 or 4");
  }
  return sc;
}

inline double weibull_cumhaz(double t, double shape, double rate) {
  return t <= 0.0 ? 0.0 : rate * std::pow(t, shape);
}

inline double weibull_hazard(double t, double shape, double rate) {
  return shape * rate * std::pow(t, shape - 1.0);
}

inline double weibull_inverse_cumhaz(double H, double shape, double rate) {
  return std::pow(H / rate, 1.0 / shape);
}

inline double pwl_hazard(double t, double b, double k) {
  if (t <= 40.0) return b - (b - k) * t / 40.0;
  return (3.0 * k - b) / 2.0 + (b - k) * t / 80.0;
}

inline double pwl_cumhaz(double t, double b, double k) {
  if (t <= 0.0) return 0.0;
  if (t <= 40.0) return b * t - (b - k) * t * t / 80.0;
  const double u = t - 40.0;
  return 20.0 * (b + k) + k * u + (b - k) * u * u / 160.0;
}

// Inverts the piecewise-quadratic cumulative hazard using the cancellation-free
// root of each quadratic.
inline double pwl_inverse_cumhaz(double H, double b, double k) {
  const double H40 = 20.0 * (b + k);
  if (H <= H40) {
    const double disc = std::max(0.0, b * b - (b - k) * H / 20.0);
    return 2.0 * H / (b + std::sqrt(disc));
  }
  const double R = H - H40;
  return 40.0 + 2.0 * R / (k + std::sqrt(k * k + (b - k) * R / 40.0));
}

inline double baseline_cumhaz(double t, const Baseline& base) {
  return std::visit(
      [t](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, WeibullBaseline>) return weibull_cumhaz(t, b.shape, b.rate);
        else return pwl_cumhaz(t, b.b, b.k);
      },
      base);
}

inline double baseline_hazard(double t, const Baseline& base) {
  return std::visit(
      [t](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, WeibullBaseline>) return weibull_hazard(t, b.shape, b.rate);
        else return pwl_hazard(t, b.b, b.k);
      },
      base);
}

inline double baseline_inverse_cumhaz(double H, const Baseline& base) {
  return std::visit(
      [H](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, WeibullBaseline>) return weibull_inverse_cumhaz(H, b.shape, b.rate);
        else return pwl_inverse_cumhaz(H, b.b, b.k);
      },
      base);
}

struct LatentDraw {
  std::vector<double> x;
  double event_time = 0.0;
};

// Covariates and event time T = H_0^{-1}(-log V exp(-x'beta)), V ~ U(0, 1).
inline LatentDraw draw_latent(const ScenarioConfig& sc, Rng& rng) {
  LatentDraw d;
  d.x.resize(sc.covariates.size());
  double eta = 0.0;
  for (std::size_t m = 0; m < sc.covariates.size(); ++m) {
    d.x[m] = sc.covariates[m] == CovariateKind::Normal ? standard_normal(rng)
                                                        : (uniform_open(rng) < 0.5 ? 1.0 : 0.0);
    eta += d.x[m] * sc.beta_true[m];
  }
  const double target = -std::log(uniform_open(rng)) * std::exp(-eta);
  d.event_time = baseline_inverse_cumhaz(target, sc.baseline);
  return d;
}

// Upper limit c of the uniform censoring distribution C ~ U(0, c), chosen by
// bisection on a pilot sample so that P(C < T) = censor_target. Uses
// P(C < T | T) = min(T, c) / c, which is smooth and decreasing in c.
// Returns +infinity when no censoring is requested.
inline double calibrate_censoring(const ScenarioConfig& sc, std::size_t pilot = 100000) {
  sc.validate();
  if (sc.censor_target == 0.0) return std::numeric_limits<double>::infinity();
  Rng rng = make_stream(sc.seed, 0xCE4503ULL);
  std::vector<double> T(pilot);
  for (auto& t : T) t = draw_latent(sc, rng).event_time;
  auto censored_fraction = [&](double c) {
    double s = 0.0;
    for (double t : T) s += std::min(t, c);
    return s / (c * static_cast<double>(T.size()));
  };
  double lo = 1e-12;
  double hi = 1.0;
  while (censored_fraction(hi) > sc.censor_target) {
    hi *= 2.0;
    if (hi > 1e300) throw ValidationError("censoring target unattainable");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (censored_fraction(mid) > sc.censor_target ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  if (std::fabs(censored_fraction(c) - sc.censor_target) > 0.01) {
    throw ValidationError("censoring target unattainable");
  }
  return c;
}

// One right-censored dataset: y = min(T, C), delta = 1{T <= C}.
inline Dataset simulate_dataset(const ScenarioConfig& sc, double censor_limit, Rng& rng) {
  sc.validate();
  std::vector<Subject> subjects;
  subjects.reserve(sc.n);
  for (std::size_t i = 0; i < sc.n; ++i) {
    LatentDraw latent = draw_latent(sc, rng);
    const double c = std::isfinite(censor_limit) ? censor_limit * uniform_open(rng)
                                                 : std::numeric_limits<double>::infinity();
    Subject s;
    s.delta = latent.event_time <= c ? 1 : 0;
    s.y = std::min(latent.event_time, c);
    s.x = std::move(latent.x);
    subjects.push_back(std::move(s));
  }
  std::vector<std::string> names;
  for (std::size_t m = 0; m < sc.covariates.size(); ++m) names.push_back("x" + std::to_string(m + 1));
  return Dataset(std::move(subjects), std::move(names));
}

inline Dataset simulate_dataset(const ScenarioConfig& sc, Rng& rng) {
  return simulate_dataset(sc, calibrate_censoring(sc), rng);
}

// Replicate k of a scenario draws its data from stream (seed, k + 1).
inline Dataset simulate_replicate(const ScenarioConfig& sc, double censor_limit, std::size_t k) {
  Rng rng = make_stream(sc.seed, k + 1);
  return simulate_dataset(sc, censor_limit, rng);
}

}  // namespace gpsurv
