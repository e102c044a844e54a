#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gpsurv/data.hpp"
#include "gpsurv/error.hpp"

namespace gpsurv {

// Ordered boundaries 0 = s_0 < s_1 < ... < s_J < s_{J+1} = s_max.
// Intervals are indexed 1..J+1 and are left-open, right-closed:
// interval j is (s_{j-1}, s_j].
class TimePartition {
 public:
  TimePartition() : bounds_{0.0, 1.0} {}

  TimePartition(std::span<const double> interior, double s_max) {
    bounds_.reserve(interior.size() + 2);
    bounds_.push_back(0.0);
    bounds_.insert(bounds_.end(), interior.begin(), interior.end());
    bounds_.push_back(s_max);
    check();
  }

  static TimePartition from_bounds(std::vector<double> bounds) {
    TimePartition p;
    p.bounds_ = std::move(bounds);
    p.check();
    return p;
  }

  // J+1 intervals of equal width over (0, s_max].
  static TimePartition equal_width(std::size_t J, double s_max) {
    std::vector<double> interior(J);
    for (std::size_t k = 0; k < J; ++k) {
      interior[k] = s_max * static_cast<double>(k + 1) / static_cast<double>(J + 1);
    }
    return TimePartition(interior, s_max);
  }

  std::size_t J() const noexcept { return bounds_.size() - 2; }
  std::size_t n_intervals() const noexcept { return bounds_.size() - 1; }
  double s_max() const noexcept { return bounds_.back(); }
  // s_k for k = 0..J+1.
  double operator[](std::size_t k) const { return bounds_[k]; }
  const std::vector<double>& bounds() const noexcept { return bounds_; }
  std::span<const double> interior() const {
    return std::span<const double>(bounds_).subspan(1, J());
  }
  double lower(std::size_t j) const { return bounds_[j - 1]; }
  double upper(std::size_t j) const { return bounds_[j]; }
  double width(std::size_t j) const { return bounds_[j] - bounds_[j - 1]; }

  bool contains_split(double s) const {
    const auto in = interior();
    return std::binary_search(in.begin(), in.end(), s);
  }

  // Inserts s* strictly inside interval j; returns j.
  std::size_t insert(double s_star) {
    const std::size_t j = index_of(s_star);
    if (s_star == bounds_[j]) throw DomainError("split already present");
    bounds_.insert(bounds_.begin() + static_cast<std::ptrdiff_t>(j), s_star);
    return j;
  }

  // Removes interior split s_k, k in 1..J.
  void erase(std::size_t k) {
    if (k == 0 || k > J()) throw DomainError("can only remove interior splits");
    bounds_.erase(bounds_.begin() + static_cast<std::ptrdiff_t>(k));
  }

  // Unique j with s_{j-1} < y <= s_j.
  std::size_t index_of(double y) const {
    if (!(y > 0.0)) throw DomainError("time must be positive, got " + std::to_string(y));
    if (y > s_max()) {
      throw DomainError("time " + std::to_string(y) + " beyond s_max " + std::to_string(s_max()));
    }
    return static_cast<std::size_t>(std::lower_bound(bounds_.begin() + 1, bounds_.end(), y) -
                                    bounds_.begin());
  }

  friend bool operator==(const TimePartition&, const TimePartition&) = default;

 private:
  void check() const {
    if (bounds_.size() < 2 || bounds_.front() != 0.0) {
      throw DomainError("partition must start at 0 and have a terminal point");
    }
    for (std::size_t k = 1; k < bounds_.size(); ++k) {
      if (!(bounds_[k] > bounds_[k - 1]) || !std::isfinite(bounds_[k])) {
        throw DomainError("partition must be strictly increasing and finite");
      }
    }
  }

  std::vector<double> bounds_;
};

// Full sampler state: regression coefficients, partition and the increments
// h_j of the cumulative baseline hazard over each interval.
struct ModelState {
  std::vector<double> beta;
  TimePartition partition;
  std::vector<double> h;

  // Piecewise-constant baseline hazard on interval j.
  double rate(std::size_t j) const { return h[j - 1] / partition.width(j); }

  void check() const {
    if (h.size() != partition.n_intervals()) {
      throw DomainError("increment count does not match partition");
    }
    for (double v : h) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("increments must be positive");
    }
    for (double b : beta) {
      if (!std::isfinite(b)) throw DomainError("coefficients must be finite");
    }
  }

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

inline std::size_t interval_index(double y, const TimePartition& part) {
  return part.index_of(y);
}

// Time spent by a subject with observed time y inside interval j.
inline double interval_exposure(double y, std::size_t j, const TimePartition& part) {
  return std::max(0.0, std::min(y, part.upper(j)) - part.lower(j));
}

// H_0(t) = sum_j Delta_j(t) h_j / (s_j - s_{j-1}).
inline double baseline_cumhaz(double t, const ModelState& state) {
  if (t <= 0.0) return 0.0;
  const auto& part = state.partition;
  const std::size_t j = part.index_of(t);
  double cum = 0.0;
  for (std::size_t g = 1; g < j; ++g) cum += state.h[g - 1];
  return cum + (t - part.lower(j)) * state.rate(j);
}

inline double baseline_hazard(double t, const ModelState& state) {
  return state.rate(state.partition.index_of(t));
}

inline double linear_predictor(std::span<const double> x, std::span<const double> beta) {
  return std::inner_product(x.begin(), x.end(), beta.begin(), 0.0);
}

// log L(D_i | Phi).
inline double log_likelihood_subject(const Subject& subj, const ModelState& state) {
  const double eta = linear_predictor(subj.x, state.beta);
  double ll = -std::exp(eta) * baseline_cumhaz(subj.y, state);
  if (subj.delta == 1) {
    ll += std::log(state.rate(state.partition.index_of(subj.y))) + eta;
  }
  if (!std::isfinite(ll)) throw NumericError("non-finite subject log-likelihood");
  return ll;
}

// Observed-data log-likelihood, computed subject by subject.
inline double log_likelihood(const Dataset& d, const ModelState& state) {
  if (state.beta.size() != d.p()) throw DomainError("coefficient dimension mismatch");
  if (d.y_max() > state.partition.s_max()) throw DomainError("s_max below largest observed time");
  // Prefix sums of h let each subject's cumulative hazard cost one lookup.
  const auto& part = state.partition;
  std::vector<double> cum(part.n_intervals() + 1, 0.0);
  for (std::size_t j = 1; j <= part.n_intervals(); ++j) cum[j] = cum[j - 1] + state.h[j - 1];

  double total = 0.0;
  for (const auto& s : d.subjects()) {
    const double eta = linear_predictor(s.x, state.beta);
    if (s.y <= 0.0) continue;  // censored at 0 contributes nothing
    const std::size_t j = part.index_of(s.y);
    const double H = cum[j - 1] + (s.y - part.lower(j)) * state.rate(j);
    total -= std::exp(eta) * H;
    if (s.delta == 1) total += std::log(state.rate(j)) + eta;
  }
  if (!std::isfinite(total)) throw NumericError("non-finite log-likelihood");
  return total;
}

// Per-subject log-likelihood contributions, in dataset order.
inline std::vector<double> log_likelihood_terms(const Dataset& d, const ModelState& state) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const auto& s : d.subjects()) out.push_back(log_likelihood_subject(s, state));
  return out;
}

// Interval-level sufficient statistics for the grouped form of the likelihood:
//   log L = sum_j [ d_j log(h_j / w_j) - (h_j / w_j) E_j ] + sum_{events} x_i'beta
// with d_j the event count and E_j = sum_l Delta_j(y_l) exp(x_l'beta) the
// exposure-weighted risk in interval j. Subjects are held sorted by time so
// that d and E over any (a, b] cost two binary searches. Owned by one chain.
class RiskSetCache {
 public:
  explicit RiskSetCache(const Dataset& d) : p_(d.p()) {
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a].y < d[b].y; });
    y_.resize(n);
    delta_.resize(n);
    x_.resize(n * p_);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = d[order[k]];
      y_[k] = s.y;
      delta_[k] = s.delta;
      std::copy(s.x.begin(), s.x.end(), x_.begin() + static_cast<std::ptrdiff_t>(k * p_));
    }
    event_prefix_.assign(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) event_prefix_[k + 1] = event_prefix_[k] + delta_[k];
    eta_.assign(n, 0.0);
    w_.assign(n, 1.0);
    rebuild_prefix();
  }

  std::size_t size() const noexcept { return y_.size(); }
  std::size_t p() const noexcept { return p_; }
  double y(std::size_t k) const { return y_[k]; }
  int delta(std::size_t k) const { return delta_[k]; }
  double x(std::size_t k, std::size_t m) const { return x_[k * p_ + m]; }
  double eta(std::size_t k) const { return eta_[k]; }
  double weight(std::size_t k) const { return w_[k]; }

  void set_beta(std::span<const double> beta) {
    for (std::size_t k = 0; k < y_.size(); ++k) {
      eta_[k] = linear_predictor(std::span<const double>(x_).subspan(k * p_, p_), beta);
      w_[k] = std::exp(eta_[k]);
    }
    rebuild_prefix();
  }

  // Shift eta by dbeta along coordinate m; w must already hold exp(eta).
  void shift_beta(std::size_t m, double dbeta, std::span<const double> new_w) {
    for (std::size_t k = 0; k < y_.size(); ++k) {
      eta_[k] += x(k, m) * dbeta;
      w_[k] = new_w[k];
    }
    rebuild_prefix();
  }

  // Number of events with y in (a, b].
  long events(double a, double b) const {
    return event_prefix_[count_le(b)] - event_prefix_[count_le(a)];
  }

  // sum_l max(0, min(y_l, b) - a) exp(eta_l)
  double exposure(double a, double b) const {
    const std::size_t ia = count_le(a);
    const std::size_t ib = count_le(b);
    const double inside = (yw_[ib] - yw_[ia]) - a * (wsum_[ib] - wsum_[ia]);
    const double beyond = (b - a) * (wsum_.back() - wsum_[ib]);
    return inside + beyond;
  }

  double event_eta_sum() const {
    double s = 0.0;
    for (std::size_t k = 0; k < y_.size(); ++k) {
      if (delta_[k] == 1) s += eta_[k];
    }
    return s;
  }

  // Contribution of one interval to the grouped log-likelihood.
  double interval_term(double a, double b, double h) const {
    const double width = b - a;
    const long d = events(a, b);
    const double rate = h / width;
    return (d > 0 ? static_cast<double>(d) * std::log(rate) : 0.0) - rate * exposure(a, b);
  }

  double log_likelihood(const ModelState& state) const {
    double total = event_eta_sum();
    const auto& part = state.partition;
    for (std::size_t j = 1; j <= part.n_intervals(); ++j) {
      total += interval_term(part.lower(j), part.upper(j), state.h[j - 1]);
    }
    return total;
  }

  // Baseline cumulative hazard at each sorted subject's time, by one sweep.
  void cumhaz(const ModelState& state, std::vector<double>& out) const {
    out.resize(y_.size());
    const auto& part = state.partition;
    std::size_t j = 1;
    double before = 0.0;
    for (std::size_t k = 0; k < y_.size(); ++k) {
      while (j < part.n_intervals() && y_[k] > part.upper(j)) {
        before += state.h[j - 1];
        ++j;
      }
      out[k] = before + std::max(0.0, y_[k] - part.lower(j)) * state.rate(j);
    }
  }

 private:
  std::size_t count_le(double t) const {
    return static_cast<std::size_t>(std::upper_bound(y_.begin(), y_.end(), t) - y_.begin());
  }

  void rebuild_prefix() {
    const std::size_t n = y_.size();
    wsum_.assign(n + 1, 0.0);
    yw_.assign(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      wsum_[k + 1] = wsum_[k] + w_[k];
      yw_[k + 1] = yw_[k] + y_[k] * w_[k];
    }
  }

  std::size_t p_;
  std::vector<double> y_;
  std::vector<int> delta_;
  std::vector<double> x_;
  std::vector<long> event_prefix_;
  std::vector<double> eta_;
  std::vector<double> w_;
  std::vector<double> wsum_;
  std::vector<double> yw_;
};

}  // namespace gpsurv
