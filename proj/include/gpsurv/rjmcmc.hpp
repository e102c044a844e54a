#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "gpsurv/data.hpp"
#include "gpsurv/error.hpp"
#include "gpsurv/likelihood.hpp"
#include "gpsurv/priors.hpp"
#include "gpsurv/random.hpp"

namespace gpsurv {

enum class Move : std::size_t { RP = 0, BH = 1, BI = 2, DI = 3 };

inline constexpr std::array<std::string_view, 4> kMoveNames{"RP", "BH", "BI", "DI"};

inline std::string_view move_name(Move m) { return kMoveNames[static_cast<std::size_t>(m)]; }

struct MoveProbabilities {
  double rp = 0.0;
  double bh = 0.0;
  double bi = 0.0;
  double di = 0.0;

  double of(Move m) const {
    switch (m) {
      case Move::RP: return rp;
      case Move::BH: return bh;
      case Move::BI: return bi;
      case Move::DI: return di;
    }
    return 0.0;
  }
};

// pi_BI = rho min{1, alpha/(J+1)} (zero at j_max), pi_DI = rho min{1, J/alpha},
// and the remainder split evenly between RP and BH.
inline MoveProbabilities move_probabilities(std::size_t J, const Hyperparameters& hp) {
  if (J > hp.j_max) throw DomainError("J exceeds j_max");
  const double Jd = static_cast<double>(J);
  MoveProbabilities mp;
  mp.bi = J == hp.j_max ? 0.0 : hp.rho * std::min(1.0, hp.alpha / (Jd + 1.0));
  mp.di = hp.rho * std::min(1.0, Jd / hp.alpha);
  mp.rp = mp.bh = 0.5 * (1.0 - mp.bi - mp.di);
  return mp;
}

inline MoveProbabilities fixed_partition_move_probabilities() { return {0.5, 0.5, 0.0, 0.0}; }

// How the partition is initialized and whether it moves.
enum class PartitionMode {
  Adaptive,     // GP-RJ: reversible-jump birth/death of splits
  EqualWidth,   // GP-EQ: fixed_J splits, equal-width intervals
  UniqueEvents  // GP-UQ: fixed splits at the distinct event times
};

// Source of the proposed split time in a birth move.
enum class SplitProposal {
  EventTimes,  // uniform over distinct event times not yet in the partition
  Uniform      // uniform on (0, s_max)
};

struct SamplerConfig {
  std::size_t n_iter = 100000;
  std::size_t n_burnin = 50000;
  std::size_t thin = 10;
  std::vector<double> beta_step{0.1};  // one entry, or one per coefficient
  double h_step = 0.5;
  bool adapt = true;
  double target_acceptance = 0.35;
  std::uint64_t seed = 1;
  PartitionMode partition_mode = PartitionMode::Adaptive;
  std::size_t fixed_J = 10;
  SplitProposal split_proposal = SplitProposal::EventTimes;
  // Treat the likelihood as constant: the chain then targets the prior.
  bool ignore_likelihood = false;

  bool fixed_partition() const noexcept { return partition_mode != PartitionMode::Adaptive; }

  void validate() const {
    if (n_iter == 0) throw ConfigError("n_iter must be positive");
    if (n_burnin >= n_iter) throw ConfigError("n_burnin must be below n_iter");
    if (thin == 0) throw ConfigError("thin must be positive");
    if (beta_step.empty()) throw ConfigError("beta_step must be given");
    for (double s : beta_step) {
      if (!(s > 0.0)) throw ConfigError("beta_step must be positive");
    }
    if (!(h_step > 0.0)) throw ConfigError("h_step must be positive");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
      throw ConfigError("target_acceptance must lie in (0, 1)");
    }
  }
};

struct MoveTally {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  double rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  }
};

// Retained draws of one chain. Acceptance tallies cover post-burn-in
// iterations; RP and BH count one proposal per coordinate updated.
struct SampleChain {
  std::vector<ModelState> samples;
  std::vector<std::size_t> iterations;
  std::vector<double> log_lik;
  std::array<MoveTally, 4> acceptance{};
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> beta_step;
  double h_step = 0.0;

  std::size_t size() const noexcept { return samples.size(); }
};

// Splits increment h over (s_lo, s_hi] at s_star. With a = s_star - s_lo,
// b = s_hi - s_star, D = a + b and r = (1-U)/U:
//   h_lo = h (a/D) r^(b/D),   h_hi = h (b/D) r^(-a/D),
// the pair for which the old rate is the width-weighted geometric mean of the
// new rates and h_lo b / (h_hi a) = r.
inline std::pair<double, double> split_transform(double h, double s_lo, double s_star, double s_hi,
                                                 double U) {
  if (!(U > 0.0 && U < 1.0)) throw DomainError("split variate U must lie in (0, 1)");
  if (!(s_lo < s_star && s_star < s_hi)) throw DomainError("split point must be interior");
  const double a = s_star - s_lo;
  const double b = s_hi - s_star;
  const double D = s_hi - s_lo;
  const double log_r = std::log1p(-U) - std::log(U);
  return {h * (a / D) * std::exp((b / D) * log_r), h * (b / D) * std::exp(-(a / D) * log_r)};
}

// Inverse of split_transform: returns (h, U).
inline std::pair<double, double> merge_transform(double h_lo, double h_hi, double s_lo,
                                                 double s_mid, double s_hi) {
  const double a = s_mid - s_lo;
  const double b = s_hi - s_mid;
  const double D = s_hi - s_lo;
  const double log_h = std::log(D) + (a * std::log(h_lo / a) + b * std::log(h_hi / b)) / D;
  const double log_r = std::log(h_lo) + std::log(b) - std::log(h_hi) - std::log(a);
  // U = 1 / (1 + r), evaluated without overflow for large |log r|.
  const double U = log_r > 0.0 ? std::exp(-log_r) / (1.0 + std::exp(-log_r))
                               : 1.0 / (1.0 + std::exp(log_r));
  return {std::exp(log_h), U};
}

// log |d(h_lo, h_hi) / d(h, U)| = log[h a b / D^2 (1-U)^(-2a/D) U^(-2b/D)].
inline double split_log_jacobian(double h, double s_lo, double s_star, double s_hi, double U) {
  const double a = s_star - s_lo;
  const double b = s_hi - s_star;
  const double D = s_hi - s_lo;
  return std::log(h) + std::log(a) + std::log(b) - 2.0 * std::log(D) -
         (2.0 * a / D) * std::log1p(-U) - (2.0 * b / D) * std::log(U);
}

// Distinct event times strictly below s_max: the pool of admissible splits.
inline std::vector<double> split_candidates(const Dataset& d, double s_max) {
  std::vector<double> out;
  for (double t : d.event_times()) {
    if (t < s_max) out.push_back(t);
  }
  return out;
}

// Resolves s_max against the data: 0 means y_max, and it may never be below it.
inline Hyperparameters resolve_hyperparameters(Hyperparameters hp, const Dataset& d) {
  hp.validate();
  if (hp.s_max == 0.0) hp.s_max = d.y_max();
  if (hp.s_max < d.y_max()) throw ConfigError("s_max is below the largest observed time");
  return hp;
}

// beta = 0; partition per mode (adaptive: round(alpha) splits at evenly spaced
// event-time quantiles); h_j at its prior mean.
inline ModelState initial_state(const Dataset& d, const Hyperparameters& hp_in,
                                const SamplerConfig& cfg) {
  const Hyperparameters hp = resolve_hyperparameters(hp_in, d);
  const auto cand = split_candidates(d, hp.s_max);
  std::vector<double> interior;
  switch (cfg.partition_mode) {
    case PartitionMode::Adaptive: {
      const auto target = static_cast<std::size_t>(std::llround(hp.alpha));
      const std::size_t J0 = std::min({target, hp.j_max, cand.size()});
      for (std::size_t k = 1; k <= J0; ++k) {
        const std::size_t idx = k * cand.size() / (J0 + 1);
        if (interior.empty() || interior.back() != cand[idx]) interior.push_back(cand[idx]);
      }
      break;
    }
    case PartitionMode::EqualWidth: {
      const auto eq = TimePartition::equal_width(cfg.fixed_J, hp.s_max);
      interior.assign(eq.interior().begin(), eq.interior().end());
      break;
    }
    case PartitionMode::UniqueEvents:
      interior = cand;
      break;
  }
  ModelState s;
  s.beta.assign(d.p(), 0.0);
  s.partition = TimePartition(interior, hp.s_max);
  s.h.resize(s.partition.n_intervals());
  for (std::size_t j = 1; j <= s.partition.n_intervals(); ++j) {
    s.h[j - 1] = increment_shape(s.partition.lower(j), s.partition.upper(j), hp) / hp.c0;
  }
  return s;
}

// One MCMC chain over (beta, J, s, h). Owns the chain-local likelihood caches
// and its random stream; the dataset must outlive the sampler.
class Sampler {
 public:
  struct Proposal {
    ModelState state;
    double log_accept = 0.0;
  };

  Sampler(const Dataset& d, const Hyperparameters& hp, SamplerConfig cfg, ModelState init, Rng rng)
      : data_(d),
        hp_(resolve_hyperparameters(hp, d)),
        cfg_(std::move(cfg)),
        rng_(std::move(rng)),
        cache_(d),
        candidates_(split_candidates(d, hp_.s_max)) {
    cfg_.validate();
    init.check();
    if (init.beta.size() != d.p()) throw DomainError("initial state has wrong coefficient count");
    if (init.partition.s_max() != hp_.s_max) throw DomainError("initial partition ends off s_max");
    if (!cfg_.fixed_partition() && init.partition.J() > hp_.j_max) {
      throw DomainError("initial partition exceeds j_max");
    }
    beta_step_.resize(d.p());
    for (std::size_t m = 0; m < d.p(); ++m) {
      beta_step_[m] = cfg_.beta_step.size() == 1 ? cfg_.beta_step[0] : cfg_.beta_step.at(m);
    }
    h_step_ = cfg_.h_step;
    beta_adapt_count_.assign(d.p(), 0);
    event_x_sum_.assign(d.p(), 0.0);
    for (std::size_t k = 0; k < cache_.size(); ++k) {
      if (cache_.delta(k) == 1) {
        for (std::size_t m = 0; m < d.p(); ++m) event_x_sum_[m] += cache_.x(k, m);
      }
    }
    adapting_ = cfg_.adapt;
    set_state(std::move(init));
  }

  const ModelState& state() const noexcept { return state_; }
  const Hyperparameters& hyperparameters() const noexcept { return hp_; }
  const SamplerConfig& config() const noexcept { return cfg_; }
  const std::vector<double>& beta_steps() const noexcept { return beta_step_; }
  double h_step() const noexcept { return h_step_; }
  const std::array<MoveTally, 4>& tallies() const noexcept { return tally_; }
  Move last_move() const noexcept { return last_move_; }

  void set_adapting(bool on) noexcept { adapting_ = on; }
  void set_counting(bool on) noexcept { counting_ = on; }

  // Replaces the current state; beta caches are rebuilt.
  void set_state(ModelState s) {
    state_ = std::move(s);
    cache_.set_beta(state_.beta);
    cumhaz_dirty_ = true;
    rp_since_sync_ = 0;
  }

  MoveProbabilities move_probabilities() const {
    return cfg_.fixed_partition() ? fixed_partition_move_probabilities()
                                  : gpsurv::move_probabilities(state_.partition.J(), hp_);
  }

  // Exact log-likelihood of the current state (constant 0 when ignored).
  double log_likelihood() const {
    return cfg_.ignore_likelihood ? 0.0 : gpsurv::log_likelihood(data_, state_);
  }

  // Draws a move from the current move probabilities and applies it.
  Move step() {
    const auto mp = move_probabilities();
    const double u = uniform_open(rng_);
    if (u < mp.rp) {
      last_move_ = Move::RP;
      update_beta();
    } else if (u < mp.rp + mp.bh) {
      last_move_ = Move::BH;
      update_h();
    } else if (u < mp.rp + mp.bh + mp.bi) {
      last_move_ = Move::BI;
      birth_move();
    } else {
      last_move_ = Move::DI;
      death_move();
    }
    return last_move_;
  }

  // Move RP: coordinate-wise random-walk Metropolis on beta in random order.
  void update_beta() {
    const std::size_t p = state_.beta.size();
    if (p == 0) return;
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng_);
    if (!cfg_.ignore_likelihood) refresh_cumhaz();
    for (std::size_t m : order) {
      const double dbeta = beta_step_[m] * standard_normal(rng_);
      double log_ratio = 0.0;
      if (!cfg_.ignore_likelihood) {
        // Flat prior, symmetric proposal: only the likelihood changes.
        new_w_.resize(cache_.size());
        double risk_change = 0.0;
        for (std::size_t k = 0; k < cache_.size(); ++k) {
          new_w_[k] = cache_.weight(k) * std::exp(cache_.x(k, m) * dbeta);
          risk_change += cumhaz_[k] * (new_w_[k] - cache_.weight(k));
        }
        log_ratio = dbeta * event_x_sum_[m] - risk_change;
      }
      const bool accept = std::isfinite(log_ratio) && std::log(uniform_open(rng_)) < log_ratio;
      if (accept) {
        state_.beta[m] += dbeta;
        if (!cfg_.ignore_likelihood) cache_.shift_beta(m, dbeta, new_w_);
      }
      record(Move::RP, accept);
      if (adapting_) adapt(beta_step_[m], beta_adapt_count_[m], accept, 1e-6, 1e2);
    }
    if (++rp_since_sync_ >= 1000) {
      cache_.set_beta(state_.beta);
      rp_since_sync_ = 0;
    }
  }

  // Move BH: random-walk Metropolis on log h_j for every interval.
  void update_h() {
    const auto& part = state_.partition;
    for (std::size_t j = 1; j <= part.n_intervals(); ++j) {
      const double lo = part.lower(j);
      const double hi = part.upper(j);
      const double shape = increment_shape(lo, hi, hp_);
      double events = 0.0;
      double exposure = 0.0;
      if (!cfg_.ignore_likelihood) {
        events = static_cast<double>(cache_.events(lo, hi));
        exposure = cache_.exposure(lo, hi) / (hi - lo);
      }
      const double h = state_.h[j - 1];
      const double dlog = h_step_ * standard_normal(rng_);
      const double h_new = h * std::exp(dlog);
      // Full conditional h^(d + shape - 1) exp(-h (E/w + c0)), plus the
      // log-scale proposal correction log(h'/h).
      const double log_ratio = (events + shape) * dlog - (h_new - h) * (exposure + hp_.c0);
      const bool accept = h_new > 0.0 && std::isfinite(h_new) && std::isfinite(log_ratio) &&
                          std::log(uniform_open(rng_)) < log_ratio;
      if (accept) {
        state_.h[j - 1] = h_new;
        cumhaz_dirty_ = true;
      }
      record(Move::BH, accept);
      if (adapting_) adapt(h_step_, h_adapt_count_, accept, 1e-4, 1e1);
    }
  }

  // Event-time split candidates not already in the current partition.
  std::size_t n_split_candidates() const { return n_split_candidates(state_.partition); }

  // Move BI. Returns true when accepted.
  bool birth_move() {
    double s_star = 0.0;
    if (cfg_.split_proposal == SplitProposal::EventTimes) {
      if (n_split_candidates() == 0) {
        record(Move::BI, false);
        return false;
      }
      // Rejection sampling gives a uniform draw over the unused candidates.
      do {
        s_star = candidates_[uniform_index(rng_, candidates_.size())];
      } while (state_.partition.contains_split(s_star));
    } else {
      s_star = hp_.s_max * uniform_open(rng_);
      const auto& b = state_.partition.bounds();
      if (std::binary_search(b.begin(), b.end(), s_star)) {
        record(Move::BI, false);
        return false;
      }
    }
    const double U = uniform_open(rng_);
    return finish(Move::BI, propose_birth(s_star, U));
  }

  // Move DI. Returns true when accepted.
  bool death_move() {
    const std::size_t J = state_.partition.J();
    if (J == 0) {
      record(Move::DI, false);
      return false;
    }
    return finish(Move::DI, propose_death(1 + uniform_index(rng_, J)));
  }

  // Birth of split s_star with perturbation U, evaluated on the current state.
  Proposal propose_birth(double s_star, double U) const {
    const auto& part = state_.partition;
    const std::size_t J = part.J();
    if (J >= hp_.j_max) throw DomainError("birth proposed at j_max");
    const std::size_t j = part.index_of(s_star);
    const double lo = part.lower(j);
    const double hi = part.upper(j);
    const double h = state_.h[j - 1];
    const auto [h_lo, h_hi] = split_transform(h, lo, s_star, hi, U);

    Proposal prop{state_, 0.0};
    prop.state.partition.insert(s_star);
    prop.state.h[j - 1] = h_lo;
    prop.state.h.insert(prop.state.h.begin() + static_cast<std::ptrdiff_t>(j), h_hi);
    prop.log_accept = birth_log_ratio(J, lo, s_star, hi, h, h_lo, h_hi, U,
                                      log_candidate_measure(part));
    return prop;
  }

  // Death of interior split s_k (k in 1..J) on the current state. The ratio is
  // the exact reciprocal of the birth that would recreate the current state.
  Proposal propose_death(std::size_t k) const {
    const auto& part = state_.partition;
    const std::size_t J = part.J();
    if (k == 0 || k > J) throw DomainError("death index out of range");
    const double lo = part[k - 1];
    const double mid = part[k];
    const double hi = part[k + 1];
    const double h_lo = state_.h[k - 1];
    const double h_hi = state_.h[k];
    const auto [h, U] = merge_transform(h_lo, h_hi, lo, mid, hi);

    Proposal prop{state_, 0.0};
    prop.state.partition.erase(k);
    prop.state.h[k - 1] = h;
    prop.state.h.erase(prop.state.h.begin() + static_cast<std::ptrdiff_t>(k));
    if (cfg_.split_proposal == SplitProposal::EventTimes &&
        !std::binary_search(candidates_.begin(), candidates_.end(), mid)) {
      // The reverse birth can only propose event times.
      prop.log_accept = -std::numeric_limits<double>::infinity();
      return prop;
    }
    prop.log_accept = -birth_log_ratio(J - 1, lo, mid, hi, h, h_lo, h_hi, U,
                                       log_candidate_measure(prop.state.partition));
    return prop;
  }

  // log of the acceptance ratio for splitting (lo, hi] at s_star when the
  // partition has J splits before the birth.
  double birth_log_ratio(std::size_t J, double lo, double s_star, double hi, double h,
                         double h_lo, double h_hi, double U, double log_candidates) const {
    const double a = s_star - lo;
    const double b = hi - s_star;
    const double D = hi - lo;
    const double Jd = static_cast<double>(J);

    double log_lik_ratio = 0.0;
    if (!cfg_.ignore_likelihood) {
      log_lik_ratio = cache_.interval_term(lo, s_star, h_lo) + cache_.interval_term(s_star, hi, h_hi) -
                      cache_.interval_term(lo, hi, h);
    }
    const double log_prior_ratio =
        std::log(hp_.alpha / (Jd + 1.0)) + log_prior_increment(h_lo, lo, s_star, hp_) +
        log_prior_increment(h_hi, s_star, hi, hp_) - log_prior_increment(h, lo, hi, hp_) +
        std::log((2.0 * Jd + 3.0) * (2.0 * Jd + 2.0)) + std::log(a) + std::log(b) -
        2.0 * std::log(hp_.s_max) - std::log(D);
    // The Uniform(U | 0, 1) density in the denominator is 1.
    const double log_proposal_ratio =
        std::log(gpsurv::move_probabilities(J + 1, hp_).di) + log_candidates -
        std::log(gpsurv::move_probabilities(J, hp_).bi) - std::log(Jd + 1.0);
    const double log_jacobian = split_log_jacobian(h, lo, s_star, hi, U);
    const double total = log_lik_ratio + log_prior_ratio + log_proposal_ratio + log_jacobian;
    return std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
  }

 private:
  std::size_t n_split_candidates(const TimePartition& part) const {
    std::size_t used = 0;
    for (double s : part.interior()) {
      if (std::binary_search(candidates_.begin(), candidates_.end(), s)) ++used;
    }
    return candidates_.size() - used;
  }

  // log of the reciprocal birth-location density: the number of unused
  // candidates for event-time proposals, s_max for uniform proposals.
  double log_candidate_measure(const TimePartition& part) const {
    return cfg_.split_proposal == SplitProposal::EventTimes
               ? std::log(static_cast<double>(n_split_candidates(part)))
               : std::log(hp_.s_max);
  }

  bool finish(Move move, Proposal prop) {
    const bool accept = prop.log_accept >= 0.0 ||
                        std::log(uniform_open(rng_)) < prop.log_accept;
    if (accept) {
      state_ = std::move(prop.state);
      cumhaz_dirty_ = true;
    }
    record(move, accept);
    return accept;
  }

  void refresh_cumhaz() {
    if (!cumhaz_dirty_) return;
    cache_.cumhaz(state_, cumhaz_);
    cumhaz_dirty_ = false;
  }

  void record(Move m, bool accepted) {
    if (!counting_) return;
    auto& t = tally_[static_cast<std::size_t>(m)];
    ++t.proposed;
    if (accepted) ++t.accepted;
  }

  // Robbins-Monro on the log step toward the target acceptance rate.
  void adapt(double& step, std::uint64_t& count, bool accepted, double lo, double hi) const {
    ++count;
    const double gain = std::pow(static_cast<double>(count) + 1.0, -0.6);
    const double target = cfg_.target_acceptance;
    step = std::clamp(step * std::exp(gain * ((accepted ? 1.0 : 0.0) - target)), lo, hi);
  }

  const Dataset& data_;
  Hyperparameters hp_;
  SamplerConfig cfg_;
  Rng rng_;
  RiskSetCache cache_;
  std::vector<double> candidates_;
  ModelState state_;

  std::vector<double> beta_step_;
  double h_step_ = 0.5;
  std::vector<std::uint64_t> beta_adapt_count_;
  std::uint64_t h_adapt_count_ = 0;
  bool adapting_ = true;
  bool counting_ = true;

  std::vector<double> event_x_sum_;
  std::vector<double> cumhaz_;
  std::vector<double> new_w_;
  bool cumhaz_dirty_ = true;
  std::size_t rp_since_sync_ = 0;

  std::array<MoveTally, 4> tally_{};
  Move last_move_ = Move::RP;
};

// Runs one chain. Adaptation (if enabled) is active during burn-in only;
// every thin-th post-burn-in state is retained. Deterministic in
// (cfg.seed, stream).
inline SampleChain run_chain(const Dataset& d, const Hyperparameters& hp_in,
                             const SamplerConfig& cfg, std::optional<ModelState> init = {},
                             std::uint64_t stream = 0) {
  validate_dataset(d);
  cfg.validate();
  const Hyperparameters hp = resolve_hyperparameters(hp_in, d);
  ModelState start = init ? std::move(*init) : initial_state(d, hp, cfg);
  Sampler sampler(d, hp, cfg, std::move(start), make_stream(cfg.seed, stream));
  sampler.set_adapting(cfg.adapt && cfg.n_burnin > 0);
  sampler.set_counting(cfg.n_burnin == 0);

  SampleChain chain;
  chain.seed = cfg.seed;
  chain.stream = stream;
  const std::size_t kept = (cfg.n_iter - cfg.n_burnin) / cfg.thin;
  chain.samples.reserve(kept);
  chain.iterations.reserve(kept);
  chain.log_lik.reserve(kept);

  for (std::size_t t = 1; t <= cfg.n_iter; ++t) {
    try {
      sampler.step();
    } catch (const Error& e) {
      throw NumericError("iteration " + std::to_string(t) + ", move " +
                         std::string(move_name(sampler.last_move())) + ": " + e.what());
    }
    if (t == cfg.n_burnin) {
      sampler.set_adapting(false);
      sampler.set_counting(true);
    }
    if (t > cfg.n_burnin && (t - cfg.n_burnin) % cfg.thin == 0) {
      chain.samples.push_back(sampler.state());
      chain.iterations.push_back(t);
      chain.log_lik.push_back(sampler.log_likelihood());
    }
  }
  chain.acceptance = sampler.tallies();
  chain.beta_step = sampler.beta_steps();
  chain.h_step = sampler.h_step();
  return chain;
}

// Independent chains on separate threads; chain k uses stream k.
inline std::vector<SampleChain> run_chains(const Dataset& d, const Hyperparameters& hp,
                                           const SamplerConfig& cfg, std::size_t n_chains) {
  if (n_chains == 0) throw ConfigError("at least one chain is required");
  std::vector<SampleChain> chains(n_chains);
  std::vector<std::exception_ptr> errors(n_chains);
  std::vector<std::thread> workers;
  workers.reserve(n_chains);
  for (std::size_t k = 0; k < n_chains; ++k) {
    workers.emplace_back([&, k] {
      try {
        chains[k] = run_chain(d, hp, cfg, std::nullopt, k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return chains;
}

}  // namespace gpsurv
