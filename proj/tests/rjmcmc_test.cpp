#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "support.hpp"

using namespace gpsurv;
using gpsurv::testing::batch_se;
using gpsurv::testing::random_dataset;
using gpsurv::testing::random_state;

namespace {

SamplerConfig quiet_config(std::size_t n_iter, std::uint64_t seed = 1) {
  SamplerConfig cfg;
  cfg.n_iter = n_iter;
  cfg.n_burnin = 0;
  cfg.thin = 1;
  cfg.adapt = false;
  cfg.seed = seed;
  return cfg;
}

// Total-variation distance between a histogram and a probability vector.
double tv_distance(const std::vector<std::size_t>& counts, const std::vector<double>& probs) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  double tv = 0.0;
  for (std::size_t k = 0; k < std::max(counts.size(), probs.size()); ++k) {
    const double emp = k < counts.size() ? static_cast<double>(counts[k]) / total : 0.0;
    const double p = k < probs.size() ? probs[k] : 0.0;
    tv += std::fabs(emp - p);
  }
  return 0.5 * tv;
}

std::vector<std::size_t> j_histogram(const SampleChain& chain) {
  std::vector<std::size_t> counts;
  for (const auto& s : chain.samples) {
    if (counts.size() <= s.partition.J()) counts.resize(s.partition.J() + 1, 0);
    ++counts[s.partition.J()];
  }
  return counts;
}

}  // namespace

TEST(MoveProbabilities, BelowMode) {
  Hyperparameters hp;
  const auto mp = move_probabilities(5, hp);
  EXPECT_NEAR(mp.bi, 0.2, 1e-15);
  EXPECT_NEAR(mp.di, 0.1, 1e-15);
  EXPECT_NEAR(mp.rp, 0.35, 1e-15);
  EXPECT_NEAR(mp.bh, 0.35, 1e-15);
}

TEST(MoveProbabilities, AboveMode) {
  Hyperparameters hp;
  const auto mp = move_probabilities(15, hp);
  EXPECT_NEAR(mp.bi, 0.125, 1e-15);
  EXPECT_NEAR(mp.di, 0.2, 1e-15);
}

TEST(MoveProbabilities, Boundaries) {
  Hyperparameters hp;
  EXPECT_EQ(move_probabilities(hp.j_max, hp).bi, 0.0);
  EXPECT_EQ(move_probabilities(0, hp).di, 0.0);
  for (std::size_t J = 0; J <= hp.j_max; ++J) {
    const auto mp = move_probabilities(J, hp);
    EXPECT_NEAR(mp.rp + mp.bh + mp.bi + mp.di, 1.0, 1e-15);
    EXPECT_LT(mp.bi + mp.di, hp.c_cap);
  }
}

TEST(SplitTransform, MidpointFairCoinHalves) {
  const auto [lo, hi] = split_transform(1.0, 0.0, 1.0, 2.0, 0.5);
  EXPECT_NEAR(lo, 0.5, 1e-15);
  EXPECT_NEAR(hi, 0.5, 1e-15);
}

TEST(SplitTransform, AsymmetricExample) {
  const auto [lo, hi] = split_transform(1.0, 0.0, 0.5, 2.0, 0.4);
  EXPECT_NEAR(lo, 0.25 * std::pow(1.5, 0.75), 1e-14);
  EXPECT_NEAR(hi, 0.75 * std::pow(1.5, -0.25), 1e-14);
  EXPECT_NEAR(lo, 0.33885, 1e-5);
  EXPECT_NEAR(hi, 0.67771, 1e-5);
  // Weighted log-mean and perturbation constraints.
  EXPECT_NEAR(0.5 * std::log(lo / 0.5) + 1.5 * std::log(hi / 1.5), 2.0 * std::log(1.0 / 2.0), 1e-5);
  EXPECT_NEAR(lo * 1.5 / (hi * 0.5), 0.6 / 0.4, 1e-5);
}

TEST(SplitTransform, RejectsBadVariate) {
  EXPECT_THROW(split_transform(1.0, 0.0, 1.0, 2.0, 0.0), DomainError);
  EXPECT_THROW(split_transform(1.0, 0.0, 1.0, 2.0, 1.0), DomainError);
}

TEST(SplitTransform, ConstraintSweep) {
  Rng rng = make_stream(21);
  for (int rep = 0; rep < 10000; ++rep) {
    const double s_lo = 5.0 * uniform_open(rng);
    const double s_hi = s_lo + 0.01 + 5.0 * uniform_open(rng);
    const double s_star = s_lo + (s_hi - s_lo) * uniform_open(rng);
    const double h = std::exp(4.0 * standard_normal(rng));
    const double U = uniform_open(rng);
    const auto [lo, hi] = split_transform(h, s_lo, s_star, s_hi, U);
    const double a = s_star - s_lo, b = s_hi - s_star, D = s_hi - s_lo;
    const double lhs = a * std::log(lo / a) + b * std::log(hi / b);
    const double rhs = D * std::log(h / D);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::fabs(rhs)));
  }
}

TEST(MergeTransform, InvertsSplit) {
  Rng rng = make_stream(22);
  for (int rep = 0; rep < 10000; ++rep) {
    const double s_lo = 5.0 * uniform_open(rng);
    const double s_hi = s_lo + 0.01 + 5.0 * uniform_open(rng);
    const double s_star = s_lo + (s_hi - s_lo) * (0.01 + 0.98 * uniform_open(rng));
    const double h = std::exp(2.0 * standard_normal(rng));
    const double U = 0.01 + 0.98 * uniform_open(rng);
    const auto [lo, hi] = split_transform(h, s_lo, s_star, s_hi, U);
    const auto [h_back, U_back] = merge_transform(lo, hi, s_lo, s_star, s_hi);
    EXPECT_NEAR(h_back, h, 1e-12 * h);
    EXPECT_NEAR(U_back, U, 1e-12);
  }
}

TEST(MergeTransform, SymmetricMerge) {
  const auto [h, U] = merge_transform(0.5, 0.5, 0.0, 1.0, 2.0);
  EXPECT_NEAR(h, 1.0, 1e-15);
  EXPECT_NEAR(U, 0.5, 1e-15);
  // Equal heights over unequal widths still give U = 0.5.
  const auto [h2, U2] = merge_transform(0.3, 0.9, 0.0, 1.0, 4.0);
  EXPECT_NEAR(h2 / 4.0, 0.3, 1e-15);
  EXPECT_NEAR(U2, 0.5, 1e-15);
}

TEST(SplitJacobian, ReferenceValue) {
  const double expected = 0.1875 * std::pow(0.6, -0.5) * std::pow(0.4, -1.5);
  EXPECT_NEAR(std::exp(split_log_jacobian(1.0, 0.0, 0.5, 2.0, 0.4)), expected, 1e-14);
  EXPECT_NEAR(expected, 0.95683, 1e-5);
}

TEST(SplitJacobian, SymmetricCaseIsH) {
  EXPECT_NEAR(std::exp(split_log_jacobian(2.7, 0.0, 1.0, 2.0, 0.5)), 2.7, 1e-14);
}

TEST(SplitJacobian, MatchesFiniteDifferences) {
  Rng rng = make_stream(23);
  for (int rep = 0; rep < 1000; ++rep) {
    const double s_lo = 3.0 * uniform_open(rng);
    const double s_hi = s_lo + 0.1 + 3.0 * uniform_open(rng);
    const double s_star = s_lo + (s_hi - s_lo) * (0.05 + 0.9 * uniform_open(rng));
    const double h = 0.1 + 3.0 * uniform_open(rng);
    const double U = 0.05 + 0.9 * uniform_open(rng);
    const double eh = 1e-6 * h;
    const double eu = 1e-6;
    const auto fp = [&](double hh, double uu) { return split_transform(hh, s_lo, s_star, s_hi, uu); };
    const auto [a1, b1] = fp(h + eh, U);
    const auto [a0, b0] = fp(h - eh, U);
    const auto [c1, d1] = fp(h, U + eu);
    const auto [c0, d0] = fp(h, U - eu);
    const double det = ((a1 - a0) / (2 * eh)) * ((d1 - d0) / (2 * eu)) -
                       ((b1 - b0) / (2 * eh)) * ((c1 - c0) / (2 * eu));
    const double analytic = std::exp(split_log_jacobian(h, s_lo, s_star, s_hi, U));
    EXPECT_NEAR(std::fabs(det) / analytic, 1.0, 1e-6);
  }
}

class Reversibility : public ::testing::TestWithParam<SplitProposal> {};

TEST_P(Reversibility, BirthThenDeathCancels) {
  Rng rng = make_stream(24);
  SamplerConfig cfg = quiet_config(10);
  cfg.split_proposal = GetParam();
  Hyperparameters hp;
  for (int rep = 0; rep < 300; ++rep) {
    const auto d = random_dataset(rng, 30, 2);
    const auto cand = split_candidates(d, d.y_max());
    const std::size_t J = rep % 6;
    auto state = random_state(rng, 2, J, d.y_max());
    Sampler sampler(d, hp, cfg, state, make_stream(1));
    double s_star;
    do {
      s_star = GetParam() == SplitProposal::EventTimes ? cand[uniform_index(rng, cand.size())]
                                                       : d.y_max() * uniform_open(rng);
    } while (state.partition.contains_split(s_star) || s_star >= d.y_max());
    const double U = uniform_open(rng);
    const auto birth = sampler.propose_birth(s_star, U);
    ASSERT_TRUE(std::isfinite(birth.log_accept));
    sampler.set_state(birth.state);
    const auto& in = birth.state.partition.interior();
    const std::size_t k = 1 + static_cast<std::size_t>(std::find(in.begin(), in.end(), s_star) - in.begin());
    const auto death = sampler.propose_death(k);
    EXPECT_NEAR(birth.log_accept + death.log_accept, 0.0, 1e-10);
    EXPECT_EQ(death.state.partition, state.partition);
  }
}

INSTANTIATE_TEST_SUITE_P(Proposals, Reversibility,
                         ::testing::Values(SplitProposal::EventTimes, SplitProposal::Uniform),
                         [](const auto& info) {
                           return info.param == SplitProposal::EventTimes ? "EventTimes" : "Uniform";
                         });

TEST(DeathMove, LastSplitLeavesSingleInterval) {
  Rng rng = make_stream(25);
  const auto d = random_dataset(rng, 20, 1);
  const auto cand = split_candidates(d, d.y_max());
  const std::vector<double> one{cand[cand.size() / 2]};
  ModelState st{{0.0}, TimePartition(one, d.y_max()), {0.5, 0.5}};
  Sampler sampler(d, Hyperparameters{}, quiet_config(10), st, make_stream(2));
  const auto death = sampler.propose_death(1);
  EXPECT_EQ(death.state.partition.bounds(), (std::vector<double>{0.0, d.y_max()}));
  const auto [h, U] = merge_transform(0.5, 0.5, 0.0, one[0], d.y_max());
  EXPECT_EQ(death.state.h, std::vector<double>{h});
}

TEST(DeathMove, NonEventSplitCannotDieUnderEventProposals) {
  Rng rng = make_stream(26);
  const auto d = random_dataset(rng, 20, 1);
  const auto st = random_state(rng, 1, 2, d.y_max());
  Sampler sampler(d, Hyperparameters{}, quiet_config(10), st, make_stream(3));
  EXPECT_EQ(sampler.propose_death(1).log_accept, -std::numeric_limits<double>::infinity());
}

TEST(BirthMove, AcceptedStateGainsOneSplit) {
  Rng rng = make_stream(27);
  const auto d = random_dataset(rng, 40, 2);
  Hyperparameters hp;
  auto cfg = quiet_config(10);
  Sampler sampler(d, hp, cfg, initial_state(d, hp, cfg), make_stream(4));
  int accepted = 0;
  for (int t = 0; t < 300; ++t) {
    const auto before = sampler.state();
    if (sampler.state().partition.J() >= hp.j_max) break;
    if (sampler.birth_move()) {
      ++accepted;
      EXPECT_EQ(sampler.state().partition.J(), before.partition.J() + 1);
      EXPECT_EQ(sampler.state().h.size(), before.h.size() + 1);
    } else {
      EXPECT_EQ(sampler.state(), before);
    }
  }
  EXPECT_GT(accepted, 0);
}

TEST(UpdateBeta, TinyStepLeavesStateUnchanged) {
  Rng rng = make_stream(28);
  const auto d = random_dataset(rng, 30, 2);
  auto cfg = quiet_config(10);
  cfg.beta_step = {1e-300};
  const auto init = random_state(rng, 2, 2, d.y_max());
  Sampler sampler(d, Hyperparameters{}, cfg, init, make_stream(5));
  for (int t = 0; t < 100; ++t) sampler.update_beta();
  for (std::size_t m = 0; m < 2; ++m) EXPECT_NEAR(sampler.state().beta[m], init.beta[m], 1e-250);
}

TEST(UpdateBeta, ConjugateGridOracle) {
  // One binary covariate, single interval with the baseline held fixed.
  Rng rng = make_stream(29);
  std::vector<Subject> subjects;
  for (int i = 0; i < 60; ++i) {
    const double x = i % 2;
    const double t = -std::log(uniform_open(rng)) / (0.1 * std::exp(0.7 * x));
    subjects.push_back({std::min(t, 25.0), t <= 25.0 ? 1 : 0, {x}});
  }
  subjects.push_back({30.0, 0, {0.0}});
  const Dataset d(subjects, {"x"});
  const double rate = 0.1;
  ModelState st{{0.0}, TimePartition({}, d.y_max()), {rate * d.y_max()}};

  double d1 = 0.0, T1 = 0.0;
  for (const auto& s : subjects) {
    if (s.x[0] == 1.0) {
      d1 += s.delta;
      T1 += s.y;
    }
  }
  // Posterior kernel exp(beta d1 - rate T1 e^beta) on a fine grid.
  double num = 0.0, den = 0.0;
  for (int g = 0; g <= 200000; ++g) {
    const double b = -5.0 + 10.0 * g / 200000.0;
    const double w = std::exp(b * d1 - rate * T1 * std::exp(b) - (0.7 * d1 - rate * T1 * std::exp(0.7)));
    num += b * w;
    den += w;
  }
  const double oracle = num / den;

  auto cfg = quiet_config(10);
  cfg.beta_step = {0.5};
  Sampler sampler(d, Hyperparameters{}, cfg, st, make_stream(6));
  sampler.set_adapting(false);
  std::vector<double> trace;
  for (int t = 0; t < 200000; ++t) {
    sampler.update_beta();
    trace.push_back(sampler.state().beta[0]);
  }
  EXPECT_NEAR(mean(trace), oracle, 3.0 * batch_se(trace));
}

TEST(UpdateH, NoDataIntervalRecoversPrior) {
  Rng rng = make_stream(30);
  const auto d = random_dataset(rng, 30, 1);
  Hyperparameters hp;
  hp.s_max = 2.0 * d.y_max();
  auto cfg = quiet_config(10);
  cfg.partition_mode = PartitionMode::EqualWidth;
  cfg.h_step = 1.5;
  const std::vector<double> split{d.y_max()};
  ModelState st{{0.0}, TimePartition(split, hp.s_max), {1.0, 1.0}};
  Sampler sampler(d, hp, cfg, st, make_stream(7));
  sampler.set_adapting(false);
  std::vector<double> trace;
  for (int t = 0; t < 100000; ++t) {
    sampler.update_h();
    for (double h : sampler.state().h) ASSERT_GT(h, 0.0);
    trace.push_back(sampler.state().h[1]);
  }
  const double prior_mean = increment_shape(d.y_max(), hp.s_max, hp) / hp.c0;
  EXPECT_NEAR(mean(trace), prior_mean, 3.0 * batch_se(trace));
}

TEST(RunChain, FixedPartitionNeverMoves) {
  Rng rng = make_stream(31);
  const auto d = random_dataset(rng, 50, 2);
  auto cfg = quiet_config(5000);
  cfg.partition_mode = PartitionMode::EqualWidth;
  cfg.fixed_J = 10;
  const auto chain = run_chain(d, Hyperparameters{}, cfg);
  const auto expected = TimePartition::equal_width(10, d.y_max());
  EXPECT_EQ(expected.n_intervals(), 11u);
  for (const auto& s : chain.samples) EXPECT_EQ(s.partition, expected);
  EXPECT_EQ(chain.acceptance[2].proposed + chain.acceptance[3].proposed, 0u);
}

TEST(RunChain, UniqueEventPartition) {
  Rng rng = make_stream(32);
  const auto d = random_dataset(rng, 40, 1);
  auto cfg = quiet_config(2000);
  cfg.partition_mode = PartitionMode::UniqueEvents;
  const auto chain = run_chain(d, Hyperparameters{}, cfg);
  const auto cand = split_candidates(d, d.y_max());
  for (const auto& s : chain.samples) {
    EXPECT_TRUE(std::equal(cand.begin(), cand.end(), s.partition.interior().begin(),
                           s.partition.interior().end()));
  }
}

TEST(RunChain, SameSeedBitIdentical) {
  Rng rng = make_stream(33);
  const auto d = random_dataset(rng, 40, 2);
  SamplerConfig cfg;
  cfg.n_iter = 4000;
  cfg.n_burnin = 1000;
  cfg.thin = 3;
  cfg.seed = 99;
  const auto a = run_chain(d, Hyperparameters{}, cfg);
  const auto b = run_chain(d, Hyperparameters{}, cfg);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.log_lik, b.log_lik);
  EXPECT_EQ(write_samples(a), write_samples(b));
  EXPECT_EQ(a.size(), 1000u);
  for (const auto& t : a.acceptance) EXPECT_LE(t.accepted, t.proposed);
}

TEST(RunChain, RetainedStatesSatisfyInvariants) {
  Rng rng = make_stream(34);
  const auto d = random_dataset(rng, 60, 3);
  auto cfg = quiet_config(20000);
  cfg.adapt = true;
  cfg.n_burnin = 5000;
  const auto chain = run_chain(d, Hyperparameters{}, cfg);
  for (const auto& s : chain.samples) {
    EXPECT_NO_THROW(s.check());
    EXPECT_EQ(s.partition.s_max(), d.y_max());
    EXPECT_LE(s.partition.J(), 50u);
  }
}

TEST(PriorRecovery, UniformSplitsGivePoissonJ) {
  // Small time scales give tiny gamma shapes, so mixing in J needs the
  // log-hazard step to adapt during burn-in.
  const auto sc = scenario_preset(1);
  const auto d = simulate_replicate(sc, calibrate_censoring(sc), 0);
  Hyperparameters hp;
  hp.alpha = 3.0;
  auto cfg = quiet_config(350000, 5);
  cfg.n_burnin = 50000;
  cfg.adapt = true;
  cfg.ignore_likelihood = true;
  cfg.split_proposal = SplitProposal::Uniform;
  const auto chain = run_chain(d, hp, cfg);
  std::vector<double> probs;
  for (std::size_t J = 0; J <= hp.j_max; ++J) probs.push_back(std::exp(log_prior_J(J, hp)));
  EXPECT_LT(tv_distance(j_histogram(chain), probs), 0.05);
}

TEST(PriorRecovery, EventTimeSplitsMatchDiscreteTarget) {
  // With splits restricted to event times, the flat-likelihood target over a
  // split set S of size J is proportional to
  //   alpha^J / J! * (2J+1)! / s_max^(2J+1) * prod(gaps of S).
  std::vector<Subject> subjects;
  for (int t = 1; t <= 6; ++t) subjects.push_back({30.0 * t, 1, {0.0}});
  subjects.push_back({240.0, 0, {0.0}});
  const Dataset d(subjects, {"x"});
  Hyperparameters hp;
  hp.alpha = 2.0;
  hp.j_max = 10;
  const auto cand = split_candidates(d, d.y_max());
  const std::size_t m = cand.size();
  const double s_max = d.y_max();

  // gap_sum[k][i]: sum over increasing chains of k splits ending at cand[i]
  // of the product of gaps from 0.
  std::vector<std::vector<double>> gap_sum(m + 1, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) gap_sum[1][i] = cand[i];
  for (std::size_t k = 2; k <= m; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t l = 0; l < i; ++l) gap_sum[k][i] += gap_sum[k - 1][l] * (cand[i] - cand[l]);
    }
  }
  std::vector<double> weight(m + 1, 0.0);
  for (std::size_t J = 0; J <= m; ++J) {
    double Z = J == 0 ? s_max : 0.0;
    if (J > 0) {
      for (std::size_t i = 0; i < m; ++i) Z += gap_sum[J][i] * (s_max - cand[i]);
    }
    const double Jd = double(J);
    weight[J] = std::exp(log_poisson(J, hp.alpha) + std::lgamma(2 * Jd + 2) - (2 * Jd + 1) * std::log(s_max)) * Z;
  }
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  for (auto& w : weight) w /= total;

  auto cfg = quiet_config(450000, 6);
  cfg.n_burnin = 50000;
  cfg.adapt = true;
  cfg.ignore_likelihood = true;
  const auto chain = run_chain(d, hp, cfg);
  EXPECT_LT(tv_distance(j_histogram(chain), weight), 0.02);
}

TEST(Adaptation, FixedDimensionRatesNearTarget) {
  auto sc = scenario_preset(1);
  sc.seed = 3;
  const auto d = simulate_replicate(sc, calibrate_censoring(sc), 0);
  SamplerConfig cfg;
  cfg.n_iter = 40000;
  cfg.n_burnin = 20000;
  const auto chain = run_chain(d, Hyperparameters{}, cfg);
  for (std::size_t m : {0u, 1u}) {
    EXPECT_GE(chain.acceptance[m].rate(), 0.25);
    EXPECT_LE(chain.acceptance[m].rate(), 0.50);
  }
}
