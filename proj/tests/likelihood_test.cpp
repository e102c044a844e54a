#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace gpsurv;
using gpsurv::testing::oracle_log_likelihood;
using gpsurv::testing::random_dataset;
using gpsurv::testing::random_state;

namespace {

const TimePartition kTens = TimePartition::from_bounds({0.0, 10.0, 20.0, 30.0});

ModelState single_interval(double h, std::vector<double> beta = {0.0}) {
  return {std::move(beta), TimePartition({}, 2.0), {h}};
}

}  // namespace

TEST(IntervalIndex, Brackets) {
  EXPECT_EQ(interval_index(13.0, kTens), 2u);
  EXPECT_EQ(interval_index(10.0, kTens), 1u);
  EXPECT_THROW(interval_index(35.0, kTens), DomainError);
  EXPECT_THROW(interval_index(0.0, kTens), DomainError);
}

TEST(IntervalExposure, Cases) {
  EXPECT_EQ(interval_exposure(5.0, 2, kTens), 0.0);
  EXPECT_EQ(interval_exposure(25.0, 2, kTens), 10.0);
  EXPECT_EQ(interval_exposure(13.0, 2, kTens), 3.0);
}

TEST(LogLikelihood, SingleIntervalAnalytic) {
  const Dataset d({{1.0, 1, {0.0}}}, {"x"});
  EXPECT_NEAR(log_likelihood(d, single_interval(4.0)), std::log(2.0) - 2.0, 1e-15);
}

TEST(LogLikelihood, ProportionalHazardsScaling) {
  const Dataset d({{1.0, 1, {1.0}}}, {"x"});
  EXPECT_NEAR(log_likelihood(d, single_interval(4.0, {std::log(2.0)})), std::log(4.0) - 4.0, 1e-14);
}

TEST(LogLikelihoodSubject, CensoredAndEvent) {
  const auto st = single_interval(4.0);
  EXPECT_NEAR(log_likelihood_subject({1.0, 0, {0.0}}, st), -2.0, 1e-15);
  EXPECT_NEAR(log_likelihood_subject({1.0, 1, {0.0}}, st), std::log(2.0) - 2.0, 1e-15);
}

TEST(LogLikelihood, MatchesBruteForceOracle) {
  Rng rng = make_stream(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto d = random_dataset(rng, 20, 2);
    const auto st = random_state(rng, 2, 3, d.y_max());
    const double oracle = static_cast<double>(oracle_log_likelihood(d, st));
    EXPECT_NEAR(log_likelihood(d, st), oracle, 1e-10 * std::max(1.0, std::fabs(oracle)));
  }
}

TEST(LogLikelihood, SubjectTermsAddUp) {
  Rng rng = make_stream(12);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_dataset(rng, 30, 3);
    const auto st = random_state(rng, 3, 4, d.y_max());
    double sum = 0.0;
    for (double v : log_likelihood_terms(d, st)) sum += v;
    EXPECT_NEAR(sum, log_likelihood(d, st), 1e-12 * std::max(1.0, std::fabs(sum)));
  }
}

TEST(LogLikelihood, GroupedCacheAgreesWithDirectPath) {
  Rng rng = make_stream(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_dataset(rng, 40, 2);
    const auto st = random_state(rng, 2, 5, d.y_max());
    RiskSetCache cache(d);
    cache.set_beta(st.beta);
    EXPECT_NEAR(cache.log_likelihood(st), log_likelihood(d, st), 1e-10);
  }
}

TEST(LogLikelihood, RefinementInvariance) {
  Rng rng = make_stream(14);
  for (int rep = 0; rep < 200; ++rep) {
    const auto d = random_dataset(rng, 25, 2);
    auto st = random_state(rng, 2, 3, d.y_max());
    const double before = log_likelihood(d, st);
    const double s_star = d.y_max() * uniform_open(rng);
    if (st.partition.contains_split(s_star)) continue;
    const std::size_t j = st.partition.index_of(s_star);
    const double lo = st.partition.lower(j);
    const double hi = st.partition.upper(j);
    const double h = st.h[j - 1];
    st.partition.insert(s_star);
    st.h[j - 1] = h * (s_star - lo) / (hi - lo);
    st.h.insert(st.h.begin() + static_cast<std::ptrdiff_t>(j), h * (hi - s_star) / (hi - lo));
    EXPECT_NEAR(log_likelihood(d, st), before, 1e-10);
  }
}

TEST(LogLikelihood, SharedCovariatesTradeOffWithBaseline) {
  Rng rng = make_stream(15);
  std::vector<Subject> subjects;
  for (int i = 0; i < 15; ++i) subjects.push_back({1.0 + 9.0 * uniform_open(rng), i % 3 != 0, {0.7, -1.2}});
  const Dataset d(subjects, {"a", "b"});
  auto st = random_state(rng, 2, 3, d.y_max());
  const double before = log_likelihood(d, st);
  const double c = 0.4;
  st.beta[1] += c;
  for (auto& h : st.h) h *= std::exp(-c * -1.2);
  EXPECT_NEAR(log_likelihood(d, st), before, 1e-10);
}

TEST(LogLikelihood, RaisingIncrementLowersSurvival) {
  Rng rng = make_stream(16);
  const auto st = random_state(rng, 1, 3, 10.0);
  for (std::size_t j = 1; j <= 4; ++j) {
    const double y = st.partition.upper(j);
    auto bumped = st;
    bumped.h[j - 1] *= 1.5;
    EXPECT_LT(log_likelihood_subject({y, 0, {0.3}}, bumped), log_likelihood_subject({y, 0, {0.3}}, st));
  }
}

TEST(LogLikelihood, OverflowIsNumericError) {
  const Dataset d({{1.0, 1, {1000.0}}}, {"x"});
  EXPECT_THROW(log_likelihood(d, single_interval(1.0, {1.0})), NumericError);
}

TEST(TimePartition, RejectsUnsortedInterior) {
  const std::vector<double> bad{2.0, 1.0};
  EXPECT_THROW(TimePartition(bad, 3.0), DomainError);
  const std::vector<double> past{4.0};
  EXPECT_THROW(TimePartition(past, 3.0), DomainError);
}

TEST(TimePartition, InsertAndErase) {
  auto part = TimePartition::equal_width(2, 3.0);
  EXPECT_EQ(part.J(), 2u);
  EXPECT_EQ(part.insert(1.5), 2u);
  EXPECT_EQ(part.J(), 3u);
  part.erase(2);
  EXPECT_EQ(part.bounds(), (std::vector<double>{0.0, 1.0, 2.0, 3.0}));
}
