#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "zimed/error.hpp"
#include "zimed/false_zero.hpp"
#include "zimed/outcome.hpp"

using namespace zimed;

TEST(FalseZero, DetectionProbabilityBranches) {
  for (double eta : {0.0, 0.4, 3.0}) {
    const FalseZeroMechanism mech{eta, 20.0};
    EXPECT_EQ(mech.prob_observed_zero(0.0), 1.0);
    EXPECT_EQ(mech.prob_observed_zero(21.0), 0.0);
  }
  EXPECT_EQ(FalseZeroMechanism({0.0, 20.0}).prob_observed_zero(10.0), 1.0);
  EXPECT_THROW(FalseZeroMechanism({1.0, 20.0}).prob_observed_zero(-1.0), DomainError);
}

TEST(FalseZero, ObserveKeepsZerosAndLargeValues) {
  Rng rng(5);
  const FalseZeroMechanism mech{0.1, 20.0};
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(mech.observe(0.0, rng), 0.0);
    EXPECT_EQ(mech.observe(50.0, rng), 50.0);
  }
}

TEST(FalseZero, MonteCarloZeroFrequency) {
  Rng rng(17);
  const FalseZeroMechanism mech{std::sqrt(0.5), 20.0};
  const int n = 1000000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += mech.observe(2.0, rng) == 0.0;
  const double p = std::exp(-1.0);
  EXPECT_NEAR(static_cast<double>(zeros) / n, p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(FalseZero, LogProbObservedPositive) {
  const FalseZeroMechanism mech{0.8, 20.0};
  EXPECT_NEAR(mech.log_prob_observed_positive(3.0), std::log(1 - std::exp(-0.64 * 3.0)), 1e-14);
  EXPECT_EQ(mech.log_prob_observed_positive(25.0), 0.0);
  EXPECT_EQ(FalseZeroMechanism({0.0, 20.0}).log_prob_observed_positive(3.0),
            -std::numeric_limits<double>::infinity());
}

TEST(Outcome, MeanExamples) {
  OutcomeParams p;
  EXPECT_EQ(outcome_mean(p, 3.0, 2.0), 0.0);
  p.beta = {1, 0, 0, 2, 0, 0};
  EXPECT_EQ(outcome_mean(p, 3.0, 0.0), 7.0);
  p.beta = {1, 1, 1, 1, 1, 1};
  const double x = 2, m = 3;
  EXPECT_EQ(outcome_mean(p, x, m), 15.0);
  EXPECT_EQ(outcome_mean(p, x, m), x * m + x + x + m + 1 + 1);
  EXPECT_THROW(outcome_mean(p, x, -1.0), DomainError);
}

TEST(Outcome, LogpdfExamples) {
  OutcomeParams p;
  p.beta = {0.5, 0.2, 1.0, -0.3, 0.1, 0.05};
  p.delta = 1.0;
  const double mean = outcome_mean(p, 1.5, 2.0);
  EXPECT_NEAR(outcome_logpdf(p, mean, 1.5, 2.0), -0.5 * std::log(2 * M_PI), 1e-14);
  p.delta = 2.5;
  EXPECT_NEAR(outcome_logpdf(p, mean + 2.5, 1.5, 2.0), -0.5 * std::log(2 * M_PI) - std::log(2.5) - 0.5, 1e-14);
}

TEST(Outcome, LogpdfMatchesGenericNormalOracle) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 50; ++i) {
    OutcomeParams p;
    for (double& b : p.beta) b = u(rng);
    p.delta = 0.3 + std::abs(u(rng));
    const double x = u(rng), m = std::abs(u(rng)) * 3, y = u(rng) * 4, off = u(rng);
    const double mean = p.beta[0] + p.beta[1] * m + p.beta[2] + p.beta[3] * x + p.beta[4] * x +
                        p.beta[5] * x * m + off;
    EXPECT_NEAR(outcome_logpdf(p, y, x, m, off), oracle::normal_logpdf(y, mean, p.delta), 1e-12);
  }
}
