#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "zimed/distributions.hpp"
#include "zimed/error.hpp"

using namespace zimed;

namespace {

LinkParams link(double a0, double a1, double g0, double g1, double sigma = 1.0, double r = 1.0) {
  LinkParams p;
  p.alpha0 = a0;
  p.alpha1 = a1;
  p.gamma0 = g0;
  p.gamma1 = g1;
  p.sigma = sigma;
  p.r = r;
  return p;
}

double logit(double p) { return std::log(p / (1 - p)); }

}  // namespace

TEST(LinkLocation, Examples) {
  EXPECT_DOUBLE_EQ(link_location(MediatorFamily::zilon, link(0, 0, 0, 0), 7.0), 0.0);
  EXPECT_DOUBLE_EQ(link_location(MediatorFamily::zinb, link(0, 1, 0, 0), 0.0), 1.0);
  EXPECT_DOUBLE_EQ(link_location(MediatorFamily::zip, link(0.5, -0.25, 0, 0), 2.0), 1.0);
}

TEST(LinkLocation, OverflowIsANumericalError) {
  EXPECT_THROW(link_location(MediatorFamily::zip, link(800, 0, 0, 0), 0.0), NumericalError);
}

TEST(ZeroProb, ZilonIsTheLogisticLink) {
  for (double x : {-3.0, 0.0, 11.0}) {
    EXPECT_DOUBLE_EQ(zero_prob(MediatorFamily::zilon, link(0, 0, 0, 0), x), 0.5);
  }
}

TEST(ZeroProb, ZinbAddsSamplingZerosMonteCarlo) {
  const LinkParams p = link(std::log(2.0), 0, logit(0.3), 0, 1, 1);
  const double expected = 0.3 + 0.7 / 3.0;
  EXPECT_NEAR(zero_prob(MediatorFamily::zinb, p, 0.0), expected, 1e-14);

  Rng rng(101);
  const int n = 1000000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_true_mediator(MediatorFamily::zinb, p, 0.0, rng) == 0.0;
  const double freq = static_cast<double>(zeros) / n;
  EXPECT_NEAR(freq, expected, 3 * std::sqrt(expected * (1 - expected) / n));
}

TEST(ZeroProb, ZipLimitWithoutInflation) {
  const LinkParams p = link(std::log(30.0), 0, -800, 0);
  EXPECT_NEAR(zero_prob(MediatorFamily::zip, p, 0.0), std::exp(-30.0), 1e-25);
}

TEST(MediatorMean, ZilonMonteCarlo) {
  const LinkParams p = link(0, 0, 0, 0, std::sqrt(2.0));
  const double expected = 0.5 * std::exp(1.0);
  EXPECT_NEAR(mediator_mean(MediatorFamily::zilon, p, 0.0), expected, 1e-14);
  EXPECT_NEAR(expected, 1.35914, 1e-5);

  Rng rng(7);
  const int n = 1000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double m = sample_true_mediator(MediatorFamily::zilon, p, 0.0, rng);
    s += m;
    s2 += m * m;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(mean, expected, 3 * se);
}

TEST(MediatorMean, ZinbMonteCarlo) {
  const LinkParams p = link(std::log(4.0), 0, 0, 0, 1, 1.7);
  EXPECT_NEAR(mediator_mean(MediatorFamily::zinb, p, 0.0), 2.0, 1e-14);

  Rng rng(8);
  const int n = 1000000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double m = sample_true_mediator(MediatorFamily::zinb, p, 0.0, rng);
    s += m;
    s2 += m * m;
  }
  const double mean = s / n;
  EXPECT_NEAR(mean, 2.0, 3 * std::sqrt((s2 / n - mean * mean) / n));
}

TEST(MediatorMean, VanishesWhenAllMassIsAtZero) {
  for (MediatorFamily f : {MediatorFamily::zilon, MediatorFamily::zinb, MediatorFamily::zip}) {
    EXPECT_LT(mediator_mean(f, link(1, 0, 60, 0, 1, 2), 0.0), 1e-20);
  }
}

TEST(DensityPositive, Examples) {
  EXPECT_NEAR(log_density_positive(MediatorFamily::zilon, link(0, 0, 0, 0, 1), 0, 1.0),
              -std::log(std::sqrt(2 * std::numbers::pi)), 1e-14);
  EXPECT_NEAR(log_density_positive(MediatorFamily::zip, link(0, 0, 0, 0), 0, 1.0),
              std::log(1.0 / (std::exp(1.0) - 1.0)), 1e-14);
}

TEST(DensityPositive, ZinbMatchesBruteForceNormalization) {
  const double mu = 2.0, r = 1.0;
  double total = 0;
  for (int k = 0; k <= 10000; ++k) total += oracle::nb_pmf(k, mu, r);
  const double p0 = oracle::nb_pmf(0, mu, r);
  const double expected = std::log(oracle::nb_pmf(3, mu, r) / total / (1 - p0 / total));
  EXPECT_NEAR(log_density_positive(MediatorFamily::zinb, link(std::log(mu), 0, 0, 0, 1, r), 0, 3.0),
              expected, 1e-12);
}

TEST(DensityPositive, CountMassesSumToOne) {
  for (MediatorFamily f : {MediatorFamily::zinb, MediatorFamily::zip}) {
    const MediatorLaw law = MediatorLaw::at(f, link(std::log(3.0), 0, 0, 0, 1, 0.8), 0.0);
    std::vector<double> lg(400);
    law.log_count_masses(lg);
    double s = 0;
    for (std::size_t k = 0; k < lg.size(); ++k) {
      s += std::exp(lg[k]);
      EXPECT_NEAR(lg[k], law.log_density_positive(static_cast<double>(k + 1)), 1e-10);
    }
    EXPECT_NEAR(s, 1.0, 1e-10);
  }
}

TEST(DensityPositive, ZipIsTheLargeDispersionLimitOfZinb) {
  const double lambda = 3.7;
  for (double m : {1.0, 4.0, 12.0}) {
    const double zip = log_density_positive(MediatorFamily::zip, link(std::log(lambda), 0, 0, 0), 0, m);
    const double zinb =
        log_density_positive(MediatorFamily::zinb, link(std::log(lambda), 0, 0, 0, 1, 1e12), 0, m);
    EXPECT_NEAR(zinb, zip, 1e-9);
  }
  EXPECT_NEAR(zero_prob(MediatorFamily::zinb, link(std::log(lambda), 0, 0.2, 0, 1, 1e12), 0),
              zero_prob(MediatorFamily::zip, link(std::log(lambda), 0, 0.2, 0), 0), 1e-10);
}

TEST(DensityPositive, RejectsInvalidSupport) {
  EXPECT_THROW(log_density_positive(MediatorFamily::zilon, link(0, 0, 0, 0), 0, 0.0), DomainError);
  EXPECT_THROW(log_density_positive(MediatorFamily::zip, link(0, 0, 0, 0), 0, 2.5), DomainError);
  EXPECT_THROW(log_density_positive(MediatorFamily::zinb, link(0, 0, 0, 0), 0, -1.0), DomainError);
}

TEST(Sampling, ForcedZeroLinkGivesOnlyZeros) {
  Rng rng(3);
  for (MediatorFamily f : {MediatorFamily::zilon, MediatorFamily::zinb, MediatorFamily::zip}) {
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_true_mediator(f, link(1, 0, 800, 0), 0, rng), 0.0);
  }
}

TEST(Sampling, ZilonZeroFrequencyMatchesZeroProb) {
  const LinkParams p = link(0.3, 0.1, -0.4, 0.5, 0.9);
  const double x = 0.7;
  const double expected = zero_prob(MediatorFamily::zilon, p, x);
  Rng rng(11);
  const int n = 1000000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_true_mediator(MediatorFamily::zilon, p, x, rng) == 0.0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, expected, 3 * std::sqrt(expected * (1 - expected) / n));
}

TEST(Validation, RejectsBadDispersion) {
  EXPECT_THROW(validate(MediatorFamily::zilon, link(0, 0, 0, 0, -1)), DomainError);
  EXPECT_THROW(validate(MediatorFamily::zinb, link(0, 0, 0, 0, 1, 0)), DomainError);
  EXPECT_NO_THROW(validate(MediatorFamily::zip, link(0, 0, 0, 0, -1, -1)));
  EXPECT_THROW(parse_family("gamma"), DomainError);
  EXPECT_EQ(parse_family("ZiNb"), MediatorFamily::zinb);
}
