#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "zimed/error.hpp"
#include "zimed/estimator.hpp"
#include "zimed/simulate.hpp"

using namespace zimed;
using testing_support::generic_theta;

namespace {

Scenario scenario_for(MediatorFamily f) {
  return preset(f == MediatorFamily::zilon ? "zilon-50" : f == MediatorFamily::zinb ? "zinb-30" : "zip-70");
}

void expect_monotone(const FitResult& r) {
  for (std::size_t i = 1; i < r.loglik_trace.size(); ++i) {
    EXPECT_GE(r.loglik_trace[i], r.loglik_trace[i - 1] - 1e-8) << "EM step " << i;
  }
}

}  // namespace

TEST(MStep, RecoversQuadraticMaximizer) {
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 2;
  Eigen::VectorXd c(3);
  c << 1.5, -2.0, 0.25;
  auto q = [&](const Eigen::VectorXd& x) { return -(x - c).dot(A * (x - c)); };
  const MStepResult r = m_step(q, Eigen::VectorXd::Zero(3), 1e-12, 200);
  EXPECT_LT((r.x - c).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_GE(r.q, r.q_start);
}

TEST(MStep, AtTheMaximumReturnsTheStart) {
  auto q = [](const Eigen::VectorXd& x) { return -x.squaredNorm(); };
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(4);
  const MStepResult r = m_step(q, x0, 1e-10, 50);
  EXPECT_EQ(r.x, x0);
  EXPECT_EQ(r.q, r.q_start);
}

TEST(MStep, RespectsBoxBounds) {
  auto q = [](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    if (g) *g = Eigen::VectorXd::Constant(2, 1.0) - 2 * 0.01 * x;
    return x.sum() - 0.01 * x.squaredNorm();  // maximum at 50, beyond the box
  };
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(2, -5), hi = Eigen::VectorXd::Constant(2, 5);
  const MStepResult r = m_step(opt::ValueGradient(q), Eigen::VectorXd::Zero(2), 1e-10, 100, nullptr, lo, hi);
  EXPECT_NEAR(r.x[0], 5.0, 1e-12);
  EXPECT_NEAR(r.x[1], 5.0, 1e-12);
}

TEST(Fit, SigmaStartNearZeroStaysPositive) {
  Scenario s = scenario_for(MediatorFamily::zilon);
  s.n = 300;
  const Dataset d = generate_dataset(s, 0).data;
  FitConfig cfg;
  Theta init = heuristic_init(d, MediatorFamily::zilon);
  init.link.sigma = 1e-6;
  cfg.init = init;
  cfg.compute_covariance = false;
  const FitResult r = fit(d, MediatorFamily::zilon, cfg);
  EXPECT_GT(r.theta_hat.link.sigma, 0.0);
  expect_monotone(r);
}

TEST(Fit, AscentAndConvergenceForEveryFamily) {
  for (MediatorFamily f : {MediatorFamily::zilon, MediatorFamily::zinb, MediatorFamily::zip}) {
    Scenario s = scenario_for(f);
    s.n = 500;
    const FitResult r = fit(generate_dataset(s, 4).data, f);
    EXPECT_TRUE(r.converged) << to_string(f);
    EXPECT_FALSE(r.covariance_unreliable) << to_string(f);
    EXPECT_EQ(r.n_params, static_cast<int>(theta_dimension(f, 0)));
    EXPECT_DOUBLE_EQ(r.aic, 2.0 * r.n_params - 2.0 * r.loglik);
    expect_monotone(r);
  }
}

TEST(Fit, SerialAndParallelFitsAgree) {
  Scenario s = scenario_for(MediatorFamily::zinb);
  s.n = 300;
  const Dataset d = generate_dataset(s, 5).data;
  FitConfig a, b;
  a.exec = Exec::serial;
  b.exec = Exec::parallel;
  const FitResult ra = fit(d, MediatorFamily::zinb, a);
  const FitResult rb = fit(d, MediatorFamily::zinb, b);
  EXPECT_EQ(ra.loglik_trace, rb.loglik_trace);
  EXPECT_EQ(ra.theta_hat.pack(), rb.theta_hat.pack());
  EXPECT_EQ(ra.covariance, rb.covariance);
}

TEST(Fit, EstimatesWithinFourStandardErrors) {
  const Scenario s = scenario_for(MediatorFamily::zip);
  const Eigen::VectorXd truth = s.theta_true.pack();
  const int reps = 20;
  int inside = 0;
  for (int rep = 0; rep < reps; ++rep) {
    const FitResult r = fit(generate_dataset(s, 1000 + rep).data, MediatorFamily::zip);
    const Eigen::VectorXd est = r.theta_hat.pack();
    bool ok = true;
    for (Eigen::Index j = 0; j < est.size(); ++j) {
      ok = ok && std::abs(est[j] - truth[j]) <= 4 * std::sqrt(r.covariance(j, j));
    }
    inside += ok;
  }
  EXPECT_GE(inside, 19);
}

TEST(Fit, NoZerosDrivesZeroLinkToTheBoundary) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.5, 5.0);
  std::normal_distribution<double> e;
  std::vector<Record> recs;
  for (int i = 0; i < 200; ++i) {
    const double x = e(rng), m = u(rng);
    recs.push_back({1 + 0.5 * m + 0.3 * x + e(rng), m, x, {}});
  }
  const FitResult r = fit(Dataset(std::move(recs)), MediatorFamily::zilon);
  EXPECT_TRUE(r.boundary);
  EXPECT_TRUE(r.covariance_unreliable);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Fit, IdentifiabilityErrors) {
  EXPECT_THROW(fit(Dataset{}, MediatorFamily::zilon), EstimationError);
  EXPECT_THROW(fit(Dataset(std::vector<Record>{{1, 0, 0, {}}, {2, 0, 1, {}}}), MediatorFamily::zilon),
               EstimationError);
  EXPECT_THROW(fit(Dataset(std::vector<Record>{{1, 2, 0, {}}, {2, 0, 0, {}}}), MediatorFamily::zilon),
               EstimationError);
  EXPECT_THROW(fit(Dataset(std::vector<Record>{{1, 2.5, 0, {}}, {2, 0, 1, {}}}), MediatorFamily::zip),
               EstimationError);
}

TEST(Information, NormalMeanToyProblem) {
  // Every record positive and above the cap: beta0 enters only through the
  // normal outcome density, so its information is n / delta^2.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> e;
  std::vector<Record> recs;
  for (int i = 0; i < 250; ++i) recs.push_back({e(rng), 25.0 + i % 7, e(rng), {}});
  const Dataset d(std::move(recs));
  Theta t = generic_theta(MediatorFamily::zilon);
  t.outcome.delta = 1.7;
  const Eigen::MatrixXd info = observed_information(d, t);
  EXPECT_NEAR(info(0, 0), 250 / (1.7 * 1.7), 1e-4 * 250 / (1.7 * 1.7));
}

TEST(Information, SignFlipSymmetry) {
  // Flipping the sign of x together with alpha1, gamma1, beta3, beta4, beta5
  // leaves the likelihood unchanged.
  for (MediatorFamily f : {MediatorFamily::zilon, MediatorFamily::zip}) {
    Scenario s = scenario_for(f);
    s.n = 200;
    const Dataset d = generate_dataset(s, 6).data;
    std::vector<Record> flipped = d.records();
    for (auto& r : flipped) r.x = -r.x;
    const Dataset df(std::move(flipped));

    const Theta t = generic_theta(f);
    Theta tf = t;
    tf.link.alpha1 = -tf.link.alpha1;
    tf.link.gamma1 = -tf.link.gamma1;
    for (int j : {3, 4, 5}) tf.outcome.beta[static_cast<std::size_t>(j)] *= -1;

    const Eigen::MatrixXd a = observed_information(d, t);
    const Eigen::MatrixXd b = observed_information(df, tf);
    Eigen::VectorXd sign = Eigen::VectorXd::Ones(a.rows());
    for (int j : {3, 4, 5, 8, 10}) sign[j] = -1;
    const Eigen::MatrixXd back = sign.asDiagonal() * b * sign.asDiagonal();
    EXPECT_LT((a - back).cwiseAbs().maxCoeff(), 1e-5 * a.cwiseAbs().maxCoeff()) << to_string(f);
  }
}

TEST(Information, PseudoInverseFallback) {
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(3, 3);
  info(0, 0) = 2;
  info(1, 1) = 4;
  const CovarianceResult c = invert_information(info);
  EXPECT_TRUE(c.pseudo_inverse);
  EXPECT_NEAR(c.covariance(0, 0), 0.5, 1e-14);
  EXPECT_EQ(c.covariance(2, 2), 0.0);
  const CovarianceResult ok = invert_information(Eigen::MatrixXd::Identity(2, 2) * 4);
  EXPECT_FALSE(ok.pseudo_inverse);
}

TEST(Information, StandardErrorsTrackReplicateSpread) {
  const Scenario s = scenario_for(MediatorFamily::zip);
  const int reps = 100;
  std::vector<Eigen::VectorXd> est;
  Eigen::VectorXd mean_se = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.theta_true.dimension()));
  for (int rep = 0; rep < reps; ++rep) {
    const FitResult r = fit(generate_dataset(s, 2000 + rep).data, MediatorFamily::zip);
    est.push_back(r.theta_hat.pack());
    mean_se += r.covariance.diagonal().cwiseSqrt() / reps;
  }
  for (Eigen::Index j = 0; j < mean_se.size(); ++j) {
    double m = 0, ss = 0;
    for (const auto& e : est) m += e[j] / reps;
    for (const auto& e : est) ss += (e[j] - m) * (e[j] - m);
    const double sd = std::sqrt(ss / (reps - 1));
    EXPECT_LT(mean_se[j] / sd, 1.3) << "coordinate " << j;
    EXPECT_GT(mean_se[j] / sd, 1 / 1.3) << "coordinate " << j;
  }
}

TEST(Fit, DegenerateEtaSolutionTriggersRestart) {
  // From eta = 1 this replicate settles at eta ~ 3.5 with every zero a true zero.
  const Dataset d = generate_dataset(scenario_for(MediatorFamily::zip), 2010).data;
  FitConfig cfg;
  cfg.compute_covariance = false;
  const FitResult r = fit(d, MediatorFamily::zip, cfg);
  EXPECT_LT(r.theta_hat.eta, 1.0);
  bool restarted = false;
  for (const auto& w : r.warnings) restarted = restarted || w.find("restarted") != std::string::npos;
  EXPECT_TRUE(restarted);
  expect_monotone(r);

  cfg.eta_init = 0.3;
  const FitResult direct = fit(d, MediatorFamily::zip, cfg);
  EXPECT_NEAR(direct.loglik, r.loglik, 1e-3);
  EXPECT_THROW(fit(d, MediatorFamily::zip, FitConfig{.eta_init = -1.0}), DomainError);
}

TEST(Fit, DifferentStartsReachTheSameMaximum) {
  for (MediatorFamily f : {MediatorFamily::zilon, MediatorFamily::zinb, MediatorFamily::zip}) {
    Scenario s = scenario_for(f);
    s.n = 600;
    const Dataset d = generate_dataset(s, 8).data;
    FitConfig a, b;
    a.compute_covariance = b.compute_covariance = false;
    b.eta_init = 0.5;
    EXPECT_NEAR(fit(d, f, a).loglik, fit(d, f, b).loglik, 1e-3) << to_string(f);
  }
}
