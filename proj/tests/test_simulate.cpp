#include <gtest/gtest.h>

#include <cmath>

#include "zimed/error.hpp"
#include "zimed/simulate.hpp"

using namespace zimed;

TEST(Presets, NamesAndFamilies) {
  const auto names = preset_names();
  EXPECT_EQ(names.size(), 15u);
  EXPECT_EQ(preset("zinb-60").family, MediatorFamily::zinb);
  EXPECT_EQ(preset("zip-30").theta_true.family, MediatorFamily::zip);
  EXPECT_THROW(preset("zip-40"), IngestionError);
}

TEST(Presets, CompositionMatchesTarget) {
  for (const auto& name : preset_names()) {
    const Scenario s = preset(name);
    const double target = std::stod(name.substr(name.find('-') + 1)) / 100;
    const ZeroComposition z = expected_zero_composition(s);
    EXPECT_NEAR(z.total, target, 1e-6) << name;
    EXPECT_NEAR(z.false_zero, 0.5 * target, 1e-6) << name;
    EXPECT_NEAR(z.true_zero + z.false_zero, z.total, 1e-12) << name;
  }
}

TEST(Presets, RealizedZeroFraction) {
  Scenario s = preset("zip-50");
  s.n = 5000;
  const SimulatedData d = generate_dataset(s, 0);
  EXPECT_GE(d.zero_fraction, 0.45);
  EXPECT_LE(d.zero_fraction, 0.55);
  EXPECT_NEAR(d.false_zero_fraction, 0.25, 0.03);
}

TEST(Simulate, ReproducibleAndDistinctReplicates) {
  Scenario s = preset("zinb-50");
  s.n = 200;
  const SimulatedData a = generate_dataset(s, 3), b = generate_dataset(s, 3), c = generate_dataset(s, 4);
  ASSERT_EQ(a.data.size(), 200u);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < 200; ++i) {
    same = same && a.data[i].y == b.data[i].y && a.data[i].m_star == b.data[i].m_star;
    differ = differ || a.data[i].y != c.data[i].y;
    EXPECT_LE(a.data[i].m_star, a.true_m[i]);
    if (a.data[i].m_star > 0) EXPECT_EQ(a.data[i].m_star, a.true_m[i]);
  }
  EXPECT_TRUE(same);
  EXPECT_TRUE(differ);
}

TEST(Simulate, ObservedLawIsFalseZeroCensoring) {
  // Above the cap nothing is masked.
  Scenario s = preset("zilon-70");
  s.n = 2000;
  const SimulatedData d = generate_dataset(s, 0);
  for (std::size_t i = 0; i < d.data.size(); ++i) {
    if (d.true_m[i] > s.cap) EXPECT_GT(d.data[i].m_star, 0.0);
  }
}

TEST(Scenario, ParseKeysAndOverrides) {
  const Scenario s = parse_scenario(
      "# tiny\npreset = zip-70\nname = mine\nn = 50\nn_reps = 3\nseed = 99\n"
      "x_source = uniform(-1, 2)\nx1 = -1\nx2 = 2\nbeta1 = 0.7\neta = 0.9\nfit_families = zip, zinb\n");
  EXPECT_EQ(s.name, "mine");
  EXPECT_EQ(s.family, MediatorFamily::zip);
  EXPECT_EQ(s.n, 50u);
  EXPECT_EQ(s.n_reps, 3);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(s.x_source.kind, XSource::Kind::uniform);
  EXPECT_EQ(s.x_source.a, -1.0);
  EXPECT_EQ(s.theta_true.outcome.beta[1], 0.7);
  EXPECT_EQ(s.theta_true.eta, 0.9);
  ASSERT_EQ(s.fit_families.size(), 2u);
  EXPECT_EQ(s.fit_families[1], MediatorFamily::zinb);
  EXPECT_EQ(s.theta_true.link.gamma0, preset("zip-70").theta_true.link.gamma0);
}

TEST(Scenario, TargetZeroFractionIsALabel) {
  const Scenario s = parse_scenario("preset = zip-70\ntarget_zero_fraction = about 70%\n");
  EXPECT_EQ(s.target_zero_fraction, "about 70%");
  EXPECT_EQ(s.theta_true.link.gamma0, preset("zip-70").theta_true.link.gamma0);
}

TEST(Scenario, ParseErrors) {
  EXPECT_THROW(parse_scenario("bogus = 1\n"), IngestionError);
  EXPECT_THROW(parse_scenario("n = many\n"), IngestionError);
  EXPECT_THROW(parse_scenario("preset = zip-70\nn\n"), IngestionError);
  EXPECT_THROW(parse_scenario("family = zip\nx_source = cauchy\n"), IngestionError);
  EXPECT_THROW(parse_scenario("preset = zip-70\nn = 5\n"), IngestionError);
  EXPECT_THROW(parse_scenario("preset = zip-70\nfit_families = zilog\n"), Error);
  EXPECT_THROW(parse_scenario("n = 100\n"), IngestionError);
}

TEST(Study, SingleReplicateCoverageIsAllOrNothing) {
  Scenario s = preset("zip-70");
  s.n = 400;
  s.n_reps = 1;
  const StudySummary sum = run_study(s);
  ASSERT_EQ(sum.n_ok, 1);
  for (const auto& e : sum.effects) EXPECT_TRUE(e.coverage == 0.0 || e.coverage == 100.0);
  EXPECT_EQ(sum.replicates.size(), 1u);
}

TEST(Study, Deterministic) {
  Scenario s = preset("zip-70");
  s.n = 300;
  s.n_reps = 3;
  const StudySummary a = run_study(s), b = run_study(s);
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_EQ(a.effects[e].mean_estimate, b.effects[e].mean_estimate);
    EXPECT_EQ(a.effects[e].mean_se, b.effects[e].mean_se);
  }
  EXPECT_EQ(a.selected, b.selected);
}
