#include <gtest/gtest.h>

#include <set>

#include "support/oracles.hpp"

using namespace selfloc;

TEST(Rng, CounterStreamsAreReproducible) {
  CounterRng a(42, 3), b(42, 3), c(42, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    if (x != c.uniform()) differs = true;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.draws(), 100u);
}

TEST(Rng, UniformMeanIsHalf) {
  CounterRng r(1, 0);
  double s = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) s += r.uniform();
  EXPECT_NEAR(s / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
}

TEST(Rollout, HistoriesFollowTheGraph) {
  const DecisionProblem p = load_fixture("newcomb75").problem;
  const auto joint = joint_policy(p, {0.5, 0.5});
  std::set<double> seen;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const HistorySample h = rollout(p, joint, 9, r);
    ASSERT_FALSE(h.states.empty());
    EXPECT_TRUE(p.states[h.states.back()].terminal);
    EXPECT_EQ(h.actions.size() + 1, h.states.size());
    for (size_t i = 0; i + 1 < h.states.size(); ++i)
      EXPECT_GT(p.transitions[h.states[i]][h.actions[i]][h.states[i + 1]], 0.0);
    seen.insert(h.utility);
  }
  EXPECT_EQ(seen, (std::set<double>{0, 1000, 1'000'000, 1'001'000}));
}

TEST(Rollout, SameSeedSameHistory) {
  const DecisionProblem p = load_fixture("adversarial_offer").problem;
  const auto joint = joint_policy(p, {0.3, 0.3, 0.4});
  for (std::uint64_t r = 0; r < 20; ++r) {
    const HistorySample a = rollout(p, joint, 5, r), b = rollout(p, joint, 5, r);
    EXPECT_EQ(a.states, b.states);
    EXPECT_EQ(a.actions, b.actions);
  }
}

TEST(Validate, ChainAgreesWithRollouts) {
  for (const char* name : {"sbpd_v1", "sbpd_v2", "newcomb75", "adversarial_offer", "wine"}) {
    const DecisionProblem p = load_fixture(name).problem;
    for (const Vec& pi : oracle::random_policies(p.num_actions(), 2, 41)) {
      const MonteCarloReport r = validate(p, pi, 20'000, 3);
      EXPECT_TRUE(r.pass()) << name << " " << format_vec(pi);
      EXPECT_EQ(r.rollouts, 20'000u);
    }
  }
}

TEST(Validate, PureCOnSbpdV1) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  const MonteCarloReport r = validate(p, {1, 0}, 100'000, 11);
  ASSERT_TRUE(r.pass());
  EXPECT_EQ(r.checks[0].name, "eu");
  EXPECT_NEAR(r.checks[0].mean, 25.0 / 12, 4 * r.checks[0].se);
  EXPECT_NEAR(r.mean_length, 4.0, 1e-12);  // Th0, ThC or ThD, Do state, terminal
}

TEST(Validate, DetectsWrongReference) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  ChainSolution wrong = solve_at(p, {0.5, 0.5});
  wrong.ex_ante_eu += 1;
  const MonteCarloReport r = validate(p, {0.5, 0.5}, 20'000, 3, 4, wrong);
  EXPECT_FALSE(r.pass());
  EXPECT_FALSE(r.checks[0].pass);
}

TEST(Validate, DeterministicGivenSeed) {
  const DecisionProblem p = load_fixture("adversarial_offer").problem;
  const MonteCarloReport a = validate(p, {0.2, 0.2, 0.6}, 5'000, 77);
  const MonteCarloReport b = validate(p, {0.2, 0.2, 0.6}, 5'000, 77);
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (size_t i = 0; i < a.checks.size(); ++i) EXPECT_EQ(a.checks[i].mean, b.checks[i].mean);
}

TEST(Validate, ZeroSpreadUsesExactComparison) {
  // every history is the same, so the sample variance is zero
  const DecisionProblem p = load_fixture("newcomb").problem;
  const MonteCarloReport r = validate(p, {1, 0}, 1'000, 1);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.checks[0].se, 0.0);
}

TEST(CompareEu, ExpansionMatchesOriginal) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  const ExpandedProblem ex = expand_problem(p, samplers_of(p));
  const TwoSample t = compare_eu(p, {0.6, 0.4}, ex.problem, {0.6, 0.4}, 40'000, 13);
  EXPECT_TRUE(t.pass) << t.z;
  const TwoSample off = compare_eu(p, {0.36, 0.64}, p, {0.88, 0.12}, 40'000, 13);
  EXPECT_FALSE(off.pass);
}
