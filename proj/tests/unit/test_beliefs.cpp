#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace selfloc;

namespace {

double credence_on(const DecisionProblem& p, const BeliefSystem& b, int dependant) {
  return verify::credence_on(p, b, dependant);
}

const Vec kC{1, 0};

}  // namespace

TEST(GT, NewcombCopiesAreEquallyLikely) {
  const DecisionProblem p = load_fixture("newcomb").problem;
  for (const Vec& pi : oracle::random_policies(2, 5, 1))
    EXPECT_NEAR(gt_beliefs(p, pi).credences[p.state_index("sim")], 0.5, 1e-12);
}

TEST(GT, SeventyFivePercentNewcomb) {
  const DecisionProblem p = load_fixture("newcomb75").problem;
  for (const Vec& pi : {Vec{1, 0}, Vec{0, 1}, Vec{0.3, 0.7}}) {
    const BeliefSystem b = gt_beliefs(p, pi);
    EXPECT_NEAR(b.credences[p.state_index("sim")], 1.0 / 3, 1e-12);
    EXPECT_NEAR(sum(b.credences), 1.0, 1e-12);
  }
}

TEST(GT, RefusesNonIdentityDependence) {
  EXPECT_THROW(gt_beliefs(load_fixture("sbpd_v1").problem, kC), NotApplicable);
}

TEST(GSGT, TheodoraCredenceIsSixSevenths) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  const auto g = samplers_of(p);
  EXPECT_EQ(g[0].sample_count(), 1);
  EXPECT_EQ(g[1].sample_count(), 3);
  for (const Vec& pi : oracle::random_policies(2, 5, 2)) {
    const BeliefSystem b = gsgt_beliefs(p, g, pi);
    EXPECT_NEAR(credence_on(p, b, 1), 6.0 / 7, 1e-12);
  }
}

TEST(GSGT, TransformAveragesToDependence) {
  const DecisionProblem p = load_fixture("adversarial_offer").problem;
  for (const Vec& pi : oracle::random_policies(3, 10, 3)) {
    const BeliefSystem b = gsgt_beliefs(p, pi);
    for (int j = 0; j < p.num_dependants(); ++j) {
      Vec avg(3, 0.0);
      for (int a = 0; a < 3; ++a) avg = axpy(pi[a], b.transforms[j][a], avg);
      const Vec f = p.dependence[j].raw(pi);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(avg[i], f[i], 1e-12);
    }
  }
}

TEST(GSGT, RejectsMismatchedSampler) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  auto g = samplers_of(p);
  g[1] = SimulationFunction::symmetric_from(2, 1, [](const Counts&) { return Vec{0.5, 0.5}; });
  EXPECT_THROW(gsgt_beliefs(p, g, kC), NotApplicable);
  EXPECT_THROW(gsgt_beliefs(load_fixture("sbpd_v2").problem, kC), NotApplicable);
}

TEST(LSGT, PureAnchorOnSbpdV2) {
  const DecisionProblem p = load_fixture("sbpd_v2").problem;
  const LSGTResult r = lsgt_from_simple_cases(p, kC);
  EXPECT_NEAR(credence_on(p, r.beliefs, 0), 1.0 / 3, 1e-12);
  EXPECT_NEAR(credence_on(p, r.beliefs, 1), 2.0 / 3, 1e-12);
  const Vec eu = cdt_eus(p, r.beliefs, kC);
  EXPECT_NEAR(eu[0] - eu[1], 4.0 / 15, 1e-12);
  // local samplers reproduce F and its derivatives at the anchor
  for (int j = 0; j < 2; ++j)
    for (int a = 0; a < 2; ++a) {
      const Vec d = r.samplers[j].delta(kC, a), want = p.dependence[j].delta(kC, a);
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(d[i], want[i], 1e-12);
    }
}

TEST(LSGT, UnavailableAtMixedPolicyWithLargeGamma) {
  const DecisionProblem p = load_fixture("nrho").problem;
  EXPECT_THROW(lsgt_from_simple_cases(p, {0.5, 0.5}), NotApplicable);
  EXPECT_NO_THROW(lsgt_from_simple_cases(p, {0, 1}));
}

TEST(GGT, MinimalWeightForQuarticLogistic) {
  const DecisionProblem p = load_fixture("nrho").problem;
  EXPECT_NEAR(ggt_components(p, {0.5, 0.5}).dependants[0].gamma, 2.0, 1e-12);
}

TEST(GGT, ExampleWeightsGiveOneSixthAndFiveSixths) {
  const DecisionProblem p = load_fixture("sbpd_v2").problem;
  const GGTComponents c = ggt_components(p, kC, Vec{0.8, 2}, RhoCheck::Permissive);
  EXPECT_FALSE(c.dependants[0].admissible);
  const BeliefSystem b = ggt_beliefs(p, kC, c);
  EXPECT_FALSE(b.admissible);
  EXPECT_NEAR(credence_on(p, b, 0), 1.0 / 6, 1e-12);
  EXPECT_NEAR(credence_on(p, b, 1), 5.0 / 6, 1e-12);
  EXPECT_THROW(ggt_components(p, kC, Vec{0.8, 2}), InputError);
  EXPECT_NO_THROW(ggt_components(p, kC, Vec{1.0, 2}));
}

TEST(GGT, ComponentInvariants) {
  for (const auto& name : verify::differentiable_fixtures()) {
    const DecisionProblem p = load_fixture(name).problem;
    const int k = p.num_actions();
    for (const Vec& pi : oracle::random_policies(k, 10, 4)) {
      const GGTComponents c = ggt_components(p, pi);
      for (const auto& d : c.dependants) {
        EXPECT_GE(d.gamma, 0.0);
        EXPECT_TRUE(d.admissible) << name;
        Vec avg(k, 0.0);
        for (int a = 0; a < k; ++a) {
          EXPECT_TRUE(near_simplex(d.tau[a], 1e-9)) << name;
          avg = axpy(pi[a], d.tau[a], avg);
        }
        for (int i = 0; i < k; ++i) EXPECT_NEAR(avg[i], d.F[i], 1e-9) << name;
      }
    }
  }
}

TEST(GGT, IdentityDependantsGetUnitWeight) {
  const DecisionProblem p = load_fixture("newcomb75").problem;
  const GGTComponents c = ggt_components(p, {0.4, 0.6});
  EXPECT_NEAR(c.dependants[0].gamma, 1.0, 1e-12);
  const BeliefSystem g = ggt_beliefs(p, {0.4, 0.6}), t = gt_beliefs(p, {0.4, 0.6});
  for (int s = 0; s < p.num_states(); ++s) EXPECT_NEAR(g.credences[s], t.credences[s], 1e-12);
}

TEST(GGT, RefusesStepDependence) {
  EXPECT_THROW(ggt_beliefs(load_fixture("wine").problem, {1, 0}), DerivativeUnavailable);
}

TEST(Credences, UniformFallbackWhenAllWeightsVanish) {
  ProblemBuilder b({"a", "b"});
  b.state("s", 0).terminal("x", 0).terminal("y", 1).initial("s", 1);
  b.edge("s", "a", "x").edge("s", "b", "y");
  b.dependant(DependenceFunction::constant({0.5, 0.5}));
  const DecisionProblem p = b.build();
  const BeliefSystem g = ggt_beliefs(p, {0.5, 0.5});
  EXPECT_TRUE(g.degenerate_uniform);
  EXPECT_NEAR(g.credences[0], 1.0, 1e-15);
}

TEST(Audit, GGTIsFaithfulAndNotFanciful) {
  for (const auto& name : verify::differentiable_fixtures()) {
    const DecisionProblem p = load_fixture(name).problem;
    for (const Vec& pi : oracle::random_policies(p.num_actions(), 10, 5)) {
      const AuditReport r = audit_beliefs(p, pi, ggt_beliefs(p, pi));
      EXPECT_TRUE(r.faithful) << name;
      EXPECT_FALSE(r.fanciful) << name;
    }
  }
}

TEST(Audit, FlagsCredenceOnUnreachableState) {
  const DecisionProblem p = load_fixture("newcomb").problem;
  // always one-boxing, the predictor never leaves the box empty
  BeliefSystem b = gt_beliefs(p, {1, 0});
  b.credences.assign(p.num_states(), 0.0);
  b.credences[p.state_index("empty")] = 1;
  const AuditReport r = audit_beliefs(p, {1, 0}, b);
  EXPECT_TRUE(r.fanciful);
  EXPECT_TRUE(r.faithful);  // the credence still sits on the same dependant
}
