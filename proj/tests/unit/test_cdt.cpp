#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace selfloc;

namespace {
const Vec kC{1, 0};
const Vec kD{0, 1};
}  // namespace

TEST(CdtEu, GsgtAdvantageAtVertices) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  for (const Vec& pi : {kC, kD}) {
    const RatifiabilityReport r = is_ratifiable(p, gsgt_beliefs(p, pi), pi);
    EXPECT_NEAR(r.eu[0] - r.eu[1], -2.0 / 7, 1e-12);
  }
  EXPECT_FALSE(is_ratifiable(p, gsgt_beliefs(p, kC), kC).ratifiable);
  EXPECT_TRUE(is_ratifiable(p, gsgt_beliefs(p, kD), kD).ratifiable);
}

TEST(CdtEu, MixtureIsLinear) {
  const DecisionProblem p = load_fixture("adversarial_offer").problem;
  const Vec pi{0.2, 0.3, 0.5};
  const BeliefSystem b = ggt_beliefs(p, pi);
  const Vec eu = cdt_eus(p, b, pi);
  const Vec gamma{0.1, 0.6, 0.3};
  EXPECT_NEAR(cdt_eu_mixed(p, b, pi, gamma), 0.1 * eu[0] + 0.6 * eu[1] + 0.3 * eu[2], 1e-12);
}

TEST(CdtEu, AnchorMismatchIsRejected) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  EXPECT_THROW(cdt_eus(p, gsgt_beliefs(p, kC), kD), InputError);
}

TEST(CdtEu, GgtAdvantageIsConstantOnSbpdV2) {
  const DecisionProblem p = load_fixture("sbpd_v2").problem;
  for (const Vec& pi : oracle::random_policies(2, 10, 21)) {
    const auto c = ggt_components(p, pi, Vec{0.8, 2}, RhoCheck::Permissive);
    const Vec eu = cdt_eus(p, ggt_beliefs(p, pi, c), pi);
    EXPECT_NEAR(eu[0] - eu[1], 1.0 / 6, 1e-10);
  }
}

TEST(Ratify, GradientIdentityHolds) {
  for (const auto& name : verify::differentiable_fixtures()) {
    const DecisionProblem p = load_fixture(name).problem;
    const double scale = std::max(1.0, p.utility_range());
    for (const Vec& pi : oracle::random_policies(p.num_actions(), 20, 22))
      EXPECT_LT(grad_identity_residual(p, pi) / scale, 1e-9) << name;
  }
}

TEST(Ratify, VerdictMatchesGradientTest) {
  for (const auto& name : verify::differentiable_fixtures()) {
    const DecisionProblem p = load_fixture(name).problem;
    auto anchors = oracle::random_policies(p.num_actions(), 50, 23);
    for (int a = 0; a < p.num_actions(); ++a) anchors.push_back(Policy::vertex(p.num_actions(), a).probs());
    for (const Vec& pi : anchors)
      EXPECT_EQ(is_ratifiable(p, ggt_beliefs(p, pi), pi, 1e-6).ratifiable, verify::gradient_stationary(p, pi, 1e-6))
          << name << " " << format_vec(pi);
  }
}

TEST(Ratify, KindDispatch) {
  const DecisionProblem p = load_fixture("sbpd_v2").problem;
  EXPECT_EQ(beliefs_of_kind(p, BeliefKind::LSGT, kC).kind, BeliefKind::LSGT);
  EXPECT_THROW(beliefs_of_kind(p, BeliefKind::GT, kC), NotApplicable);
  EXPECT_THROW(beliefs_of_kind(p, BeliefKind::GSGT, kC), NotApplicable);
  EXPECT_EQ(parse_belief_kind("ggt"), BeliefKind::GGT);
  EXPECT_THROW(parse_belief_kind("edt"), InputError);
}

TEST(Stationary, SbpdV1HasThreePoints) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  const PolicySet s = find_stationary(p);
  ASSERT_EQ(s.policies.size(), 3u);
  EXPECT_EQ(s.policies[0].policy, kD);
  const auto roots = verify::quintic_roots();
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(s.policies[1].policy[0], roots[0], 1e-9);
  EXPECT_NEAR(s.policies[2].policy[0], roots[1], 1e-9);
  EXPECT_EQ(s.policies[2].classification, "ex-ante-max");
  EXPECT_EQ(s.policies[0].classification, "stationary-other");
}

TEST(Stationary, SbpdV2IsPureC) {
  const PolicySet s = find_stationary(load_fixture("sbpd_v2").problem);
  ASSERT_EQ(s.policies.size(), 1u);
  EXPECT_EQ(s.policies[0].policy, kC);
}

TEST(Stationary, ConstantProblemIsEverywhereStationary) {
  ProblemBuilder b({"a", "b"});
  b.state("s", 0).terminal("x", 1).initial("s", 1);
  b.edge_all("s", "x");
  b.dependant(DependenceFunction::identity(2));
  const PolicySet s = find_stationary(b.build());
  EXPECT_TRUE(s.everywhere_stationary);
}

TEST(Stationary, EveryReportedPointIsRatifiable) {
  for (const char* name : {"sbpd_v1", "sbpd_v2", "adversarial_offer", "newcomb75", "nrho"}) {
    const DecisionProblem p = load_fixture(name).problem;
    const PolicySet s = find_stationary(p);
    EXPECT_FALSE(s.policies.empty()) << name;
    for (const auto& e : s.policies) {
      const Vec g = ex_ante_grad(p, e.policy);
      for (double x : g) EXPECT_LE(x, 1e-7 * p.utility_range()) << name;
    }
  }
}

TEST(Stationary, ThreeActionsAreDeterministicUnderSeed) {
  const DecisionProblem p = load_fixture("adversarial_offer").problem;
  StationaryConfig cfg;
  cfg.seed = 7;
  const PolicySet a = find_stationary(p, cfg), b = find_stationary(p, cfg);
  ASSERT_EQ(a.policies.size(), b.policies.size());
  for (size_t i = 0; i < a.policies.size(); ++i) EXPECT_EQ(a.policies[i].policy, b.policies[i].policy);
}

TEST(Optimize, SbpdV1MaximumNearPointEightEight) {
  const OptimumResult r = optimize_ex_ante(load_fixture("sbpd_v1").problem);
  ASSERT_EQ(r.argmax.policies.size(), 1u);
  EXPECT_NEAR(r.argmax.policies[0].policy[0], 0.88, 0.01);
}

TEST(Optimize, AdversarialOfferTheta) {
  const OptimumResult r = optimize_ex_ante(load_fixture("adversarial_offer").problem);
  ASSERT_EQ(r.argmax.policies.size(), 2u);  // theta and its mirror
  for (const auto& e : r.argmax.policies) {
    const double p = e.policy[0] + e.policy[1], theta = e.policy[0] / p;
    EXPECT_NEAR(verify::theta_product(theta), 1.0 / 12, 1e-9);
    EXPECT_NEAR(p, 0.046, 0.005);
  }
}

TEST(Optimize, WineNeverDrinks) {
  const OptimumResult r = optimize_ex_ante(load_fixture("wine").problem);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  ASSERT_EQ(r.argmax.policies.size(), 1u);
  EXPECT_EQ(r.argmax.policies[0].policy, kC);
}

TEST(Optimize, StaircaseHandlesJumps) {
  const DecisionProblem p = load_fixture("staircase").problem;
  const OptimumResult r = optimize_ex_ante(p);
  // brute force on a fine grid
  double best = -INFINITY;
  for (int i = 0; i <= 10000; ++i) best = std::max(best, ex_ante_eu(p, {1 - i / 10000.0, i / 10000.0}));
  EXPECT_GE(r.value, best - 1e-9);
}

TEST(Convergence, SbpdV2Sequence) {
  const ConvergenceReport rep = convergence_sequence(load_fixture("sbpd_v2").problem, {4, 16, 64});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_GT(rep.rows[0].sup_error, rep.rows[1].sup_error);
  EXPECT_GT(rep.rows[1].sup_error, rep.rows[2].sup_error);
  EXPECT_LE(rep.rows[2].distance_to_optimal, 0.02);
  // advantage of C at pure C shrinks like 0.8 / (2N + 1)
  const DecisionProblem& q = rep.rows[2].problem;
  const Vec eu = cdt_eus(q, gsgt_beliefs(q, kC), kC);
  EXPECT_NEAR((eu[0] - eu[1]) / (0.8 / 129), 1.0, 0.3);
  EXPECT_THROW(convergence_sequence(load_fixture("wine").problem, {4}), NotApplicable);
}

TEST(Impossibility, WineRejectsNeverDrinking) {
  const DecisionProblem p = load_fixture("wine").problem;
  const ImpossibilityReport r = impossibility_check(p, standard_candidates(p, kC), kC);
  EXPECT_TRUE(r.claim_holds);
  EXPECT_GE(r.faithful_candidates, 1);
  ASSERT_GE(r.outcomes.size(), 3u);
  EXPECT_FALSE(r.outcomes[0].applicable);
  EXPECT_NE(r.outcomes[0].refusal.find("derivative unavailable"), std::string::npos);
  EXPECT_TRUE(r.outcomes[1].audit.faithful);
  EXPECT_FALSE(r.outcomes[1].ratify.ratifiable);
  EXPECT_TRUE(r.outcomes[2].audit.fanciful);
}
