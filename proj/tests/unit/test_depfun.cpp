#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace selfloc;

namespace {

// Derivative of F along e_a - pi by central differences.
Vec fd_delta(const DependenceFunction& F, const Vec& pi, int a, double h = 1e-6) {
  const Vec d = toward_vertex(pi, a);
  const Vec fp = F.raw(axpy(h, d, pi)), fm = F.raw(axpy(-h, d, pi));
  Vec r(pi.size());
  for (size_t i = 0; i < r.size(); ++i) r[i] = (fp[i] - fm[i]) / (2 * h);
  return r;
}

std::vector<DependenceFunction> smooth_examples() {
  PolynomialMap q(2);
  q.add({0, 0}, {0.25, 0.75});
  q.add({2, 0}, {0.5, -0.5});
  auto g = SimulationFunction::symmetric_from(3, 2, [](const Counts& c) {
    return c[0] == 2 ? Vec{1, 0, 0} : Vec{0.2, 0.3, 0.5};
  });
  return {DependenceFunction::identity(2),
          DependenceFunction::constant({0.3, 0.7}),
          DependenceFunction::linear({{0.9, 0.1}, {0.1, 0.9}}),
          DependenceFunction::polynomial(q),
          DependenceFunction::sampler(g),
          builtin::sqrt_theodora(),
          builtin::quartic_logistic(1)};
}

}  // namespace

TEST(Dependence, DeltaMatchesFiniteDifference) {
  for (const auto& F : smooth_examples()) {
    const int k = F.num_actions();
    for (const Vec& pi : oracle::random_policies(k, 20, 2)) {
      for (int a = 0; a < k; ++a) {
        const Vec d = F.delta(pi, a), fd = fd_delta(F, pi, a);
        for (int i = 0; i < k; ++i) EXPECT_NEAR(d[i], fd[i], 1e-6) << F.kind() << " a=" << a;
        EXPECT_NEAR(sum(d), 0.0, 1e-12);
      }
    }
  }
}

TEST(Dependence, IdentityAndConstantClosedForms) {
  const Vec pi{0.2, 0.5, 0.3};
  const auto id = DependenceFunction::identity(3);
  EXPECT_EQ(id.delta(pi, 1), toward_vertex(pi, 1));
  const auto c = DependenceFunction::constant({0.1, 0.1, 0.8});
  EXPECT_EQ(c.delta(pi, 2), Vec(3, 0.0));
  EXPECT_EQ(c.eval(pi).probs(), (Vec{0.1, 0.1, 0.8}));
}

TEST(Dependence, RangeViolationsAreCaught) {
  EXPECT_THROW(DependenceFunction::linear({{1.2, -0.2}, {0, 1}}), InputError);
  PolynomialMap q(2);
  q.add({0, 0}, {0, 1});
  q.add({1, 0}, {2, -2});
  EXPECT_THROW(DependenceFunction::polynomial(q), RangeViolation);
  auto doubled = [](const Vec& pi) { return Vec{pi[0] * 2, 1 - pi[0] * 2}; };
  EXPECT_THROW(DependenceFunction::black_box(2, "", doubled, nullptr, false), RangeViolation);
}

TEST(Dependence, BlackBoxFallsBackToFiniteDifferences) {
  auto F = DependenceFunction::black_box(
      2, "", [](const Vec& pi) { return Vec{pi[0] * pi[0], 1 - pi[0] * pi[0]}; }, nullptr, true);
  const Vec pi{0.3, 0.7};
  // d/dt (0.3 + 0.7t)^2 at t = 0 is 0.42
  EXPECT_NEAR(F.delta(pi, 0)[0], 0.42, 1e-6);
  EXPECT_NEAR(F.delta({1, 0}, 1)[0], -2.0, 1e-5);
}

TEST(Dependence, StepFunctionsRefuseDerivatives) {
  EXPECT_THROW(builtin::staircase(5).delta({0.5, 0.5}, 0), DerivativeUnavailable);
  EXPECT_THROW(builtin::positive_indicator(2, 1, 0).delta({0.5, 0.5}, 0), DerivativeUnavailable);
  EXPECT_NEAR(builtin::staircase(5).eval({0.4, 0.6})[1], 0.6, 1e-15);
  EXPECT_EQ(builtin::positive_indicator(2, 1, 0).eval({1, 0}).probs(), (Vec{1, 0}));
}

TEST(Polynomial, HomogenizeAgreesOnSimplex) {
  PolynomialMap q(3);
  q.add({0, 0, 0}, {0.2, 0.3, 0.5});
  q.add({1, 1, 0}, {0.1, -0.05, -0.05});
  const PolynomialMap h = homogenize(q, 4);
  EXPECT_TRUE(h.homogeneous());
  EXPECT_EQ(h.degree(), 4);
  for (const Vec& pi : oracle::random_policies(3, 20, 4)) {
    const Vec a = q.eval(pi), b = h.eval(pi);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
  }
  EXPECT_THROW(homogenize(q, 1), InputError);
}

TEST(Polynomial, NonnegRewriteNeedsElevation) {
  // x^2 - x y + y^2 is positive on the simplex but has a negative coefficient.
  PolynomialMap q(2);
  q.add({2, 0}, {1, 0});
  q.add({1, 1}, {-1, 0});
  q.add({0, 2}, {1, 0});
  const NonnegResult r = nonneg_rewrite(q);
  ASSERT_TRUE(r.ok);
  EXPECT_GT(r.degree, 2);
  EXPECT_GE(r.poly.min_coefficient(), 0.0);
  for (const Vec& pi : oracle::random_policies(2, 10, 6)) EXPECT_NEAR(r.poly.eval(pi)[0], q.eval(pi)[0], 1e-12);
}

TEST(Polynomial, NonnegRewriteFailsOnInteriorZero) {
  // (x - y)^2 vanishes at (1/2, 1/2)
  PolynomialMap q(2);
  q.add({2, 0}, {1, 0});
  q.add({1, 1}, {-2, 0});
  q.add({0, 2}, {1, 0});
  EXPECT_FALSE(nonneg_rewrite(q, 40).ok);
}

TEST(Sampler, TupleExpectationMatchesTable) {
  const auto F = load_fixture("adversarial_offer").problem.dependence[1];
  const SimulationFunction& g = *F.sampler_ptr();
  for (const Vec& pi : oracle::random_policies(3, 10, 9)) {
    const Vec a = g.expectation(pi), b = oracle::tuple_expectation(g, pi);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
  }
}

TEST(Sampler, MonteCarloAgreesWithExpectation) {
  const DependenceFunction F = load_fixture("sbpd_v1").problem.dependence[1];
  const SampleabilityVerdict v = is_sampleable(F, 60);
  ASSERT_TRUE(v.yes);
  const Vec pi{0.7, 0.3};
  const Vec f = F.raw(pi), freq = oracle::sampled_frequency(*v.g, pi, 200'000, 17);
  // binomial standard error is at most 0.5 / sqrt(n) ~ 1.1e-3
  EXPECT_NEAR(freq[0], f[0], 5e-3);
}

TEST(Sampler, RoundTripThroughPolynomial) {
  const auto g = *load_fixture("adversarial_offer").problem.dependence[1].sampler_ptr();
  const PolynomialMap poly = from_sampler(g);
  EXPECT_TRUE(poly.homogeneous());
  const SimulationFunction back = to_sampler(poly);
  for (const auto& [c, v] : g.table())
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back.at_counts(c)[i], v[i], 1e-12);
}

TEST(Sampler, RedundantSampleKeepsExpectation) {
  const auto g = *load_fixture("adversarial_offer").problem.dependence[1].sampler_ptr();
  const SimulationFunction padded = with_ignored_sample(g);
  EXPECT_EQ(padded.sample_count(), 5);
  for (const Vec& pi : oracle::random_policies(3, 5, 10)) {
    const Vec a = g.expectation(pi), b = padded.expectation(pi);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
  }
}

TEST(Sampleability, TwoActionVerdicts) {
  const auto v1 = is_sampleable(load_fixture("sbpd_v1").problem.dependence[1], 60);
  EXPECT_TRUE(v1.yes) << v1.reason;
  EXPECT_GE(v1.degree_needed, 3);
  // Expectation of the synthesized sampler reproduces F on a grid.
  const DependenceFunction F = load_fixture("sbpd_v1").problem.dependence[1];
  for (const Vec& x : simplex_grid(2, 20))
    EXPECT_NEAR(v1.g->expectation(x)[0], F.raw(x)[0], 1e-10);

  const auto sq = is_sampleable(builtin::sqrt_theodora(), 60);
  EXPECT_FALSE(sq.yes);
  EXPECT_NE(sq.reason.find("not polynomial"), std::string::npos);

  PolynomialMap z(2);  // component 0 is (x - y)^2, vanishing inside the edge
  z.add({2, 0}, {1, -1});
  z.add({1, 1}, {-2, 2});
  z.add({0, 2}, {1, -1});
  z.add({0, 0}, {0, 1});
  EXPECT_FALSE(is_sampleable(DependenceFunction::polynomial(z), 60).yes);
}

TEST(Sampleability, ZeroAtVertexIsStillSampleable) {
  // F(p)_0 = p^2 touches zero only at the vertex p = 0
  PolynomialMap q(2);
  q.add({2, 0}, {1, -1});
  q.add({0, 0}, {0, 1});
  const auto v = is_sampleable(DependenceFunction::polynomial(q), 10);
  EXPECT_TRUE(v.yes) << v.reason;
  EXPECT_EQ(v.degree_needed, 2);
}

TEST(Scan, ThreeActionCounterexampleIsFlagged) {
  const DependenceFunction F = load_fixture("k3_nonsampleable").problem.dependence[0];
  const ScanReport r = necessary_condition_scan(F, 1.0 / 3);
  EXPECT_FALSE(r.violations.empty());
  EXPECT_GE(r.excluded_up_to, 20);
  EXPECT_LT(r.min_ratio, std::pow(1.0 / 3, 20));
  // the interior stays positive, so a grid zero check alone would miss it
  EXPECT_FALSE(is_sampleable(F, 30).yes);
}

TEST(Scan, SampleableMapHasNoViolations) {
  const DependenceFunction F = load_fixture("adversarial_offer").problem.dependence[1];
  const ScanReport r = necessary_condition_scan(F, 1.0 / 3);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_LE(r.excluded_up_to, 4);
}

TEST(Bernstein, ErrorShrinksWithN) {
  for (const auto& F : {builtin::sqrt_theodora(), builtin::quartic_logistic(1)}) {
    double prev = INFINITY;
    for (int N : {4, 8, 16, 32, 64}) {
      const double e = grid_distance(F, bernstein_approx(F, N), 50);
      EXPECT_LE(e, prev) << F.kind() << " N=" << N;
      prev = e;
    }
    EXPECT_LT(prev, 0.05);
  }
}

TEST(Bernstein, ReproducesLinearMapsExactly) {
  const auto F = DependenceFunction::linear({{0.9, 0.1}, {0.1, 0.9}});
  EXPECT_LT(grid_distance(F, bernstein_approx(F, 3), 50), 1e-14);
}

TEST(Builtin, MakeByName) {
  EXPECT_EQ(builtin::make("staircase", {{"n", 7}}, 2).black_box_ptr()->params.at("n"), 7);
  EXPECT_THROW(builtin::make("sqrt_theodora", {}, 3), InputError);
  EXPECT_THROW(builtin::make("nope", {}, 2), InputError);
}
