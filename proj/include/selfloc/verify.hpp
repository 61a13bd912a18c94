#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selfloc/beliefs.hpp"
#include "selfloc/cdt.hpp"
#include "selfloc/chain.hpp"
#include "selfloc/fixtures.hpp"
#include "selfloc/montecarlo.hpp"
#include "selfloc/simcompile.hpp"

namespace selfloc {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

namespace verify {

// Roots in (0,1) of 32p^5 - 80p^4 + 48p^3 - 4p^2 + 4p - 2 by plain bisection.
inline std::vector<double> quintic_roots(double tol = 1e-10) {
  auto q = [](double p) { return (((32 * p - 80) * p + 48) * p - 4) * p * p + 4 * p - 2; };
  std::vector<double> roots;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    if (q(lo) == 0) {
      roots.push_back(lo);
      continue;
    }
    if ((q(lo) < 0) == (q(hi) < 0)) continue;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      ((q(mid) < 0) == (q(lo) < 0) ? lo : hi) = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

inline std::vector<Vec> random_anchors(int k, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) out.push_back(random_policy(k, rng).probs());
  return out;
}

inline double credence_on(const DecisionProblem& p, const BeliefSystem& b, int dependant) {
  double c = 0;
  for (int s = 0; s < p.num_states(); ++s)
    if (!p.states[s].terminal && p.states[s].dependant == dependant) c += b.credences[s];
  return c;
}

inline bool near(double x, double want, double tol) { return std::abs(x - want) <= tol; }

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      passed_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  bool passed() const { return passed_; }
  std::string detail() const { return passed_ ? notes_ : failures_; }

 private:
  bool passed_ = true;
  std::string failures_, notes_;
};

inline const Vec kPureC{1, 0};
inline const Vec kPureD{0, 1};

inline void c1(Checker& c, std::uint64_t) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  const PolicySet set = find_stationary(p);
  c.expect(set.policies.size() == 3, "expected 3 stationary policies, got " + std::to_string(set.policies.size()));
  if (set.policies.size() != 3) return;
  // Sorted by policy: pure D first.
  c.expect(max_abs_diff(set.policies[0].policy, kPureD) < 1e-9, "first policy is not pure D");
  const double lo = set.policies[1].policy[0], hi = set.policies[2].policy[0];
  c.expect(near(lo, 0.36, 0.01), "low root " + fmt(lo));
  c.expect(near(hi, 0.88, 0.01), "high root " + fmt(hi));
  const auto roots = quintic_roots();
  c.expect(roots.size() == 2, "quintic oracle found " + std::to_string(roots.size()) + " roots in (0,1)");
  if (roots.size() == 2) {
    c.expect(near(lo, roots[0], 1e-8), "low root " + fmt(lo) + " vs oracle " + fmt(roots[0]));
    c.expect(near(hi, roots[1], 1e-8), "high root " + fmt(hi) + " vs oracle " + fmt(roots[1]));
  }
  c.note("roots " + fmt(lo) + ", " + fmt(hi));
}

inline void c2(Checker& c, std::uint64_t seed) {
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  const double eu = ex_ante_eu(p, kPureC);
  c.expect(near(eu, 25.0 / 12, 1e-10), "EU at pure C " + fmt(eu));
  auto anchors = random_anchors(2, 5, seed);
  anchors.push_back(kPureC);
  anchors.push_back(kPureD);
  for (const Vec& pi : anchors) {
    const BeliefSystem b = gsgt_beliefs(p, pi);
    const double th = credence_on(p, b, 1);
    c.expect(near(th, 6.0 / 7, 1e-10), "Theodora credence " + fmt(th) + " at " + format_vec(pi));
  }
  for (const Vec& pi : {kPureC, kPureD}) {
    const RatifiabilityReport r = is_ratifiable(p, gsgt_beliefs(p, pi), pi);
    c.expect(near(r.eu[0] - r.eu[1], -2.0 / 7, 1e-9), "advantage of C " + fmt(r.eu[0] - r.eu[1]) + " at " + format_vec(pi));
  }
  c.note("EU(C) " + fmt(eu));
}

inline void c3(Checker& c, std::uint64_t seed) {
  const DecisionProblem p = load_fixture("sbpd_v2").problem;
  const PolicySet set = find_stationary(p);
  c.expect(set.policies.size() == 1 && max_abs_diff(set.policies[0].policy, kPureC) < 1e-9,
           "stationary set is not {pure C}, size " + std::to_string(set.policies.size()));
  const Vec rho{0.8, 2};
  const GGTComponents comps = ggt_components(p, kPureC, rho, RhoCheck::Permissive);
  const BeliefSystem b = ggt_beliefs(p, kPureC, comps);
  c.expect(near(credence_on(p, b, 0), 1.0 / 6, 1e-10), "Dorothea credence " + fmt(credence_on(p, b, 0)));
  c.expect(near(credence_on(p, b, 1), 5.0 / 6, 1e-10), "Theodora credence " + fmt(credence_on(p, b, 1)));
  auto anchors = random_anchors(2, 10, seed);
  anchors.push_back(kPureC);
  anchors.push_back(kPureD);
  for (const Vec& pi : anchors) {
    const BeliefSystem bp = ggt_beliefs(p, pi, ggt_components(p, pi, rho, RhoCheck::Permissive));
    const Vec eu = cdt_eus(p, bp, pi);
    c.expect(near(eu[0] - eu[1], 1.0 / 6, 1e-9), "GGT advantage " + fmt(eu[0] - eu[1]) + " at " + format_vec(pi));
  }
  const double eu = ex_ante_eu(p, kPureC);
  c.expect(near(eu, 2.9, 1e-10), "EU at pure C " + fmt(eu));
}

inline void c4(Checker& c, std::uint64_t seed) {
  const DecisionProblem p = load_fixture("newcomb75").problem;
  const int sim = p.state_index("sim");
  auto anchors = random_anchors(2, 5, seed);
  anchors.push_back({1, 0});
  anchors.push_back({0, 1});
  for (const Vec& pi : anchors) {
    const double cr = gt_beliefs(p, pi).credences[sim];
    c.expect(near(cr, 1.0 / 3, 1e-10), "sim credence " + fmt(cr) + " at " + format_vec(pi));
  }
  const double one = ex_ante_eu(p, {1, 0}), two = ex_ante_eu(p, {0, 1});
  c.expect(std::abs(one / 750'000 - 1) <= 1e-6, "one-box EU " + fmt(one));
  c.expect(std::abs(two / 251'000 - 1) <= 1e-6, "two-box EU " + fmt(two));
}

inline double theta_product(double t) { return t * (1 - t) * (t * t * t + (1 - t) * (1 - t) * (1 - t)); }

inline void c5(Checker& c, std::uint64_t) {
  const DecisionProblem p = load_fixture("adversarial_offer").problem;
  const OptimumResult opt = optimize_ex_ante(p);
  c.expect(!opt.argmax.policies.empty(), "no optimum");
  const double star = 0.5 + 0.5 / std::sqrt(3.0);
  for (const auto& e : opt.argmax.policies) {
    const double pp = e.policy[0] + e.policy[1];
    const double theta = pp > 0 ? e.policy[0] / pp : 0;
    c.expect(near(theta, star, 1e-4) || near(theta, 1 - star, 1e-4), "theta " + fmt(theta));
    c.expect(near(pp, 0.046, 0.005), "p " + fmt(pp));
    c.expect(near(theta_product(theta), 1.0 / 12, 1e-8), "theta product " + fmt(theta_product(theta)));
    c.note("theta " + fmt(theta) + " p " + fmt(pp));
  }
}

inline void c6(Checker& c, std::uint64_t seed) {
  double worst = 0;
  for (const char* name : {"sbpd_v1", "sbpd_v2", "newcomb75", "adversarial_offer"}) {
    const DecisionProblem p = load_fixture(name).problem;
    for (const Vec& pi : random_anchors(p.num_actions(), 20, seed)) {
      const double r = grad_identity_residual(p, pi);
      worst = std::max(worst, r);
      c.expect(r < 1e-6, std::string(name) + " residual " + fmt(r) + " at " + format_vec(pi));
    }
  }
  c.note("max residual " + fmt(worst));
}

inline void c7(Checker& c, std::uint64_t seed) {
  for (const char* name : {"sbpd_v1", "adversarial_offer"}) {
    const DecisionProblem p = load_fixture(name).problem;
    const auto g = samplers_of(p);
    const ExpandedProblem ex = expand_problem(p, g);
    for (const Vec& pi : random_anchors(p.num_actions(), 20, seed)) {
      const ExpansionCheck r = verify_expansion(p, g, ex, pi);
      c.expect(r.passed(), std::string(name) + " at " + format_vec(pi) + ": gaps " + fmt(r.eu_gap) + ", " +
                               fmt(r.credence_gap) + ", " + fmt(r.counterfactual_gap) + ", " + fmt(r.transition_gap));
    }
    c.note(std::string(name) + " expands to " + std::to_string(ex.problem.num_states()) + " states");
  }
}

inline void c8(Checker& c, std::uint64_t) {
  const DecisionProblem p = load_fixture("sbpd_v2").problem;
  const ConvergenceReport rep = convergence_sequence(p, {4, 8, 16, 32, 64});
  for (size_t i = 1; i < rep.rows.size(); ++i)
    c.expect(rep.rows[i].sup_error < rep.rows[i - 1].sup_error,
             "sup error not decreasing at N=" + std::to_string(rep.rows[i].N));
  const ConvergenceRow& last = rep.rows.back();
  double d = 0;
  for (const auto& e : last.optimum.argmax.policies) d = std::max(d, distance(e.policy, kPureC));
  c.expect(!last.optimum.argmax.policies.empty() && d <= 0.02, "distance to pure C " + fmt(d));
  const RatifiabilityReport r = is_ratifiable(last.problem, gsgt_beliefs(last.problem, kPureC), kPureC);
  const double adv = r.eu[0] - r.eu[1], want = 0.8 / 129;
  c.expect(std::abs(adv / want - 1) <= 0.3, "GSGT advantage " + fmt(adv) + " vs " + fmt(want));
  c.note("sup error at 64 " + fmt(last.sup_error) + ", advantage " + fmt(adv));
}

inline void c9(Checker& c, std::uint64_t seed) {
  const std::size_t n = 100'000;
  for (const auto& name : fixture_names()) {
    const DecisionProblem p = load_fixture(name).problem;
    for (const Vec& pi : random_anchors(p.num_actions(), 3, seed)) {
      const MonteCarloReport r = validate(p, pi, n, seed);
      for (const auto& q : r.checks)
        c.expect(q.pass, name + " " + q.name + " z=" + fmt(q.z) + " at " + format_vec(pi));
    }
  }
  // same seed, same numbers
  const DecisionProblem p = load_fixture("sbpd_v1").problem;
  const MonteCarloReport a = validate(p, {0.5, 0.5}, 20'000, seed), b = validate(p, {0.5, 0.5}, 20'000, seed);
  bool same = a.checks.size() == b.checks.size();
  for (size_t i = 0; same && i < a.checks.size(); ++i) same = a.checks[i].mean == b.checks[i].mean;
  c.expect(same, "rollouts differ under a fixed seed");
}

inline std::vector<std::string> differentiable_fixtures() {
  std::vector<std::string> out;
  for (const auto& name : fixture_names()) {
    const DecisionProblem p = load_fixture(name).problem;
    if (std::all_of(p.dependence.begin(), p.dependence.end(), [](const auto& F) { return F.differentiable(); }))
      out.push_back(name);
  }
  return out;
}

// Verdict of the gradient test: no vertex direction improves EU by more than
// tol, in units of (sum_j rho_j E[#j]) * utility range.
inline bool gradient_stationary(const DecisionProblem& p, const Vec& pi, double tol) {
  const Vec g = ex_ante_grad(p, pi);
  const GGTComponents comps = ggt_components(p, pi);
  const Vec visits = dependant_visits(p, solve_at(p, pi));
  double W = 0;
  for (int j = 0; j < p.num_dependants(); ++j) W += comps.dependants[j].rho * visits[j];
  const double scale = std::max(W, 1e-300) * p.utility_range();
  return std::all_of(g.begin(), g.end(), [&](double x) { return x / scale <= tol; });
}

inline void c10(Checker& c, std::uint64_t seed) {
  const double tol = 1e-6;
  int agree = 0, ratifiable = 0;
  for (const auto& name : differentiable_fixtures()) {
    const DecisionProblem p = load_fixture(name).problem;
    auto anchors = random_anchors(p.num_actions(), 50, seed);
    for (int a = 0; a < p.num_actions(); ++a) anchors.push_back(Policy::vertex(p.num_actions(), a).probs());
    if (p.num_actions() == 2)
      for (const auto& e : find_stationary(p).policies) anchors.push_back(e.policy);
    for (const Vec& pi : anchors) {
      const BeliefSystem b = ggt_beliefs(p, pi);
      const bool rat = is_ratifiable(p, b, pi, tol).ratifiable;
      const bool grad = gradient_stationary(p, pi, tol);
      c.expect(rat == grad, name + ": ratifiable " + std::to_string(rat) + " but gradient test " +
                                std::to_string(grad) + " at " + format_vec(pi));
      agree += rat == grad;
      ratifiable += rat;
      const AuditReport au = audit_beliefs(p, pi, b);
      c.expect(au.faithful && !au.fanciful, name + ": GGT audit failed at " + format_vec(pi));
    }
  }
  c.note(std::to_string(agree) + " verdicts agree, " + std::to_string(ratifiable) + " ratifiable");

  {
    const DecisionProblem p = load_fixture("wine").problem;
    const Vec never{1, 0};
    const ImpossibilityReport r = impossibility_check(p, standard_candidates(p, never), never);
    c.expect(r.claim_holds && r.faithful_candidates > 0, "wine impossibility claim");
    bool refused = false, fanciful = false;
    for (const auto& o : r.outcomes) {
      if (o.name == "ggt") refused = !o.applicable && o.refusal.find("derivative unavailable") != std::string::npos;
      if (o.name.rfind("fanciful", 0) == 0) fanciful = o.audit.fanciful;
    }
    c.expect(refused, "wine: GGT was not refused");
    c.expect(fanciful, "wine: fanciful candidate not flagged");
  }
  {
    const DecisionProblem p = load_fixture("nrho").problem;
    const double gamma = ggt_components(p, {0.5, 0.5}).dependants[0].gamma;
    c.expect(near(gamma, 2, 1e-9), "nrho Gamma(1/2) " + fmt(gamma));
  }
  for (const char* name : {"sbpd_v1", "adversarial_offer"}) {
    const DecisionProblem p = load_fixture(name).problem;
    const auto g = samplers_of(p);
    auto padded = g;
    padded.back() = with_ignored_sample(g.back());
    auto anchors = random_anchors(p.num_actions(), 10, seed);
    for (int a = 0; a < p.num_actions(); ++a) anchors.push_back(Policy::vertex(p.num_actions(), a).probs());
    bool credences_moved = false;
    for (const Vec& pi : anchors) {
      const BeliefSystem b0 = gsgt_beliefs(p, g, pi), b1 = gsgt_beliefs(p, padded, pi);
      credences_moved |= max_abs_diff(b0.credences, b1.credences) > 1e-9;
      c.expect(is_ratifiable(p, b0, pi, tol).ratifiable == is_ratifiable(p, b1, pi, tol).ratifiable,
               std::string(name) + ": padded sampler changed the verdict at " + format_vec(pi));
    }
    c.expect(credences_moved, std::string(name) + ": padding left the credences unchanged");
  }
}

}  // namespace verify

struct Criterion {
  int id;
  std::string title;
  std::function<void(verify::Checker&, std::uint64_t)> run;
  double time_limit = 0;  // seconds, 0 for none
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c{
      {1, "sbpd_v1 stationary set", verify::c1, 5},
      {2, "sbpd_v1 EU, GSGT credence and advantage", verify::c2},
      {3, "sbpd_v2 stationary set and GGT beliefs", verify::c3},
      {4, "newcomb75 credence and EU", verify::c4},
      {5, "adversarial offer optimum", verify::c5},
      {6, "gradient identity residual", verify::c6, 10},
      {7, "expansion equivalence", verify::c7},
      {8, "Bernstein convergence", verify::c8},
      {9, "Monte Carlo validation", verify::c9, 60},
      {10, "property suites", verify::c10},
  };
  return c;
}

inline CriterionResult run_criterion(const Criterion& cr, std::uint64_t seed) {
  CriterionResult r;
  r.id = cr.id;
  r.title = cr.title;
  verify::Checker c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cr.run(c, seed);
  } catch (const std::exception& e) {
    c.expect(false, std::string("threw: ") + e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (cr.time_limit > 0 && r.seconds > cr.time_limit)
    c.expect(false, "took " + verify::fmt(r.seconds) + " s, limit " + verify::fmt(cr.time_limit) + " s");
  r.passed = c.passed();
  r.detail = c.detail();
  return r;
}

inline std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 0) {
  std::vector<CriterionResult> out;
  for (const auto& cr : criteria()) out.push_back(run_criterion(cr, seed));
  return out;
}

}  // namespace selfloc
