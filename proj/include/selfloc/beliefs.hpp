#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "selfloc/chain.hpp"
#include "selfloc/dependence.hpp"
#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"
#include "selfloc/problem.hpp"
#include "selfloc/simulation.hpp"

namespace selfloc {

enum class BeliefKind { GT, GSGT, LSGT, GGT, Custom };

inline std::string to_string(BeliefKind k) {
  switch (k) {
    case BeliefKind::GT: return "gt";
    case BeliefKind::GSGT: return "gsgt";
    case BeliefKind::LSGT: return "lsgt";
    case BeliefKind::GGT: return "ggt";
    default: return "custom";
  }
}

inline BeliefKind parse_belief_kind(const std::string& s) {
  if (s == "gt") return BeliefKind::GT;
  if (s == "gsgt") return BeliefKind::GSGT;
  if (s == "lsgt") return BeliefKind::LSGT;
  if (s == "ggt") return BeliefKind::GGT;
  throw InputError("unknown belief kind '" + s + "' (expected gt, gsgt, lsgt or ggt)");
}

// Credences over states plus, per dependant, the action transforms
// tau_j(a) used for counterfactuals. A transform is normally a policy; with
// a GGT weight override below Gamma it can leave the simplex, in which case
// `admissible` is false.
struct BeliefSystem {
  BeliefKind kind = BeliefKind::Custom;
  Vec anchor;
  Vec credences;                              // per state, zero on terminals
  std::vector<std::vector<Vec>> transforms;   // [dependant][action]
  Vec weights;                                // per-dependant N_j or rho_j
  bool degenerate_uniform = false;
  bool admissible = true;
};

struct DependantComponents {
  double gamma = 0;
  double rho = 0;
  Vec F;
  std::vector<PolicyDelta> deltas;
  std::vector<Vec> tau;
  bool admissible = true;
};

struct GGTComponents {
  Vec anchor;
  std::vector<DependantComponents> dependants;
};

// Credences proportional to weight[i(s)] * E[#s]; uniform over reachable
// states when every such product vanishes.
inline std::pair<Vec, bool> weighted_credences(const DecisionProblem& p, const ChainSolution& sol, const Vec& weight) {
  Vec c(p.num_states(), 0.0);
  double total_w = 0;
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal) continue;
    c[s] = weight[p.states[s].dependant] * sol.visits[s];
    total_w += c[s];
  }
  if (total_w > 0) {
    for (double& x : c) x /= total_w;
    return {c, false};
  }
  int reachable = 0;
  for (int s = 0; s < p.num_states(); ++s)
    if (!p.states[s].terminal && sol.visits[s] > 0) ++reachable;
  for (int s = 0; s < p.num_states(); ++s)
    c[s] = (!p.states[s].terminal && sol.visits[s] > 0) ? 1.0 / reachable : 0.0;
  return {c, true};
}

inline BeliefSystem gt_beliefs(const DecisionProblem& p, const Vec& pi) {
  for (int j = 0; j < p.num_dependants(); ++j)
    if (!p.dependence[j].is_identity())
      throw NotApplicable("GT needs identity dependence; dependant " + std::to_string(j + 1) + " is " +
                          p.dependence[j].kind());
  const ChainSolution sol = solve_at(p, pi);
  BeliefSystem b;
  b.kind = BeliefKind::GT;
  b.anchor = pi;
  b.weights.assign(p.num_dependants(), 1.0);
  std::tie(b.credences, b.degenerate_uniform) = weighted_credences(p, sol, b.weights);
  const int k = p.num_actions();
  b.transforms.assign(p.num_dependants(), {});
  for (auto& t : b.transforms)
    for (int a = 0; a < k; ++a) t.push_back(Policy::vertex(k, a).probs());
  return b;
}

// Samplers realizing each dependence function exactly, where one exists:
// samplers as given, polynomial forms through a nonnegative rewrite.
// Constant dependants get one ignored sample.
inline std::vector<SimulationFunction> samplers_of(const DecisionProblem& p) {
  std::vector<SimulationFunction> out;
  const int k = p.num_actions();
  for (int j = 0; j < p.num_dependants(); ++j) {
    const auto& F = p.dependence[j];
    if (const SimulationFunction* g = F.sampler_ptr()) {
      out.push_back(*g);
      continue;
    }
    if (F.is_constant()) {
      const Vec c = F.raw(Policy::uniform(k).probs());
      out.push_back(SimulationFunction::symmetric_from(k, 1, [&](const Counts&) { return c; }));
      continue;
    }
    const auto poly = F.as_polynomial();
    if (!poly) throw NotApplicable("dependant " + std::to_string(j + 1) + " is not sampleable: not polynomial");
    const NonnegResult r = nonneg_rewrite(*poly);
    if (!r.ok)
      throw NotApplicable("dependant " + std::to_string(j + 1) +
                          " is not sampleable: no nonnegative representation up to degree " + std::to_string(r.degree));
    out.push_back(to_sampler(r.poly));
  }
  return out;
}

namespace detail {

inline BeliefSystem simulation_beliefs(const DecisionProblem& p, const std::vector<SimulationFunction>& g,
                                       const Vec& pi, BeliefKind kind) {
  if (static_cast<int>(g.size()) != p.num_dependants()) throw InputError("need one sampler per dependant");
  const ChainSolution sol = solve_at(p, pi);
  BeliefSystem b;
  b.kind = kind;
  b.anchor = pi;
  for (const auto& s : g) b.weights.push_back(s.sample_count());
  std::tie(b.credences, b.degenerate_uniform) = weighted_credences(p, sol, b.weights);
  b.transforms.resize(p.num_dependants());
  for (int j = 0; j < p.num_dependants(); ++j)
    for (int a = 0; a < p.num_actions(); ++a) b.transforms[j].push_back(g[j].slot_conditional(pi, a));
  return b;
}

}  // namespace detail

inline constexpr double kSamplerMatchTol = 1e-8;

inline BeliefSystem gsgt_beliefs(const DecisionProblem& p, const std::vector<SimulationFunction>& g, const Vec& pi) {
  if (static_cast<int>(g.size()) != p.num_dependants()) throw InputError("need one sampler per dependant");
  for (int j = 0; j < p.num_dependants(); ++j) {
    if (g[j].num_actions() != p.num_actions()) throw InputError("sampler arity does not match the problem");
    for (const Vec& x : simplex_grid(p.num_actions(), kRangeCheckResolution))
      if (max_abs_diff(g[j].expectation(x), p.dependence[j].raw(x)) > kSamplerMatchTol)
        throw NotApplicable("sampler for dependant " + std::to_string(j + 1) + " does not reproduce its dependence function");
  }
  return detail::simulation_beliefs(p, g, pi, BeliefKind::GSGT);
}

inline BeliefSystem gsgt_beliefs(const DecisionProblem& p, const Vec& pi) {
  return gsgt_beliefs(p, samplers_of(p), pi);
}

enum class RhoCheck { Strict, Permissive };

inline constexpr double kZeroComponent = 1e-12;

inline GGTComponents ggt_components(const DecisionProblem& p, const Vec& pi,
                                    const std::optional<Vec>& rho_override = std::nullopt,
                                    RhoCheck check = RhoCheck::Strict) {
  require_differentiable(p);
  const int k = p.num_actions();
  if (rho_override && static_cast<int>(rho_override->size()) != p.num_dependants())
    throw InputError("rho override needs one weight per dependant");
  GGTComponents out;
  out.anchor = pi;
  for (int j = 0; j < p.num_dependants(); ++j) {
    const auto& Fj = p.dependence[j];
    DependantComponents c;
    c.F = Fj.eval(pi).probs();
    for (int a = 0; a < k; ++a) c.deltas.push_back(Fj.delta(pi, a));
    for (int b = 0; b < k; ++b) {
      if (c.F[b] < kZeroComponent) continue;
      for (int a = 0; a < k; ++a) c.gamma = std::max(c.gamma, -c.deltas[a][b] / c.F[b]);
    }
    if (rho_override) {
      c.rho = (*rho_override)[j];
      if (!(c.rho >= 0)) throw InputError("rho override must be nonnegative");
      if (c.rho < c.gamma * (1 - 1e-12)) {
        if (check == RhoCheck::Strict)
          throw InputError("rho override " + std::to_string(c.rho) + " for dependant " + std::to_string(j + 1) +
                           " is below Gamma = " + std::to_string(c.gamma));
        c.admissible = false;
      }
    } else {
      c.rho = c.gamma;
    }
    for (int a = 0; a < k; ++a) {
      Vec t = c.F;
      if (c.rho > 0)
        for (int i = 0; i < k; ++i) t[i] += c.deltas[a][i] / c.rho;
      if (c.admissible) {
        // rho == Gamma puts some entry exactly on zero up to rounding.
        if (near_simplex(t)) t = Policy::from(t).probs();
        else c.admissible = false;
      }
      c.tau.push_back(std::move(t));
    }
    out.dependants.push_back(std::move(c));
  }
  return out;
}

inline BeliefSystem ggt_beliefs(const DecisionProblem& p, const Vec& pi, const GGTComponents& comps) {
  if (max_abs_diff(comps.anchor, pi) > 1e-12) throw InputError("GGT components are anchored at a different policy");
  const ChainSolution sol = solve_at(p, pi);
  BeliefSystem b;
  b.kind = BeliefKind::GGT;
  b.anchor = pi;
  for (const auto& c : comps.dependants) {
    b.weights.push_back(c.rho);
    b.transforms.push_back(c.tau);
    b.admissible = b.admissible && c.admissible;
  }
  std::tie(b.credences, b.degenerate_uniform) = weighted_credences(p, sol, b.weights);
  return b;
}

inline BeliefSystem ggt_beliefs(const DecisionProblem& p, const Vec& pi) {
  return ggt_beliefs(p, pi, ggt_components(p, pi));
}

struct LSGTResult {
  BeliefSystem beliefs;
  std::vector<SimulationFunction> samplers;  // local: valid only around the anchor
};

// Local simulation models for the two simple cases: Gamma_j <= 1 (one sample,
// g(a) = F + delta(a)), or a deterministic anchor (ceil(Gamma_j) samples,
// one-deviation tuples carrying delta / N).
inline LSGTResult lsgt_from_simple_cases(const DecisionProblem& p, const Vec& pi) {
  const GGTComponents comps = ggt_components(p, pi);
  const int k = p.num_actions();
  int vertex = -1;
  for (int a = 0; a < k; ++a)
    if (pi[a] == 1.0) vertex = a;
  LSGTResult r;
  for (int j = 0; j < p.num_dependants(); ++j) {
    const auto& c = comps.dependants[j];
    if (c.gamma <= 1 + 1e-12) {
      r.samplers.push_back(SimulationFunction::symmetric_from(k, 1, [&](const Counts& n) {
        const int a = static_cast<int>(std::find(n.begin(), n.end(), 1) - n.begin());
        return axpy(1.0, c.deltas[a], c.F);
      }));
    } else if (vertex >= 0) {
      const int N = static_cast<int>(std::ceil(c.gamma - 1e-12));
      r.samplers.push_back(SimulationFunction::symmetric_from(k, N, [&](const Counts& n) {
        if (n[vertex] == N - 1)
          for (int a = 0; a < k; ++a)
            if (a != vertex && n[a] == 1) return axpy(1.0 / N, c.deltas[a], c.F);
        return c.F;
      }));
    } else {
      throw NotApplicable("LSGT unavailable: dependant " + std::to_string(j + 1) + " has Gamma = " +
                          std::to_string(c.gamma) + " > 1 at a mixed policy");
    }
  }
  r.beliefs = detail::simulation_beliefs(p, r.samplers, pi, BeliefKind::LSGT);
  return r;
}

struct AuditReport {
  bool faithful = true;
  bool fanciful = false;
  std::vector<std::string> details;
};

inline constexpr double kReachTol = 1e-15;

inline AuditReport audit_beliefs(const DecisionProblem& p, const Vec& pi, const BeliefSystem& b) {
  AuditReport r;
  const ChainSolution sol = solve_at(p, pi);
  const Vec visits = dependant_visits(p, sol);
  const int k = p.num_actions();
  for (int j = 0; j < p.num_dependants(); ++j) {
    if (!p.dependence[j].is_identity() || visits[j] <= kReachTol) continue;
    double cred = 0;
    for (int s = 0; s < p.num_states(); ++s)
      if (!p.states[s].terminal && p.states[s].dependant == j) cred += b.credences[s];
    if (cred <= 0) {
      r.faithful = false;
      r.details.push_back("no credence on identity dependant " + std::to_string(j + 1));
    }
    for (int a = 0; a < k; ++a)
      for (int a2 = 0; a2 < k; ++a2)
        if (a != a2 && !(b.transforms[j][a][a] > b.transforms[j][a2][a] + 1e-12)) {
          r.faithful = false;
          r.details.push_back("transform of identity dependant " + std::to_string(j + 1) + " does not favour action " +
                              p.actions[a] + " over " + p.actions[a2]);
        }
  }
  for (int s = 0; s < p.num_states(); ++s)
    if (!p.states[s].terminal && sol.visits[s] <= kReachTol && b.credences[s] > kReachTol) {
      r.fanciful = true;
      r.details.push_back("credence on unreachable state " + p.states[s].id);
    }
  return r;
}

}  // namespace selfloc
