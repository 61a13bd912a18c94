#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"
#include "selfloc/problem.hpp"

namespace selfloc {

inline constexpr double kPivotTol = 1e-12;

// Exact quantities of the absorbing chain under one joint policy. Vectors are
// indexed by state; for terminal states `visits` holds the absorption
// probability and `values` the utility.
struct ChainSolution {
  Vec visits;
  Vec values;
  double ex_ante_eu = 0;
};

inline ChainSolution solve_chain(const DecisionProblem& p, const std::vector<Vec>& joint) {
  const int S = p.num_states();
  if (static_cast<int>(joint.size()) != p.num_dependants())
    throw InputError("joint policy has " + std::to_string(joint.size()) + " entries for " +
                     std::to_string(p.num_dependants()) + " dependants");
  const std::vector<int> nt = p.nonterminals();
  const int m = static_cast<int>(nt.size());
  std::vector<int> pos(S, -1);
  for (int i = 0; i < m; ++i) pos[nt[i]] = i;

  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd p0(m);
  std::vector<Vec> rows(m);
  for (int i = 0; i < m; ++i) {
    const int s = nt[i];
    rows[i] = p.step(s, joint[p.states[s].dependant]);
    p0[i] = p.initial[s];
    for (int t = 0; t < S; ++t) {
      const double v = rows[i][t];
      if (v == 0) continue;
      if (pos[t] >= 0) A(i, pos[t]) -= v;
      else b[i] += v * *p.states[t].utility;
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (m > 0 && lu.matrixLU().diagonal().cwiseAbs().minCoeff() < kPivotTol)
    throw TerminationError("I - Q is singular: the process does not terminate under this joint policy");
  const Eigen::VectorXd w = lu.solve(b);
  const Eigen::VectorXd x = lu.transpose().solve(p0);

  ChainSolution sol;
  sol.visits.assign(S, 0.0);
  sol.values.assign(S, 0.0);
  for (int t = 0; t < S; ++t)
    if (p.states[t].terminal) sol.values[t] = *p.states[t].utility;
  for (int i = 0; i < m; ++i) {
    sol.visits[nt[i]] = std::max(0.0, x[i]);
    sol.values[nt[i]] = w[i];
  }
  for (int i = 0; i < m; ++i)
    for (int t = 0; t < S; ++t)
      if (pos[t] < 0 && rows[i][t] != 0) sol.visits[t] += sol.visits[nt[i]] * rows[i][t];
  // P0 . (Q w + R u), term by term.
  double eu = 0;
  for (int i = 0; i < m; ++i) {
    if (p0[i] == 0) continue;
    double one_step = 0;
    for (int t = 0; t < S; ++t) one_step += rows[i][t] * sol.values[t];
    eu += p0[i] * one_step;
  }
  sol.ex_ante_eu = eu;
  return sol;
}

inline std::vector<Vec> joint_policy(const DecisionProblem& p, const Vec& pi) {
  if (static_cast<int>(pi.size()) != p.num_actions()) throw InputError("policy arity does not match the problem");
  std::vector<Vec> joint;
  joint.reserve(p.dependence.size());
  for (const auto& F : p.dependence) joint.push_back(F.eval(pi).probs());
  return joint;
}

inline ChainSolution solve_at(const DecisionProblem& p, const Vec& pi) { return solve_chain(p, joint_policy(p, pi)); }

inline double ex_ante_eu(const DecisionProblem& p, const Vec& pi) { return solve_at(p, pi).ex_ante_eu; }

// q[s][a] = sum_{s'} T(s'|s,a) V(s')
inline std::vector<Vec> action_values(const DecisionProblem& p, const ChainSolution& sol) {
  std::vector<Vec> q(p.num_states());
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal) continue;
    q[s].assign(p.num_actions(), 0.0);
    for (int a = 0; a < p.num_actions(); ++a)
      for (int t = 0; t < p.num_states(); ++t) q[s][a] += p.transitions[s][a][t] * sol.values[t];
  }
  return q;
}

// deltas[j][a] = delta_j(a | pi)
inline std::vector<std::vector<PolicyDelta>> all_deltas(const DecisionProblem& p, const Vec& pi) {
  std::vector<std::vector<PolicyDelta>> d(p.num_dependants());
  for (int j = 0; j < p.num_dependants(); ++j)
    for (int a = 0; a < p.num_actions(); ++a) d[j].push_back(p.dependence[j].delta(pi, a));
  return d;
}

inline Vec dependant_visits(const DecisionProblem& p, const ChainSolution& sol) {
  Vec r(p.num_dependants(), 0.0);
  for (int s = 0; s < p.num_states(); ++s)
    if (!p.states[s].terminal) r[p.states[s].dependant] += sol.visits[s];
  return r;
}

inline void require_differentiable(const DecisionProblem& p) {
  for (const auto& F : p.dependence)
    if (!F.differentiable()) {
      const auto* b = F.black_box_ptr();
      throw DerivativeUnavailable("derivative unavailable: dependence '" + (b ? b->name : F.kind()) +
                                  "' is not differentiable");
    }
}

// grad(a) = sum_s E[#s] sum_a' delta_{i(s)}(a'|a) q(s, a')
inline Vec ex_ante_grad(const DecisionProblem& p, const Vec& pi) {
  require_differentiable(p);
  const ChainSolution sol = solve_at(p, pi);
  const auto q = action_values(p, sol);
  const auto d = all_deltas(p, pi);
  const int k = p.num_actions();
  Vec g(k, 0.0);
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal || sol.visits[s] == 0) continue;
    const int j = p.states[s].dependant;
    for (int a = 0; a < k; ++a) {
      double inner = 0;
      for (int b = 0; b < k; ++b) inner += d[j][a][b] * q[s][b];
      g[a] += sol.visits[s] * inner;
    }
  }
  return g;
}

}  // namespace selfloc
