#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "selfloc/beliefs.hpp"
#include "selfloc/cdt.hpp"
#include "selfloc/chain.hpp"
#include "selfloc/error.hpp"
#include "selfloc/problem.hpp"
#include "selfloc/simulation.hpp"

namespace selfloc {

inline constexpr double kExpansionCap = 1e6;

struct TreeNode {
  int original = -1;        // index of the original state
  std::vector<int> prefix;  // sampled actions so far; empty at roots and terminals
};

// All-identity problem in which each sample of a dependant is its own state.
struct ExpandedProblem {
  DecisionProblem problem;
  std::vector<TreeNode> back_map;  // per expanded state
  std::vector<int> root_of;        // per original state: its root or terminal copy
};

inline std::string expanded_id(const DecisionProblem& p, int s, const std::vector<int>& prefix) {
  if (prefix.empty()) return p.states[s].id;
  std::string id = p.states[s].id + "|";
  for (size_t i = 0; i < prefix.size(); ++i) id += (i ? "," : "") + p.actions[prefix[i]];
  return id;
}

inline ExpandedProblem expand_problem(const DecisionProblem& p, const std::vector<SimulationFunction>& g) {
  require_valid(p);
  if (static_cast<int>(g.size()) != p.num_dependants()) throw InputError("need one sampler per dependant");
  const int k = p.num_actions();
  double count = 0;
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal) {
      count += 1;
      continue;
    }
    const int N = g[p.states[s].dependant].sample_count();
    if (N < 1) throw InputError("expansion needs at least one sample per dependant");
    count += k == 1 ? N : (std::pow(static_cast<double>(k), N) - 1) / (k - 1);
  }
  if (count > kExpansionCap)
    throw CapExceeded("expansion would create " + std::to_string(static_cast<long long>(count)) + " states");

  ExpandedProblem ex;
  DecisionProblem& q = ex.problem;
  q.actions = p.actions;
  q.dependence = {DependenceFunction::identity(k)};
  std::map<std::pair<int, std::vector<int>>, int> index;
  ex.root_of.assign(p.num_states(), -1);
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal) {
      ex.root_of[s] = q.num_states();
      q.states.push_back(p.states[s]);
      ex.back_map.push_back({s, {}});
      continue;
    }
    const int N = g[p.states[s].dependant].sample_count();
    std::vector<std::vector<int>> level{{}};
    for (int depth = 0; depth < N; ++depth) {
      std::vector<std::vector<int>> next;
      for (const auto& pre : level) {
        index[{s, pre}] = q.num_states();
        q.states.push_back({expanded_id(p, s, pre), false, std::nullopt, 0});
        ex.back_map.push_back({s, pre});
        for (int a = 0; a < k; ++a) {
          auto ext = pre;
          ext.push_back(a);
          next.push_back(std::move(ext));
        }
      }
      level = std::move(next);
    }
    ex.root_of[s] = index[{s, {}}];
  }
  std::set<std::string> ids;
  for (const auto& st : q.states)
    if (!ids.insert(st.id).second) throw InputError("expanded state id collision: " + st.id);

  const int S = q.num_states();
  q.initial.assign(S, 0.0);
  for (int s = 0; s < p.num_states(); ++s) q.initial[ex.root_of[s]] += p.initial[s];
  q.transitions.assign(S, {});
  for (int x = 0; x < S; ++x) {
    if (q.states[x].terminal) continue;
    const TreeNode& node = ex.back_map[x];
    const SimulationFunction& gj = g[p.states[node.original].dependant];
    q.transitions[x].assign(k, Vec(S, 0.0));
    for (int a = 0; a < k; ++a) {
      auto ext = node.prefix;
      ext.push_back(a);
      if (static_cast<int>(ext.size()) < gj.sample_count()) {
        q.transitions[x][a][index.at({node.original, ext})] = 1;
      } else {
        const Vec dist = p.step(node.original, gj(ext));
        for (int t = 0; t < p.num_states(); ++t)
          if (dist[t] != 0) q.transitions[x][a][ex.root_of[t]] += dist[t];
      }
    }
  }
  return ex;
}

struct ExpansionCheck {
  double eu_gap = 0;              // (i)
  double credence_gap = 0;        // (ii)
  double counterfactual_gap = 0;  // (iii), relative to the utility range
  double transition_gap = 0;      // (iv)
  bool eu_ok = false, credence_ok = false, counterfactual_ok = false, transition_ok = false;
  bool passed() const { return eu_ok && credence_ok && counterfactual_ok && transition_ok; }
};

inline ExpansionCheck verify_expansion(const DecisionProblem& original, const std::vector<SimulationFunction>& g,
                                       const ExpandedProblem& ex, const Vec& pi) {
  ExpansionCheck c;
  const DecisionProblem& q = ex.problem;
  const double scale = std::max(1.0, original.utility_range());
  const int k = original.num_actions();

  // Original side: chain under F(pi) and GSGT beliefs.
  const ChainSolution so = solve_at(original, pi);
  const auto qo = action_values(original, so);
  const BeliefSystem gs = detail::simulation_beliefs(original, g, pi, BeliefKind::GSGT);
  // Expanded side: identity dependence, GT beliefs.
  const ChainSolution se = solve_at(q, pi);
  const auto qe = action_values(q, se);
  const BeliefSystem gt = gt_beliefs(q, pi);

  c.eu_gap = std::abs(so.ex_ante_eu - se.ex_ante_eu) / scale;

  Vec tree_cred(original.num_states(), 0.0), tree_visits(original.num_states(), 0.0);
  std::vector<Vec> tree_cf(original.num_states(), Vec(k, 0.0));
  for (int x = 0; x < q.num_states(); ++x) {
    if (q.states[x].terminal) continue;
    const int s = ex.back_map[x].original;
    tree_cred[s] += gt.credences[x];
    tree_visits[s] += se.visits[x];
    for (int a = 0; a < k; ++a) tree_cf[s][a] += se.visits[x] * qe[x][a];
  }
  for (int s = 0; s < original.num_states(); ++s) {
    if (original.states[s].terminal) continue;
    c.credence_gap = std::max(c.credence_gap, std::abs(tree_cred[s] - gs.credences[s]));
    if (tree_visits[s] <= 0) continue;
    const auto& tau = gs.transforms[original.states[s].dependant];
    for (int a = 0; a < k; ++a) {
      double orig = 0;
      for (int b = 0; b < k; ++b) orig += tau[a][b] * qo[s][b];
      c.counterfactual_gap = std::max(c.counterfactual_gap, std::abs(tree_cf[s][a] / tree_visits[s] - orig) / scale);
    }
  }

  // (iv): push unit mass from each root through its tree.
  const std::vector<Vec> joint = joint_policy(original, pi);
  for (int s = 0; s < original.num_states(); ++s) {
    if (original.states[s].terminal) continue;
    Vec exit(original.num_states(), 0.0);
    std::map<int, double> level{{ex.root_of[s], 1.0}};
    while (!level.empty()) {
      std::map<int, double> next;
      for (const auto& [x, m] : level) {
        const size_t depth = ex.back_map[x].prefix.size();
        for (int a = 0; a < k; ++a) {
          if (pi[a] == 0) continue;
          const Vec& row = q.transitions[x][a];
          for (int y = 0; y < q.num_states(); ++y) {
            if (row[y] == 0) continue;
            const TreeNode& ny = ex.back_map[y];
            const double w = m * pi[a] * row[y];
            if (!q.states[y].terminal && ny.original == s && ny.prefix.size() == depth + 1) next[y] += w;
            else exit[ny.original] += w;
          }
        }
      }
      level = std::move(next);
    }
    const Vec want = original.step(s, joint[original.states[s].dependant]);
    c.transition_gap = std::max(c.transition_gap, max_abs_diff(exit, want));
  }

  c.eu_ok = c.eu_gap < 1e-10;
  c.credence_ok = c.credence_gap < 1e-10;
  c.counterfactual_ok = c.counterfactual_gap < 1e-9;
  c.transition_ok = c.transition_gap < 1e-10;
  return c;
}

}  // namespace selfloc
