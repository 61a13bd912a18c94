#pragma once

// Slow, independent reference computations used by the unit tests.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "selfloc.hpp"

namespace oracle {

using selfloc::DecisionProblem;
using selfloc::Vec;

struct Enumerated {
  Vec visits;  // expected visits per state, terminals included
  double eu = 0;
  int histories = 0;
};

// Walks every history of an acyclic problem with its probability.
inline Enumerated enumerate_histories(const DecisionProblem& p, const Vec& pi, int max_depth = 64) {
  const auto joint = selfloc::joint_policy(p, pi);
  Enumerated out;
  out.visits.assign(p.num_states(), 0.0);
  std::function<void(int, double, int)> walk = [&](int s, double w, int depth) {
    if (w == 0) return;
    if (depth > max_depth) throw std::runtime_error("history too long for enumeration");
    out.visits[s] += w;
    if (p.states[s].terminal) {
      out.eu += w * *p.states[s].utility;
      ++out.histories;
      return;
    }
    const Vec& act = joint[p.states[s].dependant];
    for (int a = 0; a < p.num_actions(); ++a) {
      if (act[a] == 0) continue;
      for (int t = 0; t < p.num_states(); ++t)
        if (p.transitions[s][a][t] != 0) walk(t, w * act[a] * p.transitions[s][a][t], depth + 1);
    }
  };
  for (int s = 0; s < p.num_states(); ++s) walk(s, p.initial[s], 0);
  return out;
}

inline bool acyclic(const DecisionProblem& p) {
  std::vector<int> mark(p.num_states(), 0);
  std::function<bool(int)> dfs = [&](int s) {
    if (mark[s] == 1) return false;
    if (mark[s] == 2) return true;
    mark[s] = 1;
    if (!p.states[s].terminal)
      for (const auto& row : p.transitions[s])
        for (int t = 0; t < p.num_states(); ++t)
          if (row[t] != 0 && !dfs(t)) return false;
    mark[s] = 2;
    return true;
  };
  for (int s = 0; s < p.num_states(); ++s)
    if (!dfs(s)) return false;
  return true;
}

// Derivative of EU along e_a - pi: central difference with step h, forward
// or backward when one side would leave the simplex.
inline double fd_directional(const DecisionProblem& p, const Vec& pi, int a, double h = 1e-5) {
  const Vec d = selfloc::toward_vertex(pi, a);
  auto inside = [&](double t) {
    for (size_t b = 0; b < pi.size(); ++b)
      if (pi[b] + t * d[b] < 0) return false;
    return true;
  };
  auto f = [&](double t) { return selfloc::ex_ante_eu(p, selfloc::axpy(t, d, pi)); };
  const bool fwd = inside(h), bwd = inside(-h);
  if (fwd && bwd) return (f(h) - f(-h)) / (2 * h);
  if (fwd) return (-3 * f(0) + 4 * f(h) - f(2 * h)) / (2 * h);
  if (bwd) return (3 * f(0) - 4 * f(-h) + f(-2 * h)) / (2 * h);
  return 0;  // pi is a vertex and d = 0
}

// E[g(A_1..A_N)] by walking every tuple.
inline Vec tuple_expectation(const selfloc::SimulationFunction& g, const Vec& pi) {
  Vec r(g.num_actions(), 0.0);
  selfloc::for_each_tuple(g.sample_count(), g.num_actions(), [&](const std::vector<int>& t) {
    double w = 1;
    for (int a : t) w *= pi[a];
    const Vec& v = g(t);
    for (size_t i = 0; i < r.size(); ++i) r[i] += w * v[i];
  });
  return r;
}

// Empirical frequency of the dependant's action when it draws N samples
// from pi and then an action from g.
inline Vec sampled_frequency(const selfloc::SimulationFunction& g, const Vec& pi, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Vec freq(g.num_actions(), 0.0);
  std::vector<int> t(g.sample_count());
  for (int i = 0; i < trials; ++i) {
    for (int& x : t) x = selfloc::sample_index(pi, u(rng));
    ++freq[selfloc::sample_index(g(t), u(rng))];
  }
  for (double& x : freq) x /= trials;
  return freq;
}

inline std::vector<Vec> random_policies(int k, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) out.push_back(selfloc::random_policy(k, rng).probs());
  return out;
}

inline bool differentiable(const DecisionProblem& p) {
  for (const auto& F : p.dependence)
    if (!F.differentiable()) return false;
  return true;
}

}  // namespace oracle
