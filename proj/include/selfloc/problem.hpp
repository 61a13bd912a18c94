#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "selfloc/dependence.hpp"
#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"

namespace selfloc {

struct StateRecord {
  std::string id;
  bool terminal = false;
  std::optional<double> utility;  // terminals
  int dependant = -1;             // non-terminals, 0-based
};

// Finite absorbing process. Transition rows and the initial distribution are
// dense over all states; rows of terminal states are empty.
struct DecisionProblem {
  std::vector<std::string> actions;
  std::vector<StateRecord> states;
  Vec initial;
  std::vector<std::vector<Vec>> transitions;  // [state][action][successor]
  std::vector<DependenceFunction> dependence;

  int num_actions() const { return static_cast<int>(actions.size()); }
  int num_states() const { return static_cast<int>(states.size()); }
  int num_dependants() const { return static_cast<int>(dependence.size()); }

  int state_index(const std::string& id) const {
    for (int i = 0; i < num_states(); ++i)
      if (states[i].id == id) return i;
    throw InputError("unknown state '" + id + "'");
  }
  int action_index(const std::string& label) const {
    for (int a = 0; a < num_actions(); ++a)
      if (actions[a] == label) return a;
    throw InputError("unknown action '" + label + "'");
  }

  std::vector<int> nonterminals() const {
    std::vector<int> r;
    for (int i = 0; i < num_states(); ++i)
      if (!states[i].terminal) r.push_back(i);
    return r;
  }
  std::vector<int> terminals() const {
    std::vector<int> r;
    for (int i = 0; i < num_states(); ++i)
      if (states[i].terminal) r.push_back(i);
    return r;
  }

  double utility_min() const {
    double m = INFINITY;
    for (const auto& s : states)
      if (s.terminal && s.utility) m = std::min(m, *s.utility);
    return m;
  }
  double utility_max() const {
    double m = -INFINITY;
    for (const auto& s : states)
      if (s.terminal && s.utility) m = std::max(m, *s.utility);
    return m;
  }
  double utility_range() const {
    const double r = utility_max() - utility_min();
    return r > 0 ? r : 1.0;
  }

  // Successor distribution at s when the acting dependant plays the (possibly
  // signed) action mixture w. T is linear in its policy argument.
  Vec step(int s, const Vec& w) const {
    Vec r(num_states(), 0.0);
    for (int a = 0; a < num_actions(); ++a) {
      if (w[a] == 0) continue;
      const Vec& row = transitions[s][a];
      for (int t = 0; t < num_states(); ++t) r[t] += w[a] * row[t];
    }
    return r;
  }
};

using JointPolicy = std::vector<Policy>;

// Incremental construction by state id and action label.
class ProblemBuilder {
 public:
  explicit ProblemBuilder(std::vector<std::string> actions) { p_.actions = std::move(actions); }

  ProblemBuilder& state(const std::string& id, int dependant) {
    p_.states.push_back({id, false, std::nullopt, dependant});
    return *this;
  }
  ProblemBuilder& terminal(const std::string& id, double utility) {
    p_.states.push_back({id, true, utility, -1});
    return *this;
  }
  ProblemBuilder& initial(const std::string& id, double p) {
    init_[id] += p;
    return *this;
  }
  ProblemBuilder& edge(const std::string& from, const std::string& action, const std::string& to, double p = 1.0) {
    rows_[{from, action}][to] += p;
    return *this;
  }
  // Same successor for every action.
  ProblemBuilder& edge_all(const std::string& from, const std::string& to, double p = 1.0) {
    for (const auto& a : p_.actions) edge(from, a, to, p);
    return *this;
  }
  ProblemBuilder& dependant(DependenceFunction f) {
    p_.dependence.push_back(std::move(f));
    return *this;
  }

  DecisionProblem build() const {
    DecisionProblem p = p_;
    const int n = p.num_states();
    p.initial.assign(n, 0.0);
    for (const auto& [id, v] : init_) p.initial[p.state_index(id)] += v;
    p.transitions.assign(n, {});
    for (int s = 0; s < n; ++s)
      if (!p.states[s].terminal) p.transitions[s].assign(p.num_actions(), Vec(n, 0.0));
    for (const auto& [key, row] : rows_) {
      const int s = p.state_index(key.first);
      const int a = p.action_index(key.second);
      if (p.states[s].terminal) throw InputError("transition out of terminal state '" + key.first + "'");
      for (const auto& [to, v] : row) p.transitions[s][a][p.state_index(to)] += v;
    }
    return p;
  }

 private:
  DecisionProblem p_;
  std::map<std::string, double> init_;
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> rows_;
};

struct Diagnostic {
  std::string code;
  std::string location;
  std::string message;
};

inline constexpr double kProbTol = 1e-9;

inline std::vector<Diagnostic> validate(const DecisionProblem& p) {
  std::vector<Diagnostic> out;
  auto add = [&](std::string code, std::string loc, std::string msg) {
    out.push_back({std::move(code), std::move(loc), std::move(msg)});
  };
  const int k = p.num_actions();
  const int n = p.num_states();
  if (k == 0) add("no-actions", "actions", "problem has no actions");
  std::set<std::string> ids, labels;
  for (const auto& a : p.actions)
    if (!labels.insert(a).second) add("duplicate-action", a, "action label repeated");
  for (const auto& s : p.states)
    if (!ids.insert(s.id).second) add("duplicate-id", s.id, "state id repeated");
  bool any_nonterminal = false;
  for (const auto& s : p.states) {
    if (s.terminal) {
      if (!s.utility) add("missing-utility", s.id, "terminal state has no utility");
      else if (!std::isfinite(*s.utility)) add("bad-utility", s.id, "utility is not finite");
    } else {
      any_nonterminal = true;
      if (s.dependant < 0 || s.dependant >= p.num_dependants())
        add("dependant-range", s.id,
            "dependant index " + std::to_string(s.dependant + 1) + " outside 1.." + std::to_string(p.num_dependants()));
    }
  }
  if (!any_nonterminal) add("no-nonterminal", "states", "problem has no non-terminal state");
  for (int j = 0; j < p.num_dependants(); ++j)
    if (p.dependence[j].num_actions() != k)
      add("dependant-arity", "dependants[" + std::to_string(j + 1) + "]", "dependence function acts on a different number of actions");
  if (static_cast<int>(p.initial.size()) != n) {
    add("initial-size", "initial", "initial distribution has the wrong length");
  } else {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      if (p.initial[i] < 0) add("initial-negative", p.states[i].id, "negative initial probability");
      if (p.states[i].terminal && p.initial[i] != 0) add("initial-terminal", p.states[i].id, "initial mass on a terminal state");
      s += p.initial[i];
    }
    if (std::abs(s - 1) > kProbTol) add("initial-sum", "initial", "initial distribution sums to " + std::to_string(s));
  }
  if (static_cast<int>(p.transitions.size()) != n) {
    add("transitions-size", "transitions", "transition table has the wrong number of states");
    return out;
  }
  for (int i = 0; i < n; ++i) {
    const auto& st = p.states[i];
    if (st.terminal) {
      if (!p.transitions[i].empty()) add("terminal-row", st.id, "terminal state has outgoing transitions");
      continue;
    }
    if (static_cast<int>(p.transitions[i].size()) != k) {
      add("row-missing", st.id, "state lacks a transition row per action");
      continue;
    }
    for (int a = 0; a < k; ++a) {
      const std::string loc = st.id + "/" + p.actions[a];
      const Vec& row = p.transitions[i][a];
      if (static_cast<int>(row.size()) != n) {
        add("row-size", loc, "transition row has the wrong length");
        continue;
      }
      double s = 0;
      bool neg = false;
      for (double v : row) {
        neg |= v < 0 || !std::isfinite(v);
        s += v;
      }
      if (neg) add("row-negative", loc, "negative or non-finite transition probability");
      if (std::abs(s - 1) > kProbTol) add("row-sum", loc, "transition row sums to " + std::to_string(s));
    }
  }
  return out;
}

inline void require_valid(const DecisionProblem& p) {
  const auto d = validate(p);
  if (!d.empty()) throw InputError("invalid problem: " + d.front().code + " at " + d.front().location + ": " + d.front().message);
}

struct TerminationVerdict {
  bool terminates = true;
  std::vector<int> sigma;  // pure joint policy: one action per dependant
  std::vector<int> trap;   // closed class of non-terminal states
};

// Pure joint policies suffice as witnesses: a class closed under a mixed
// policy is closed under any selection of supported actions.
inline TerminationVerdict check_termination(const DecisionProblem& p, double cap = 1e6) {
  const int k = p.num_actions();
  const int n = p.num_dependants();
  const int S = p.num_states();
  const double count = std::pow(static_cast<double>(k), n);
  if (count > cap)
    throw CapExceeded("termination check: |A|^n = " + std::to_string(k) + "^" + std::to_string(n) + " exceeds the cap");
  TerminationVerdict v;
  std::vector<int> sigma(n, 0);
  std::vector<std::vector<int>> succ(S);
  while (true) {
    for (int s = 0; s < S; ++s) {
      succ[s].clear();
      if (p.states[s].terminal) continue;
      const Vec& row = p.transitions[s][sigma[p.states[s].dependant]];
      for (int t = 0; t < S; ++t)
        if (row[t] > 0) succ[s].push_back(t);
    }
    // States that can reach a terminal.
    std::vector<char> good(S, 0);
    for (int s = 0; s < S; ++s) good[s] = p.states[s].terminal;
    for (bool changed = true; changed;) {
      changed = false;
      for (int s = 0; s < S; ++s) {
        if (good[s]) continue;
        for (int t : succ[s])
          if (good[t]) {
            good[s] = 1;
            changed = true;
            break;
          }
      }
    }
    int bad = -1;
    for (int s = 0; s < S && bad < 0; ++s)
      if (!good[s]) bad = s;
    if (bad >= 0) {
      auto reach = [&](int from) {
        std::vector<char> seen(S, 0);
        std::vector<int> stack{from};
        seen[from] = 1;
        while (!stack.empty()) {
          const int x = stack.back();
          stack.pop_back();
          for (int t : succ[x])
            if (!seen[t]) {
              seen[t] = 1;
              stack.push_back(t);
            }
        }
        return seen;
      };
      // Walk down to a bottom class.
      std::vector<char> r = reach(bad);
      for (bool moved = true; moved;) {
        moved = false;
        for (int t = 0; t < S; ++t) {
          if (!r[t]) continue;
          std::vector<char> rt = reach(t);
          if (!rt[bad]) {
            bad = t;
            r = std::move(rt);
            moved = true;
            break;
          }
        }
      }
      v.terminates = false;
      v.sigma = sigma;
      for (int t = 0; t < S; ++t)
        if (r[t]) v.trap.push_back(t);
      return v;
    }
    int j = n - 1;
    while (j >= 0 && ++sigma[j] == k) sigma[j--] = 0;
    if (j < 0) break;
  }
  return v;
}

}  // namespace selfloc
