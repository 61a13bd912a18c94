#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "selfloc/combinatorics.hpp"
#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"
#include "selfloc/polynomial.hpp"

namespace selfloc {

inline constexpr double kEnumerationCap = 1e6;

// g : A^N -> Delta(A). Symmetric tables are keyed by action counts, the others
// by the full sample tuple.
class SimulationFunction {
 public:
  SimulationFunction() = default;

  static SimulationFunction symmetric(int num_actions, int N, std::map<Counts, Vec> by_counts) {
    SimulationFunction g(num_actions, N, true);
    if (composition_count(N, num_actions) > kEnumerationCap)
      throw CapExceeded("sampler table too large");
    for_each_composition(N, num_actions, [&](const Counts& c) {
      auto it = by_counts.find(c);
      if (it == by_counts.end()) throw InputError("symmetric sampler table is missing an entry");
      g.table_[c] = Policy::from(it->second).probs();
    });
    if (by_counts.size() != g.table_.size()) throw InputError("symmetric sampler table has stray entries");
    return g;
  }

  static SimulationFunction tabulate(int num_actions, int N, const std::function<Vec(const std::vector<int>&)>& f) {
    SimulationFunction g(num_actions, N, false);
    if (std::pow(static_cast<double>(num_actions), N) > kEnumerationCap)
      throw CapExceeded("sampler table too large");
    for_each_tuple(N, num_actions, [&](const std::vector<int>& t) { g.table_[t] = Policy::from(f(t)).probs(); });
    return g;
  }

  static SimulationFunction symmetric_from(int num_actions, int N, const std::function<Vec(const Counts&)>& f) {
    std::map<Counts, Vec> m;
    if (composition_count(N, num_actions) > kEnumerationCap)
      throw CapExceeded("sampler table too large: " + std::to_string(composition_count(N, num_actions)) + " entries");
    for_each_composition(N, num_actions, [&](const Counts& c) { m[c] = f(c); });
    return symmetric(num_actions, N, std::move(m));
  }

  int num_actions() const { return k_; }
  int sample_count() const { return n_; }
  bool is_symmetric() const { return symmetric_; }
  const std::map<std::vector<int>, Vec>& table() const { return table_; }

  const Vec& operator()(const std::vector<int>& tuple) const {
    return symmetric_ ? table_.at(tuple_counts(tuple, k_)) : table_.at(tuple);
  }
  const Vec& at_counts(const Counts& c) const { return table_.at(c); }

  // E[g(A_1..A_N)] with A_k iid pi.
  Vec expectation(const Vec& pi) const {
    Vec r(k_, 0.0);
    if (symmetric_) {
      for (const auto& [c, v] : table_) {
        const double w = multinomial(c) * monomial(pi, c);
        if (w == 0) continue;
        for (int i = 0; i < k_; ++i) r[i] += w * v[i];
      }
    } else {
      for (const auto& [t, v] : table_) {
        double w = 1;
        for (int a : t) w *= pi[a];
        if (w == 0) continue;
        for (int i = 0; i < k_; ++i) r[i] += w * v[i];
      }
    }
    return r;
  }

  // (1/N) sum_k E[g | A_k = a, other slots iid pi].
  Vec slot_conditional(const Vec& pi, int a) const {
    Vec r(k_, 0.0);
    if (n_ == 0) return expectation(pi);
    if (symmetric_) {
      for_each_composition(n_ - 1, k_, [&](const Counts& m) {
        const double w = multinomial(m) * monomial(pi, m);
        if (w == 0) return;
        Counts c = m;
        ++c[a];
        const Vec& v = table_.at(c);
        for (int i = 0; i < k_; ++i) r[i] += w * v[i];
      });
      return r;
    }
    for (const auto& [t, v] : table_) {
      for (int slot = 0; slot < n_; ++slot) {
        if (t[slot] != a) continue;
        double w = 1;
        for (int s = 0; s < n_; ++s)
          if (s != slot) w *= pi[t[s]];
        if (w == 0) continue;
        for (int i = 0; i < k_; ++i) r[i] += w * v[i] / n_;
      }
    }
    return r;
  }

  // Directional derivative of the expectation along (a - pi):
  // N * (slot_conditional(a) - expectation).
  PolicyDelta delta(const Vec& pi, int a) const {
    const Vec t = slot_conditional(pi, a);
    const Vec f = expectation(pi);
    PolicyDelta d(k_);
    for (int i = 0; i < k_; ++i) d[i] = n_ * (t[i] - f[i]);
    return d;
  }

 private:
  SimulationFunction(int k, int n, bool sym) : k_(k), n_(n), symmetric_(sym) {
    if (k < 1 || n < 0) throw InputError("bad sampler shape");
  }

  int k_ = 0;
  int n_ = 0;
  bool symmetric_ = true;
  std::map<std::vector<int>, Vec> table_;
};

// Same expectation with one extra sample that g never looks at (slot 0).
inline SimulationFunction with_ignored_sample(const SimulationFunction& g) {
  return SimulationFunction::tabulate(g.num_actions(), g.sample_count() + 1, [&](const std::vector<int>& t) {
    return g(std::vector<int>(t.begin() + 1, t.end()));
  });
}

// Homogeneous nonnegative polynomial of degree N -> symmetric sampler with
// g(n) = c_n / multinomial(N; n).
inline SimulationFunction to_sampler(const PolynomialMap& poly) {
  if (!poly.homogeneous()) throw InputError("to_sampler: polynomial is not homogeneous");
  if (poly.min_coefficient() < 0) throw InputError("to_sampler: polynomial has negative coefficients");
  const int k = poly.num_actions();
  const int N = poly.degree();
  std::map<Counts, Vec> table;
  for_each_composition(N, k, [&](const Counts& n) {
    const double m = multinomial(n);
    auto it = poly.terms().find(n);
    Vec c = it == poly.terms().end() ? Vec(k, 0.0) : it->second;
    if (std::abs(sum(c) - m) > 1e-9 * m)
      throw RangeViolation("to_sampler: not a simplex map (coefficient sum " + std::to_string(sum(c)) +
                           " vs multinomial " + std::to_string(m) + ")");
    for (double& x : c) x /= m;
    table[n] = c;
  });
  return SimulationFunction::symmetric(k, N, std::move(table));
}

inline PolynomialMap from_sampler(const SimulationFunction& g) {
  const int k = g.num_actions();
  PolynomialMap p(k);
  if (g.is_symmetric()) {
    for (const auto& [c, v] : g.table()) {
      Vec cc(v);
      const double m = multinomial(c);
      for (double& x : cc) x *= m;
      p.add(c, cc);
    }
  } else {
    for (const auto& [t, v] : g.table()) p.add(tuple_counts(t, k), v);
  }
  return p;
}

}  // namespace selfloc
