#pragma once

#include <cmath>
#include <vector>

namespace selfloc {

using Counts = std::vector<int>;

// C(n + k - 1, k - 1) as a double, for cap checks.
inline double composition_count(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k - 1; ++i) r = r * (n + i) / i;
  return r;
}

// Calls f(counts) for every counts in N^k with sum n, in lexicographic order.
template <class F>
void for_each_composition(int n, int k, F&& f) {
  Counts c(k, 0);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == k - 1) {
      c[i] = left;
      f(static_cast<const Counts&>(c));
      return;
    }
    for (int x = 0; x <= left; ++x) {
      c[i] = x;
      self(self, i + 1, left - x);
    }
  };
  rec(rec, 0, n);
}

inline std::vector<Counts> compositions(int n, int k) {
  std::vector<Counts> out;
  for_each_composition(n, k, [&](const Counts& c) { out.push_back(c); });
  return out;
}

// Calls f(tuple) for every tuple in {0..k-1}^n, last slot varying fastest.
template <class F>
void for_each_tuple(int n, int k, F&& f) {
  std::vector<int> t(n, 0);
  while (true) {
    f(static_cast<const std::vector<int>&>(t));
    int i = n - 1;
    while (i >= 0 && ++t[i] == k) t[i--] = 0;
    if (i < 0) return;
  }
}

inline Counts tuple_counts(const std::vector<int>& tuple, int k) {
  Counts c(k, 0);
  for (int a : tuple) ++c[a];
  return c;
}

inline int total(const Counts& c) {
  int s = 0;
  for (int x : c) s += x;
  return s;
}

// n! / prod(c_i!)
inline double multinomial(const Counts& c) {
  double r = 1;
  int m = 0;
  for (int ci : c)
    for (int i = 1; i <= ci; ++i) {
      ++m;
      r = r * m / i;
    }
  return r;
}

inline double monomial(const std::vector<double>& x, const Counts& e) {
  double r = 1;
  for (size_t a = 0; a < e.size(); ++a)
    if (e[a]) r *= std::pow(x[a], e[a]);
  return r;
}

}  // namespace selfloc
