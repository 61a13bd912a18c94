#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "selfloc/combinatorics.hpp"
#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"

namespace selfloc {

// Vector-valued polynomial in the action probabilities: exponent multi-index
// to coefficient vector (one entry per output action).
class PolynomialMap {
 public:
  PolynomialMap() = default;
  explicit PolynomialMap(int num_actions) : k_(num_actions) {}

  int num_actions() const { return k_; }
  const std::map<Counts, Vec>& terms() const { return terms_; }

  void add(const Counts& e, const Vec& c) {
    if (static_cast<int>(e.size()) != k_ || static_cast<int>(c.size()) != k_)
      throw InputError("polynomial term has wrong arity");
    for (int x : e)
      if (x < 0) throw InputError("negative exponent in polynomial term");
    auto [it, fresh] = terms_.try_emplace(e, Vec(k_, 0.0));
    for (int i = 0; i < k_; ++i) it->second[i] += c[i];
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total(e));
    return d;
  }

  bool homogeneous() const {
    const int d = degree();
    return std::all_of(terms_.begin(), terms_.end(), [&](const auto& t) { return total(t.first) == d; });
  }

  Vec eval(const Vec& x) const {
    Vec r(k_, 0.0);
    for (const auto& [e, c] : terms_) {
      const double m = monomial(x, e);
      for (int i = 0; i < k_; ++i) r[i] += c[i] * m;
    }
    return r;
  }

  // Partial derivative with respect to x_b in the ambient coordinates.
  Vec partial(const Vec& x, int b) const {
    Vec r(k_, 0.0);
    for (const auto& [e, c] : terms_) {
      if (e[b] == 0) continue;
      Counts f = e;
      --f[b];
      const double m = e[b] * monomial(x, f);
      for (int i = 0; i < k_; ++i) r[i] += c[i] * m;
    }
    return r;
  }

  double min_coefficient() const {
    double m = 0;
    bool first = true;
    for (const auto& [e, c] : terms_)
      for (double v : c) {
        m = first ? v : std::min(m, v);
        first = false;
      }
    return m;
  }

  static PolynomialMap identity(int k) {
    PolynomialMap p(k);
    for (int a = 0; a < k; ++a) {
      Counts e(k, 0);
      e[a] = 1;
      Vec c(k, 0.0);
      c[a] = 1;
      p.add(e, c);
    }
    return p;
  }

  // Degree-1 map sending vertex a to columns[a].
  static PolynomialMap linear(const std::vector<Vec>& columns) {
    const int k = static_cast<int>(columns.size());
    PolynomialMap p(k);
    for (int a = 0; a < k; ++a) {
      Counts e(k, 0);
      e[a] = 1;
      p.add(e, columns[a]);
    }
    return p;
  }

  static PolynomialMap constant(const Vec& c) {
    PolynomialMap p(static_cast<int>(c.size()));
    p.add(Counts(c.size(), 0), c);
    return p;
  }

 private:
  int k_ = 0;
  std::map<Counts, Vec> terms_;
};

// Multiply every term of degree d < N by (sum_a x_a)^(N - d).
inline PolynomialMap homogenize(const PolynomialMap& poly, int N) {
  if (N < poly.degree())
    throw InputError("homogenize: degree " + std::to_string(N) + " below polynomial degree " +
                     std::to_string(poly.degree()));
  const int k = poly.num_actions();
  PolynomialMap out(k);
  for (const auto& [e, c] : poly.terms()) {
    const int lift = N - total(e);
    for_each_composition(lift, k, [&](const Counts& m) {
      const double w = multinomial(m);
      Counts f(k);
      for (int a = 0; a < k; ++a) f[a] = e[a] + m[a];
      Vec cc(c);
      for (double& v : cc) v *= w;
      out.add(f, cc);
    });
  }
  return out;
}

// Homogeneous polynomial held as scaled coefficients b_n = c_n / multinomial(d; n).
// Raising the degree by one is then a convex combination, which keeps the
// iteration in nonneg_rewrite numerically tame at high degree.
struct ScaledHomogeneous {
  int k = 0;
  int degree = 0;
  std::map<Counts, Vec> b;

  static ScaledHomogeneous from(const PolynomialMap& hom) {
    ScaledHomogeneous s;
    s.k = hom.num_actions();
    s.degree = hom.degree();
    for_each_composition(s.degree, s.k, [&](const Counts& n) { s.b[n] = Vec(s.k, 0.0); });
    for (const auto& [e, c] : hom.terms()) {
      const double m = multinomial(e);
      Vec& t = s.b[e];
      for (int i = 0; i < s.k; ++i) t[i] = c[i] / m;
    }
    return s;
  }

  ScaledHomogeneous raised() const {
    ScaledHomogeneous r;
    r.k = k;
    r.degree = degree + 1;
    for_each_composition(r.degree, k, [&](const Counts& n) {
      Vec v(k, 0.0);
      for (int a = 0; a < k; ++a) {
        if (n[a] == 0) continue;
        Counts m = n;
        --m[a];
        const double w = static_cast<double>(n[a]) / r.degree;
        const Vec& src = b.at(m);
        for (int i = 0; i < k; ++i) v[i] += w * src[i];
      }
      r.b[n] = std::move(v);
    });
    return r;
  }

  double min_entry() const {
    double m = 0;
    for (const auto& [n, v] : b)
      for (double x : v) m = std::min(m, x);
    return m;
  }

  PolynomialMap to_poly(bool clamp) const {
    PolynomialMap p(k);
    for (const auto& [n, v] : b) {
      const double m = multinomial(n);
      Vec c(v);
      for (double& x : c) x = (clamp ? std::max(0.0, x) : x) * m;
      if (std::any_of(c.begin(), c.end(), [](double x) { return x != 0.0; })) p.add(n, c);
    }
    return p;
  }
};

inline constexpr double kNonnegClampTol = 1e-12;

inline int default_nonneg_cap(int degree) { return std::max(3 * degree, 60); }

struct NonnegResult {
  bool ok = false;
  int degree = 0;            // degree of the representation found, or last tried
  double min_scaled = 0;     // most negative scaled coefficient at that degree
  PolynomialMap poly;
};

// Raise the degree until every coefficient is nonnegative, up to max_degree.
// Coefficients are compared on the scale c_n / multinomial(d; n), which is the
// sampler value the coefficient becomes; entries within -1e-12 are clamped.
inline NonnegResult nonneg_rewrite(const PolynomialMap& poly, int max_degree = -1) {
  const int d0 = std::max(poly.degree(), 0);
  if (max_degree < 0) max_degree = default_nonneg_cap(d0);
  NonnegResult res;
  if (max_degree < d0) {
    res.degree = d0;
    return res;
  }
  ScaledHomogeneous s = ScaledHomogeneous::from(homogenize(poly, d0));
  while (true) {
    res.degree = s.degree;
    res.min_scaled = s.min_entry();
    if (res.min_scaled >= -kNonnegClampTol) {
      res.ok = true;
      res.poly = s.to_poly(true);
      return res;
    }
    if (s.degree >= max_degree) return res;
    s = s.raised();
  }
}

}  // namespace selfloc
