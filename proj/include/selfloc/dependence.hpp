#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "selfloc/combinatorics.hpp"
#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"
#include "selfloc/polynomial.hpp"
#include "selfloc/simulation.hpp"

namespace selfloc {

inline constexpr int kRangeCheckResolution = 20;
inline constexpr double kBlackBoxStep = 1e-6;

struct IdentityDep {};
struct ConstantDep {
  Vec policy;
};
struct LinearDep {
  std::vector<Vec> columns;  // columns[a] = F(vertex a)
};
struct PolynomialDep {
  PolynomialMap poly;
};
struct SamplerDep {
  SimulationFunction g;
};
struct BlackBoxDep {
  std::string name;                               // builtin name; empty for ad hoc closures
  std::map<std::string, double> params;           // builtin parameters
  std::function<Vec(const Vec&)> eval;
  std::function<Vec(const Vec&, int)> derivative;  // analytic delta, optional
  bool differentiable = true;
};

class DependenceFunction {
 public:
  using Variant = std::variant<IdentityDep, ConstantDep, LinearDep, PolynomialDep, SamplerDep, BlackBoxDep>;

  DependenceFunction() = default;

  static DependenceFunction identity(int k) { return DependenceFunction(k, IdentityDep{}); }
  static DependenceFunction constant(const Vec& c) {
    return checked(static_cast<int>(c.size()), ConstantDep{Policy::from(c).probs()});
  }
  static DependenceFunction linear(const std::vector<Vec>& columns) {
    std::vector<Vec> cols;
    for (const Vec& c : columns) {
      if (c.size() != columns.size()) throw InputError("linear dependence needs |A| columns of length |A|");
      cols.push_back(Policy::from(c).probs());
    }
    return checked(static_cast<int>(columns.size()), LinearDep{cols});
  }
  static DependenceFunction polynomial(PolynomialMap p) {
    const int k = p.num_actions();
    return checked(k, PolynomialDep{std::move(p)});
  }
  static DependenceFunction sampler(SimulationFunction g) {
    const int k = g.num_actions();
    return DependenceFunction(k, SamplerDep{std::move(g)});
  }
  static DependenceFunction black_box(int k, std::string name, std::function<Vec(const Vec&)> f,
                                      std::function<Vec(const Vec&, int)> derivative, bool differentiable,
                                      std::map<std::string, double> params = {}) {
    return checked(k, BlackBoxDep{std::move(name), std::move(params), std::move(f), std::move(derivative),
                                  differentiable});
  }

  int num_actions() const { return k_; }
  const Variant& variant() const { return v_; }

  std::string kind() const {
    static const char* names[] = {"identity", "constant", "linear", "poly", "sampler", "builtin"};
    return names[v_.index()];
  }

  bool differentiable() const {
    if (auto* b = std::get_if<BlackBoxDep>(&v_)) return b->differentiable;
    return true;
  }

  bool is_identity() const {
    if (std::holds_alternative<IdentityDep>(v_)) return true;
    if (auto* l = std::get_if<LinearDep>(&v_)) {
      for (int a = 0; a < k_; ++a)
        for (int b = 0; b < k_; ++b)
          if (l->columns[a][b] != (a == b ? 1.0 : 0.0)) return false;
      return true;
    }
    return false;
  }

  bool is_constant() const { return std::holds_alternative<ConstantDep>(v_); }

  // Unnormalized value.
  Vec raw(const Vec& pi) const {
    return std::visit(
        [&](const auto& d) -> Vec {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, IdentityDep>) return pi;
          else if constexpr (std::is_same_v<T, ConstantDep>) return d.policy;
          else if constexpr (std::is_same_v<T, LinearDep>) {
            Vec r(k_, 0.0);
            for (int a = 0; a < k_; ++a)
              for (int i = 0; i < k_; ++i) r[i] += pi[a] * d.columns[a][i];
            return r;
          } else if constexpr (std::is_same_v<T, PolynomialDep>) return d.poly.eval(pi);
          else if constexpr (std::is_same_v<T, SamplerDep>) return d.g.expectation(pi);
          else return d.eval(pi);
        },
        v_);
  }

  Policy eval(const Vec& pi) const {
    Vec r = raw(pi);
    if (!near_simplex(r)) throw RangeViolation("dependence function (" + kind() + ") left the simplex at " + format_vec(pi));
    return Policy::from(r);
  }

  // Directional derivative of F along (a - pi).
  PolicyDelta delta(const Vec& pi, int a) const {
    return std::visit(
        [&](const auto& d) -> PolicyDelta {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, IdentityDep>) return toward_vertex(pi, a);
          else if constexpr (std::is_same_v<T, ConstantDep>) return PolicyDelta(k_, 0.0);
          else if constexpr (std::is_same_v<T, LinearDep>) {
            const Vec f = raw(pi);
            PolicyDelta r(k_);
            for (int i = 0; i < k_; ++i) r[i] = d.columns[a][i] - f[i];
            return r;
          } else if constexpr (std::is_same_v<T, PolynomialDep>) {
            PolicyDelta r = d.poly.partial(pi, a);
            for (int b = 0; b < k_; ++b) {
              if (pi[b] == 0) continue;
              const Vec pb = d.poly.partial(pi, b);
              for (int i = 0; i < k_; ++i) r[i] -= pi[b] * pb[i];
            }
            return r;
          } else if constexpr (std::is_same_v<T, SamplerDep>) return d.g.delta(pi, a);
          else {
            if (!d.differentiable)
              throw DerivativeUnavailable("derivative unavailable: dependence '" + d.name + "' is not differentiable");
            if (d.derivative) return d.derivative(pi, a);
            return finite_difference(pi, a);
          }
        },
        v_);
  }

  // Exact polynomial form, when the variant has one.
  std::optional<PolynomialMap> as_polynomial() const {
    return std::visit(
        [&](const auto& d) -> std::optional<PolynomialMap> {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, IdentityDep>) return PolynomialMap::identity(k_);
          else if constexpr (std::is_same_v<T, ConstantDep>) return PolynomialMap::constant(d.policy);
          else if constexpr (std::is_same_v<T, LinearDep>) return PolynomialMap::linear(d.columns);
          else if constexpr (std::is_same_v<T, PolynomialDep>) return d.poly;
          else if constexpr (std::is_same_v<T, SamplerDep>) return from_sampler(d.g);
          else return std::nullopt;
        },
        v_);
  }

  const SimulationFunction* sampler_ptr() const {
    auto* s = std::get_if<SamplerDep>(&v_);
    return s ? &s->g : nullptr;
  }
  const BlackBoxDep* black_box_ptr() const { return std::get_if<BlackBoxDep>(&v_); }

 private:
  DependenceFunction(int k, Variant v) : k_(k), v_(std::move(v)) {
    if (k < 1) throw InputError("dependence function needs at least one action");
  }

  static DependenceFunction checked(int k, Variant v) {
    DependenceFunction f(k, std::move(v));
    for (const Vec& p : simplex_grid(k, kRangeCheckResolution)) {
      const Vec r = f.raw(p);
      if (static_cast<int>(r.size()) != k || !near_simplex(r))
        throw RangeViolation("dependence function (" + f.kind() + ") maps " + format_vec(p) + " outside the simplex");
    }
    return f;
  }

  PolicyDelta finite_difference(const Vec& pi, int a) const {
    const Vec d = toward_vertex(pi, a);
    const double h = kBlackBoxStep;
    const Vec fp = raw(axpy(h, d, pi));
    const Vec back = axpy(-h, d, pi);
    PolicyDelta r(k_);
    if (near_simplex(back, 0.0)) {
      const Vec fm = raw(back);
      for (int i = 0; i < k_; ++i) r[i] = (fp[i] - fm[i]) / (2 * h);
    } else {
      const Vec f0 = raw(pi);
      for (int i = 0; i < k_; ++i) r[i] = (fp[i] - f0[i]) / h;
    }
    return r;
  }

  int k_ = 0;
  Variant v_;
};

inline Policy eval(const DependenceFunction& F, const Vec& pi) { return F.eval(pi); }
inline PolicyDelta delta(const DependenceFunction& F, int a, const Vec& pi) { return F.delta(pi, a); }

// Largest componentwise gap between two dependence functions on the grid.
inline double grid_distance(const DependenceFunction& F, const DependenceFunction& G, int resolution) {
  double m = 0;
  for (const Vec& p : simplex_grid(F.num_actions(), resolution)) m = std::max(m, max_abs_diff(F.raw(p), G.raw(p)));
  return m;
}

// ---- builtins -------------------------------------------------------------

namespace builtin {

inline int other(int a) { return a == 0 ? 1 : 0; }

// Two actions; F(pi)_0 = sqrt(0.1 + 0.8 pi_0).
inline DependenceFunction sqrt_theodora() {
  auto f = [](const Vec& pi) {
    const double s = std::sqrt(0.1 + 0.8 * pi[0]);
    return Vec{s, 1 - s};
  };
  auto d = [](const Vec& pi, int a) {
    const double slope = 0.4 / std::sqrt(0.1 + 0.8 * pi[0]);
    const double dp = (a == 0 ? 1.0 : 0.0) - pi[0];
    return PolicyDelta{slope * dp, -slope * dp};
  };
  return DependenceFunction::black_box(2, "sqrt_theodora", f, d, true);
}

// Two actions; with p = pi_action, F(pi)_action = 16p^4 / (1 + 16p^4).
inline DependenceFunction quartic_logistic(int action = 1) {
  auto f = [action](const Vec& pi) {
    const double p4 = std::pow(pi[action], 4);
    const double v = 16 * p4 / (1 + 16 * p4);
    Vec r(2);
    r[action] = v;
    r[other(action)] = 1 - v;
    return r;
  };
  auto d = [action](const Vec& pi, int a) {
    const double p = pi[action];
    const double den = 1 + 16 * std::pow(p, 4);
    const double slope = 64 * p * p * p / (den * den);
    const double dp = (a == action ? 1.0 : 0.0) - p;
    PolicyDelta r(2);
    r[action] = slope * dp;
    r[other(action)] = -slope * dp;
    return r;
  };
  return DependenceFunction::black_box(2, "quartic_logistic", f, d, true, {{"action", action}});
}

// Vertex `action` whenever pi_action > 0, vertex `otherwise` else.
inline DependenceFunction positive_indicator(int k, int action, int otherwise) {
  if (action < 0 || action >= k || otherwise < 0 || otherwise >= k) throw InputError("positive_indicator: bad action");
  auto f = [k, action, otherwise](const Vec& pi) {
    Vec r(k, 0.0);
    r[pi[action] > 0 ? action : otherwise] = 1;
    return r;
  };
  return DependenceFunction::black_box(k, "positive_indicator", f, nullptr, false,
                                       {{"action", action}, {"otherwise", otherwise}});
}

// Two actions; F(pi)_action = floor(n pi_action) / n.
inline DependenceFunction staircase(int n, int action = 1) {
  if (n < 1) throw InputError("staircase needs n >= 1");
  auto f = [n, action](const Vec& pi) {
    // Guard against 0.6 * 5 = 3.0000000000000004 style noise.
    const double v = std::floor(n * pi[action] + 1e-12) / n;
    Vec r(2);
    r[action] = v;
    r[other(action)] = 1 - v;
    return r;
  };
  return DependenceFunction::black_box(2, "staircase", f, nullptr, false, {{"n", n}, {"action", action}});
}

inline DependenceFunction make(const std::string& name, const std::map<std::string, double>& params, int k) {
  auto param = [&](const std::string& key, double dflt) {
    auto it = params.find(key);
    return it == params.end() ? dflt : it->second;
  };
  auto need_two = [&] {
    if (k != 2) throw InputError("builtin '" + name + "' needs exactly two actions");
  };
  if (name == "sqrt_theodora") {
    need_two();
    return sqrt_theodora();
  }
  if (name == "quartic_logistic") {
    need_two();
    return quartic_logistic(static_cast<int>(param("action", 1)));
  }
  if (name == "positive_indicator")
    return positive_indicator(k, static_cast<int>(param("action", 1)), static_cast<int>(param("otherwise", 0)));
  if (name == "staircase") {
    need_two();
    return staircase(static_cast<int>(param("n", 5)), static_cast<int>(param("action", 1)));
  }
  throw InputError("unknown builtin dependence '" + name + "'");
}

}  // namespace builtin

// ---- sampleability --------------------------------------------------------

struct SampleabilityVerdict {
  bool yes = false;
  std::string reason;
  std::optional<SimulationFunction> g;
  int degree_needed = -1;     // smallest nonnegative representation found up to the cap, -1 if none
  bool zero_free = true;      // grid pre-check for |A| > 2
};

namespace detail {

// Univariate coefficients (power basis in p = x_0) of component i of a
// two-action polynomial, after substituting x_1 = 1 - p.
inline Vec univariate(const PolynomialMap& poly, int i) {
  Vec u(poly.degree() + 1, 0.0);
  for (const auto& [e, c] : poly.terms()) {
    // p^e0 (1-p)^e1
    double binom = 1;
    for (int j = 0; j <= e[1]; ++j) {
      u[e[0] + j] += c[i] * binom * ((j % 2) ? -1.0 : 1.0);
      binom = binom * (e[1] - j) / (j + 1);
    }
  }
  return u;
}

inline double horner(const Vec& u, double p) {
  double r = 0;
  for (size_t j = u.size(); j-- > 0;) r = r * p + u[j];
  return r;
}

// Divide by (1 - p) assuming u(1) == 0; the sign of u on (0, 1) is kept.
inline Vec deflate_at_one(const Vec& u) {
  Vec q(u.size() - 1, 0.0);
  double carry = 0;
  for (size_t j = u.size(); j-- > 1;) {
    carry = u[j] + carry;
    q[j - 1] = -carry;
  }
  return q;
}

}  // namespace detail

inline SampleabilityVerdict is_sampleable(const DependenceFunction& F, int N) {
  SampleabilityVerdict v;
  if (const SimulationFunction* g = F.sampler_ptr(); g && g->sample_count() <= N) {
    v.yes = true;
    v.g = *g;
    v.degree_needed = g->sample_count();
    v.reason = "already a sampler";
    return v;
  }
  const std::optional<PolynomialMap> poly = F.as_polynomial();
  if (!poly) {
    v.reason = "not polynomial";
    return v;
  }
  const int k = poly->num_actions();
  if (k == 2) {
    for (int i = 0; i < 2; ++i) {
      Vec u = detail::univariate(*poly, i);
      double scale = 0;
      for (double c : u) scale = std::max(scale, std::abs(c));
      if (scale <= 1e-12) continue;  // identically zero component
      const double eps = 1e-12 * scale;
      while (u.size() > 1 && std::abs(u.back()) <= eps) u.pop_back();
      size_t l = 0;
      while (l + 1 < u.size() && std::abs(u[l]) <= eps) ++l;
      u.erase(u.begin(), u.begin() + static_cast<long>(l));
      while (u.size() > 1 && std::abs(detail::horner(u, 1.0)) <= eps) u = detail::deflate_at_one(u);
      double lo = detail::horner(u, 0.0);
      for (int s = 1; s <= 1000; ++s) lo = std::min(lo, detail::horner(u, s / 1000.0));
      if (lo <= eps) {
        v.reason = "component " + std::to_string(i) + " vanishes inside the edge without being identically zero";
        return v;
      }
    }
  } else {
    for (const Vec& p : simplex_grid(k, kRangeCheckResolution)) {
      if (std::any_of(p.begin(), p.end(), [](double x) { return x == 0; })) continue;
      const Vec r = poly->eval(p);
      for (int i = 0; i < k; ++i) {
        bool identically_zero = true;
        for (const auto& [e, c] : poly->terms()) identically_zero &= (c[i] == 0);
        if (!identically_zero && r[i] <= 1e-12) v.zero_free = false;
      }
    }
    if (!v.zero_free) {
      v.reason = "a component vanishes inside the simplex";
      return v;
    }
  }
  const NonnegResult within = nonneg_rewrite(*poly, std::max(N, poly->degree()));
  if (within.ok && within.degree <= N) {
    v.yes = true;
    v.degree_needed = within.degree;
    v.g = to_sampler(within.poly);
    v.reason = "nonnegative representation at degree " + std::to_string(within.degree);
    return v;
  }
  const NonnegResult wider = nonneg_rewrite(*poly);
  if (wider.ok) {
    v.degree_needed = wider.degree;
    v.reason = "needs " + std::to_string(wider.degree) + " samples";
  } else {
    v.reason = "no nonnegative representation up to degree " + std::to_string(wider.degree);
  }
  return v;
}

// ---- necessary condition scan ----------------------------------------------

struct ScanPair {
  Vec p, q;
  int component = 0;
  double ratio = 0;
};

struct ScanReport {
  double t = 0;
  int cap = 0;
  double min_ratio = 1;
  ScanPair worst;
  int excluded_up_to = 0;          // F is not expressible with this many samples or fewer
  std::vector<ScanPair> violations;  // ratio below t^cap
  size_t points = 0;
};

// Points used by the scan: the uniform grid plus, for up to three actions,
// points whose coordinates approach the faces geometrically.
inline std::vector<Vec> scan_points(int k, int resolution, int refine_levels) {
  std::vector<Vec> pts = simplex_grid(k, resolution);
  if (k > 3 || refine_levels <= 0) return pts;
  Vec values;
  for (int i = 0; i <= resolution; ++i) values.push_back(static_cast<double>(i) / resolution);
  for (int j = 1; j <= refine_levels; ++j) values.push_back(std::ldexp(1.0, -j));
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (int rest = 0; rest < k; ++rest) {
    std::vector<int> idx(k - 1, 0);
    while (true) {
      Vec p(k, 0.0);
      double s = 0;
      for (int j = 0, c = 0; j < k; ++j) {
        if (j == rest) continue;
        p[j] = values[idx[c++]];
        s += p[j];
      }
      if (s <= 1.0) {
        p[rest] = 1.0 - s;
        pts.push_back(p);
      }
      int j = k - 2;
      while (j >= 0 && ++idx[j] == static_cast<int>(values.size())) idx[j--] = 0;
      if (j < 0) break;
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

inline ScanReport necessary_condition_scan(const DependenceFunction& F, double t, int resolution = 20,
                                           int cap = 20, int refine_levels = 24, size_t max_reported = 50) {
  if (!(t > 0 && t <= 1)) throw InputError("scan ratio t must lie in (0, 1]");
  const int k = F.num_actions();
  ScanReport rep;
  rep.t = t;
  rep.cap = cap;
  const std::vector<Vec> pts = scan_points(k, resolution, refine_levels);
  rep.points = pts.size();
  std::vector<Vec> vals;
  vals.reserve(pts.size());
  for (const Vec& p : pts) vals.push_back(F.raw(p));
  const double floor_ratio = std::pow(t, cap) * (1 - 1e-12);
  bool any = false;
  for (size_t ip = 0; ip < pts.size(); ++ip) {
    for (size_t iq = 0; iq < pts.size(); ++iq) {
      if (ip == iq) continue;
      bool dominated = true;
      for (int a = 0; a < k && dominated; ++a) dominated = pts[ip][a] >= t * pts[iq][a];
      if (!dominated) continue;
      for (int i = 0; i < k; ++i) {
        const double fq = vals[iq][i];
        if (fq <= 0) continue;
        const double r = std::max(vals[ip][i], 0.0) / fq;
        if (!any || r < rep.min_ratio) {
          rep.min_ratio = r;
          rep.worst = {pts[ip], pts[iq], i, r};
          any = true;
        }
        if (r < floor_ratio) rep.violations.push_back({pts[ip], pts[iq], i, r});
      }
    }
  }
  for (int n = 1; n <= cap; ++n)
    if (rep.min_ratio < std::pow(t, n) * (1 - 1e-12)) rep.excluded_up_to = n;
  std::sort(rep.violations.begin(), rep.violations.end(),
            [](const ScanPair& a, const ScanPair& b) { return a.ratio < b.ratio; });
  if (rep.violations.size() > max_reported) rep.violations.resize(max_reported);
  return rep;
}

// ---- Bernstein-style approximation -----------------------------------------

// Sampler with g_N(a_1..a_N) = F(empirical distribution of the samples).
inline DependenceFunction bernstein_approx(const DependenceFunction& F, int N) {
  if (N < 1) throw InputError("bernstein_approx needs N >= 1");
  const int k = F.num_actions();
  if (composition_count(N, k) > kEnumerationCap)
    throw CapExceeded("bernstein_approx: " + std::to_string(composition_count(N, k)) + " compositions exceed the cap");
  auto g = SimulationFunction::symmetric_from(k, N, [&](const Counts& c) {
    Vec m(k);
    for (int a = 0; a < k; ++a) m[a] = static_cast<double>(c[a]) / N;
    return F.eval(m).probs();
  });
  return DependenceFunction::sampler(std::move(g));
}

}  // namespace selfloc
