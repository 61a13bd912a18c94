#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "selfloc/error.hpp"

namespace selfloc {

using Vec = std::vector<double>;

// Signed direction on the simplex tangent space; entries sum to zero.
using PolicyDelta = Vec;

inline constexpr double kSimplexTol = 1e-9;

inline double sum(const Vec& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

inline bool near_simplex(const Vec& v, double tol = kSimplexTol) {
  if (v.empty()) return false;
  for (double x : v)
    if (!std::isfinite(x) || x < -tol) return false;
  return std::abs(sum(v) - 1.0) <= tol;
}

// Point of the action simplex. Construction renormalizes inputs that are
// within tolerance of the simplex and rejects everything else.
class Policy {
 public:
  Policy() = default;

  static Policy from(const Vec& v, double tol = kSimplexTol) {
    if (!near_simplex(v, tol)) {
      std::ostringstream os;
      os << "not a policy: [";
      for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
      os << "]";
      throw InputError(os.str());
    }
    Policy p;
    p.p_.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) p.p_[i] = std::max(0.0, v[i]);
    // Leave values alone when already normalized up to rounding, so that
    // repeated construction is idempotent.
    const double s = sum(p.p_);
    if (std::abs(s - 1.0) > 1e-14)
      for (double& x : p.p_) x /= s;
    return p;
  }

  static Policy vertex(int num_actions, int a) {
    Policy p;
    p.p_.assign(num_actions, 0.0);
    p.p_.at(a) = 1.0;
    return p;
  }

  static Policy uniform(int num_actions) {
    Policy p;
    p.p_.assign(num_actions, 1.0 / num_actions);
    return p;
  }

  int size() const { return static_cast<int>(p_.size()); }
  double operator[](int a) const { return p_[a]; }
  const Vec& probs() const { return p_; }
  operator const Vec&() const { return p_; }

  bool is_vertex(double tol = 0.0) const {
    return std::any_of(p_.begin(), p_.end(), [&](double x) { return x >= 1.0 - tol; });
  }
  bool in_support(int a, double tol = 0.0) const { return p_[a] > tol; }

  bool operator==(const Policy& o) const { return p_ == o.p_; }

 private:
  Vec p_;
};

inline double distance(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// e_a - pi
inline Vec toward_vertex(const Vec& pi, int a) {
  Vec d(pi.size());
  for (size_t b = 0; b < pi.size(); ++b) d[b] = (static_cast<int>(b) == a ? 1.0 : 0.0) - pi[b];
  return d;
}

inline Vec axpy(double alpha, const Vec& x, const Vec& y) {
  Vec r(y);
  for (size_t i = 0; i < r.size(); ++i) r[i] += alpha * x[i];
  return r;
}

// Euclidean projection onto the simplex (sort-based).
inline Vec project_to_simplex(const Vec& v) {
  Vec u(v);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0, theta = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0) theta = t;
  }
  Vec r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = std::max(v[i] - theta, 0.0);
  const double s = sum(r);
  for (double& x : r) x /= s;
  return r;
}

// Every point of the simplex whose coordinates are multiples of 1/resolution.
inline std::vector<Vec> simplex_grid(int num_actions, int resolution) {
  std::vector<Vec> out;
  std::vector<int> c(num_actions, 0);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == num_actions - 1) {
      c[i] = left;
      Vec p(num_actions);
      for (int k = 0; k < num_actions; ++k) p[k] = static_cast<double>(c[k]) / resolution;
      out.push_back(std::move(p));
      return;
    }
    for (int x = 0; x <= left; ++x) {
      c[i] = x;
      self(self, i + 1, left - x);
    }
  };
  rec(rec, 0, resolution);
  return out;
}

// Uniform draw from the simplex (flat Dirichlet).
template <class Rng>
Policy random_policy(int num_actions, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Vec v(num_actions);
  for (double& x : v) x = e(rng);
  const double s = sum(v);
  for (double& x : v) x /= s;
  return Policy::from(v);
}

// "0.3,0.7" -> Policy, renormalized within tolerance.
inline Policy parse_policy(const std::string& text, int num_actions) {
  Vec v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("bad policy entry '" + item + "'");
    }
  }
  if (static_cast<int>(v.size()) != num_actions)
    throw InputError("policy has " + std::to_string(v.size()) + " entries, problem has " +
                     std::to_string(num_actions) + " actions");
  return Policy::from(v);
}

inline std::string format_vec(const Vec& v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << "(";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace selfloc
