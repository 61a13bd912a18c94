#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "selfloc/beliefs.hpp"
#include "selfloc/chain.hpp"
#include "selfloc/dependence.hpp"
#include "selfloc/error.hpp"
#include "selfloc/policy.hpp"
#include "selfloc/problem.hpp"

namespace selfloc {

inline constexpr double kRatifyTol = 1e-7;
inline constexpr double kDedupRadius = 1e-6;

// ---- CDT expected utility --------------------------------------------------

// E_X[u | do(a)] for every action, sharing one chain solve at F(pi).
inline Vec cdt_eus(const DecisionProblem& p, const BeliefSystem& b, const Vec& pi) {
  if (b.anchor.size() != pi.size() || max_abs_diff(b.anchor, pi) > 1e-12)
    throw InputError("beliefs are anchored at a different policy");
  const ChainSolution sol = solve_at(p, pi);
  const auto q = action_values(p, sol);
  const int k = p.num_actions();
  Vec eu(k, 0.0);
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal || b.credences[s] == 0) continue;
    const auto& tau = b.transforms[p.states[s].dependant];
    for (int a = 0; a < k; ++a) {
      double v = 0;
      for (int c = 0; c < k; ++c) v += tau[a][c] * q[s][c];
      eu[a] += b.credences[s] * v;
    }
  }
  return eu;
}

inline double cdt_eu(const DecisionProblem& p, const BeliefSystem& b, const Vec& pi, int a) {
  return cdt_eus(p, b, pi).at(a);
}

// Mixed counterfactual: gamma-weighted average over actions.
inline double cdt_eu_mixed(const DecisionProblem& p, const BeliefSystem& b, const Vec& pi, const Vec& gamma) {
  const Vec eu = cdt_eus(p, b, pi);
  double r = 0;
  for (size_t a = 0; a < eu.size(); ++a) r += gamma[a] * eu[a];
  return r;
}

struct RatifiabilityReport {
  Vec anchor;
  BeliefKind kind = BeliefKind::Custom;
  Vec eu;
  Vec advantage;  // eu(a) - max eu
  bool ratifiable = false;
  double tol = kRatifyTol;
  double scale = 1;  // utility range the tolerance is measured against
};

inline RatifiabilityReport is_ratifiable(const DecisionProblem& p, const BeliefSystem& b, const Vec& pi,
                                         double tol = kRatifyTol) {
  RatifiabilityReport r;
  r.anchor = pi;
  r.kind = b.kind;
  r.tol = tol;
  r.scale = p.utility_range();
  r.eu = cdt_eus(p, b, pi);
  const double best = *std::max_element(r.eu.begin(), r.eu.end());
  r.ratifiable = true;
  for (size_t a = 0; a < r.eu.size(); ++a) {
    r.advantage.push_back(r.eu[a] - best);
    if (pi[a] > 0 && r.advantage[a] / r.scale < -tol) r.ratifiable = false;
  }
  return r;
}

// Beliefs of the requested kind at pi. GSGT uses exact samplers of the
// dependence functions; GGT uses Gamma unless weights are given.
inline BeliefSystem beliefs_of_kind(const DecisionProblem& p, BeliefKind kind, const Vec& pi,
                                    const std::optional<Vec>& rho = std::nullopt,
                                    RhoCheck check = RhoCheck::Strict) {
  switch (kind) {
    case BeliefKind::GT: return gt_beliefs(p, pi);
    case BeliefKind::GSGT: return gsgt_beliefs(p, pi);
    case BeliefKind::LSGT: return lsgt_from_simple_cases(p, pi).beliefs;
    case BeliefKind::GGT: return ggt_beliefs(p, pi, ggt_components(p, pi, rho, check));
    default: throw InputError("no constructor for custom beliefs");
  }
}

// max_a |grad(a) - W (E_GGT[u|do a] - E_GGT[u|do pi])|, W = sum_j rho_j E[#j].
inline double grad_identity_residual(const DecisionProblem& p, const Vec& pi,
                                     const std::optional<Vec>& rho = std::nullopt) {
  const Vec g = ex_ante_grad(p, pi);
  const GGTComponents comps = ggt_components(p, pi, rho, RhoCheck::Permissive);
  const BeliefSystem b = ggt_beliefs(p, pi, comps);
  const Vec eu = cdt_eus(p, b, pi);
  const Vec visits = dependant_visits(p, solve_at(p, pi));
  double W = 0;
  for (int j = 0; j < p.num_dependants(); ++j) W += comps.dependants[j].rho * visits[j];
  double eu_pi = 0;
  for (size_t a = 0; a < eu.size(); ++a) eu_pi += pi[a] * eu[a];
  double r = 0;
  for (size_t a = 0; a < eu.size(); ++a) r = std::max(r, std::abs(g[a] - W * (eu[a] - eu_pi)));
  return r;
}

// ---- policy sets -----------------------------------------------------------

struct PolicyEntry {
  Vec policy;
  std::string classification;  // "ex-ante-max" or "stationary-other"
  double eu = 0;
  Vec grad;  // empty when the problem is not differentiable
};

struct PolicySet {
  std::vector<PolicyEntry> policies;
  double dedup_radius = kDedupRadius;
  bool everywhere_stationary = false;
  bool empty_flagged = false;
};

inline void dedup_sorted(std::vector<PolicyEntry>& v, double radius) {
  std::vector<PolicyEntry> out;
  for (auto& e : v) {
    bool dup = false;
    for (const auto& o : out)
      if (distance(o.policy, e.policy) <= radius) dup = true;
    if (!dup) out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [](const PolicyEntry& a, const PolicyEntry& b) { return a.policy < b.policy; });
  v = std::move(out);
}

struct StationaryConfig {
  int grid = 2000;          // edge scan resolution for two actions
  int restarts = 16;        // random starts per face for more actions
  int face_resolution = 8;  // grid starts per face for more actions
  double tol = kRatifyTol;  // on directional derivatives, relative to the utility range
  double root_tol = 1e-10;
  double dedup = kDedupRadius;
  std::uint64_t seed = 0;
};

namespace detail {

inline Vec edge_policy(double p) { return Vec{p, 1 - p}; }

// Derivative of EU along the edge, in terms of p = pi_0.
inline double edge_slope(const DecisionProblem& pr, double p) {
  const Vec g = ex_ante_grad(pr, edge_policy(p));
  return g[0] - g[1];
}

inline bool stationary_at(const Vec& g, double bound) {
  return std::all_of(g.begin(), g.end(), [&](double x) { return x <= bound; });
}

// Golden-section maximization of f on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  while (hi - lo > tol) {
    const double mid = (lo + hi) / 2;
    const double fm = f(mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

// Reduced coordinates on the face spanned by `support`: x_i = pi(support[i+1]).
inline Vec face_point(int k, const std::vector<int>& support, const Vec& x) {
  Vec pi(k, 0.0);
  double s = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    pi[support[i + 1]] = x[i];
    s += x[i];
  }
  pi[support[0]] = 1 - s;
  return pi;
}

inline Vec face_residual(const DecisionProblem& p, const std::vector<int>& support, const Vec& pi) {
  const Vec g = ex_ante_grad(p, pi);
  Vec r(support.size() - 1);
  for (size_t i = 1; i < support.size(); ++i) r[i - 1] = g[support[i]] - g[support[0]];
  return r;
}

inline double inf_norm(const Vec& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Newton iteration for a critical point of EU restricted to a face, with a
// central-difference Jacobian of the analytic reduced gradient.
inline std::optional<Vec> newton_on_face(const DecisionProblem& p, const std::vector<int>& support, const Vec& start,
                                         double accept, int max_iter = 80) {
  const int k = p.num_actions();
  const int m = static_cast<int>(support.size()) - 1;
  Vec x(m);
  for (int i = 0; i < m; ++i) x[i] = start[support[i + 1]];
  auto inside = [&](const Vec& y, double margin) {
    const Vec pi = face_point(k, support, y);
    for (int a : support)
      if (pi[a] < margin) return false;
    return true;
  };
  if (!inside(x, 0)) return std::nullopt;
  Vec r = face_residual(p, support, face_point(k, support, x));
  for (int it = 0; it < max_iter; ++it) {
    if (inf_norm(r) <= 1e-14 * p.utility_range()) break;
    const Vec pi = face_point(k, support, x);
    double room = 1;
    for (int a : support) room = std::min(room, pi[a]);
    const double h = std::min(1e-6, room / 4);
    if (h <= 1e-13) return std::nullopt;
    Eigen::MatrixXd J(m, m);
    for (int j = 0; j < m; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      // The other support coordinate absorbs the change, so both stay inside.
      const Vec rp = face_residual(p, support, face_point(k, support, xp));
      const Vec rm = face_residual(p, support, face_point(k, support, xm));
      for (int i = 0; i < m; ++i) J(i, j) = (rp[i] - rm[i]) / (2 * h);
    }
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = -r[i];
    const Eigen::VectorXd step = J.colPivHouseholderQr().solve(rhs);
    if (!step.allFinite()) return std::nullopt;
    double t = 1;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, t /= 2) {
      Vec y(x);
      for (int i = 0; i < m; ++i) y[i] += t * step[i];
      if (!inside(y, 0)) continue;
      const Vec ry = face_residual(p, support, face_point(k, support, y));
      if (inf_norm(ry) < inf_norm(r)) {
        x = y;
        r = ry;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  if (inf_norm(r) > accept) return std::nullopt;
  return face_point(k, support, x);
}

// Projected gradient ascent (sign = +1) or descent (sign = -1) on EU.
inline Vec projected_climb(const DecisionProblem& p, Vec pi, double sign, int max_iter = 300) {
  double f = sign * ex_ante_eu(p, pi);
  double eta = 0.1 / p.utility_range();
  for (int it = 0; it < max_iter && eta > 1e-16; ++it) {
    Vec g = ex_ante_grad(p, pi);
    const double mean = sum(g) / static_cast<double>(g.size());
    for (double& x : g) x = sign * (x - mean);
    bool improved = false;
    while (eta > 1e-16) {
      const Vec cand = project_to_simplex(axpy(eta, g, pi));
      const double fc = sign * ex_ante_eu(p, cand);
      if (fc > f) {
        pi = cand;
        f = fc;
        eta *= 2;
        improved = true;
        break;
      }
      eta /= 2;
    }
    if (!improved) break;
  }
  return pi;
}

inline std::vector<int> support_of(const Vec& pi, double tol = 1e-9) {
  std::vector<int> s;
  for (size_t a = 0; a < pi.size(); ++a)
    if (pi[a] > tol) s.push_back(static_cast<int>(a));
  return s;
}

inline std::optional<Vec> polish(const DecisionProblem& p, const Vec& pi, double accept) {
  const std::vector<int> s = support_of(pi);
  if (s.size() == 1) return Policy::vertex(p.num_actions(), s[0]).probs();
  return newton_on_face(p, s, pi, accept);
}

inline void classify(const DecisionProblem& p, std::vector<PolicyEntry>& v) {
  if (v.empty()) return;
  double best = -INFINITY;
  for (const auto& e : v) best = std::max(best, e.eu);
  for (auto& e : v) e.classification = e.eu >= best - 1e-9 * p.utility_range() ? "ex-ante-max" : "stationary-other";
}

}  // namespace detail

// Policies where every directional derivative of EU is <= tol.
inline PolicySet find_stationary(const DecisionProblem& p, const StationaryConfig& cfg = {}) {
  require_differentiable(p);
  const int k = p.num_actions();
  const double scale = p.utility_range();
  const double bound = cfg.tol * scale;
  PolicySet set;
  set.dedup_radius = cfg.dedup;
  std::vector<Vec> found;

  if (k == 1) {
    found.push_back(Vec{1.0});
  } else if (k == 2) {
    const int G = std::max(cfg.grid, 10);
    Vec d(G + 1);
    for (int i = 0; i <= G; ++i) d[i] = detail::edge_slope(p, static_cast<double>(i) / G);
    auto slope = [&](double x) { return detail::edge_slope(p, x); };
    set.everywhere_stationary = std::all_of(d.begin(), d.end(), [&](double x) { return std::abs(x) <= bound; });
    for (int v = 0; v < 2; ++v) {
      const Vec pi = Policy::vertex(2, v).probs();
      if (detail::stationary_at(ex_ante_grad(p, pi), bound)) found.push_back(pi);
    }
    if (!set.everywhere_stationary) {
      for (int i = 0; i < G; ++i) {
        const double lo = static_cast<double>(i) / G, hi = static_cast<double>(i + 1) / G;
        if (i > 0 && d[i] == 0) found.push_back(detail::edge_policy(lo));
        if ((d[i] < 0 && d[i + 1] > 0) || (d[i] > 0 && d[i + 1] < 0)) {
          const double root = detail::bisect(slope, lo, hi, cfg.root_tol);
          if (root > 0 && root < 1) found.push_back(detail::edge_policy(root));
        }
      }
      // Touching zeros without a sign change.
      for (int i = 1; i < G; ++i) {
        const double a = std::abs(d[i]);
        if (a <= std::abs(d[i - 1]) && a <= std::abs(d[i + 1]) && a <= 1e3 * bound && d[i] != 0 &&
            (d[i - 1] > 0) == (d[i + 1] > 0)) {
          const double x = detail::golden_max([&](double y) { return -std::abs(slope(y)); },
                                              static_cast<double>(i - 1) / G, static_cast<double>(i + 1) / G,
                                              cfg.root_tol);
          if (std::abs(slope(x)) <= bound) found.push_back(detail::edge_policy(x));
        }
      }
    }
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::vector<Vec> starts;
    for (int mask = 1; mask < (1 << k); ++mask) {
      std::vector<int> sup;
      for (int a = 0; a < k; ++a)
        if (mask >> a & 1) sup.push_back(a);
      if (sup.size() == 1) {
        const Vec pi = Policy::vertex(k, sup[0]).probs();
        if (detail::stationary_at(ex_ante_grad(p, pi), bound)) found.push_back(pi);
        continue;
      }
      std::vector<Vec> face_starts;
      const int r = std::max(cfg.face_resolution, static_cast<int>(sup.size()));
      for_each_composition(r - static_cast<int>(sup.size()), static_cast<int>(sup.size()), [&](const Counts& c) {
        Vec pi(k, 0.0);
        for (size_t i = 0; i < sup.size(); ++i) pi[sup[i]] = static_cast<double>(c[i] + 1) / r;
        face_starts.push_back(pi);
      });
      for (int i = 0; i < cfg.restarts; ++i) {
        const Policy q = random_policy(static_cast<int>(sup.size()), rng);
        Vec pi(k, 0.0);
        for (size_t j = 0; j < sup.size(); ++j) pi[sup[j]] = q[static_cast<int>(j)];
        face_starts.push_back(pi);
      }
      for (const Vec& s : face_starts)
        if (auto x = detail::newton_on_face(p, sup, s, bound)) found.push_back(*x);
      if (static_cast<int>(sup.size()) == k)
        for (const Vec& s : face_starts) starts.push_back(s);
    }
    for (const Vec& s : starts)
      for (double sign : {1.0, -1.0})
        if (auto x = detail::polish(p, detail::projected_climb(p, s, sign), bound)) found.push_back(*x);
    // The grid check for a flat objective.
    set.everywhere_stationary = true;
    for (const Vec& g : simplex_grid(k, 20)) {
      const Vec grad = ex_ante_grad(p, g);
      if (detail::inf_norm(grad) > bound) {
        set.everywhere_stationary = false;
        break;
      }
    }
  }

  for (const Vec& pi : found) {
    const Vec g = ex_ante_grad(p, pi);
    if (!detail::stationary_at(g, bound)) continue;
    set.policies.push_back({pi, "", ex_ante_eu(p, pi), g});
  }
  dedup_sorted(set.policies, cfg.dedup);
  detail::classify(p, set.policies);
  set.empty_flagged = set.policies.empty();
  return set;
}

struct OptimizeConfig {
  int grid = 2000;        // two actions
  int simplex_grid = 0;   // more actions; 0 picks a resolution from |A|
  int top = 8;            // grid candidates refined for more actions
  double dedup = kDedupRadius;
};

struct OptimumResult {
  double value = -INFINITY;
  PolicySet argmax;
};

inline OptimumResult optimize_ex_ante(const DecisionProblem& p, const OptimizeConfig& cfg = {}) {
  const int k = p.num_actions();
  const double scale = p.utility_range();
  const bool smooth = std::all_of(p.dependence.begin(), p.dependence.end(),
                                  [](const DependenceFunction& F) { return F.differentiable(); });
  auto eu = [&](const Vec& pi) { return ex_ante_eu(p, pi); };
  std::vector<Vec> cand;
  for (int a = 0; a < k; ++a) cand.push_back(Policy::vertex(k, a).probs());

  if (k == 2) {
    const int G = std::max(cfg.grid, 10);
    Vec f(G + 1);
    for (int i = 0; i <= G; ++i) f[i] = eu(detail::edge_policy(static_cast<double>(i) / G));
    std::vector<int> local;
    for (int i = 0; i <= G; ++i) {
      const bool left = i == 0 || f[i] >= f[i - 1];
      const bool right = i == G || f[i] >= f[i + 1];
      if (left && right) local.push_back(i);
    }
    // Collapse runs of equal values to their middle element.
    std::vector<int> picked;
    for (size_t s = 0; s < local.size();) {
      size_t e = s;
      while (e + 1 < local.size() && local[e + 1] == local[e] + 1) ++e;
      picked.push_back(local[(s + e) / 2]);
      if (e != s) {
        picked.push_back(local[s]);
        picked.push_back(local[e]);
      }
      s = e + 1;
    }
    for (int i : picked) {
      const double lo = std::max(0, i - 1) / static_cast<double>(G);
      const double hi = std::min(G, i + 1) / static_cast<double>(G);
      double x = static_cast<double>(i) / G;
      if (smooth) {
        auto slope = [&](double y) { return detail::edge_slope(p, y); };
        const double sl = slope(lo), sh = slope(hi);
        if (sl > 0 && sh < 0) x = detail::bisect(slope, lo, hi, 1e-13);
        else x = detail::golden_max([&](double y) { return eu(detail::edge_policy(y)); }, lo, hi);
      } else {
        const double g = detail::golden_max([&](double y) { return eu(detail::edge_policy(y)); }, lo, hi);
        if (eu(detail::edge_policy(g)) > f[i]) x = g;
      }
      cand.push_back(detail::edge_policy(x));
    }
  } else if (k > 2) {
    int R = cfg.simplex_grid;
    if (R <= 0) R = k == 3 ? 100 : k == 4 ? 30 : k == 5 ? 14 : 6;
    std::vector<std::pair<double, Vec>> pts;
    for (const Vec& x : simplex_grid(k, R)) pts.push_back({eu(x), x});
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Vec> tops;
    for (const auto& [v, x] : pts) {
      if (static_cast<int>(tops.size()) >= cfg.top) break;
      bool close = false;
      for (const Vec& t : tops) close |= distance(t, x) < 0.5 / R;
      if (!close) tops.push_back(x);
    }
    // EU can be very flat along some directions, so unpolished points may sit
    // inside the value window while being far from the critical point. Keep
    // them only when Newton fails.
    for (const Vec& x : tops) {
      if (!smooth) {
        cand.push_back(x);
        continue;
      }
      const Vec up = detail::projected_climb(p, x, 1.0);
      if (auto pol = detail::polish(p, up, kRatifyTol * scale)) cand.push_back(*pol);
      else cand.push_back(up);
      if (auto pol = detail::polish(p, x, kRatifyTol * scale)) cand.push_back(*pol);
    }
  }

  OptimumResult res;
  std::vector<std::pair<double, Vec>> scored;
  for (const Vec& c : cand) {
    const double v = eu(c);
    scored.push_back({v, c});
    res.value = std::max(res.value, v);
  }
  for (const auto& [v, c] : scored)
    if (v >= res.value - 1e-9 * scale)
      res.argmax.policies.push_back({c, "ex-ante-max", v, smooth ? ex_ante_grad(p, c) : Vec{}});
  res.argmax.dedup_radius = cfg.dedup;
  dedup_sorted(res.argmax.policies, cfg.dedup);
  return res;
}

// ---- convergence of approximated problems -----------------------------------

inline bool exactly_sampleable(const DependenceFunction& F) {
  if (F.sampler_ptr() || F.is_constant()) return true;
  const auto poly = F.as_polynomial();
  return poly && nonneg_rewrite(*poly).ok;
}

// Largest distance from a policy in `a` to the nearest policy in `b`.
inline double set_distance(const PolicySet& a, const PolicySet& b) {
  double d = 0;
  for (const auto& x : a.policies) {
    double best = INFINITY;
    for (const auto& y : b.policies) best = std::min(best, distance(x.policy, y.policy));
    d = std::max(d, best);
  }
  return d;
}

struct ConvergenceRow {
  int N = 0;
  DecisionProblem problem;  // with non-sampleable dependants replaced
  double sup_error = 0;     // on the resolution-1/50 grid
  PolicySet stationary;
  OptimumResult optimum;
  double distance_to_optimal = 0;
};

struct ConvergenceReport {
  OptimumResult original;
  std::vector<ConvergenceRow> rows;
};

inline ConvergenceReport convergence_sequence(const DecisionProblem& p, const std::vector<int>& Ns,
                                              const StationaryConfig& scfg = {}, const OptimizeConfig& ocfg = {}) {
  for (const auto& F : p.dependence)
    if (!F.differentiable() && !exactly_sampleable(F))
      throw NotApplicable("convergence sequence needs continuous dependence functions");
  ConvergenceReport rep;
  rep.original = optimize_ex_ante(p, ocfg);
  for (int N : Ns) {
    ConvergenceRow row;
    row.N = N;
    row.problem = p;
    for (auto& F : row.problem.dependence) {
      if (exactly_sampleable(F)) continue;
      DependenceFunction approx = bernstein_approx(F, N);
      row.sup_error = std::max(row.sup_error, grid_distance(F, approx, 50));
      F = std::move(approx);
    }
    row.stationary = find_stationary(row.problem, scfg);
    row.optimum = optimize_ex_ante(row.problem, ocfg);
    row.distance_to_optimal = set_distance(row.optimum.argmax, rep.original.argmax);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

// ---- impossibility check ----------------------------------------------------

struct CandidateBeliefs {
  std::string name;
  std::optional<BeliefSystem> beliefs;  // empty when the construction refused
  std::string refusal;
};

struct CandidateOutcome {
  std::string name;
  bool applicable = false;
  std::string refusal;
  AuditReport audit;
  RatifiabilityReport ratify;
};

struct ImpossibilityReport {
  Vec anchor;
  std::vector<CandidateOutcome> outcomes;
  bool claim_holds = true;  // every faithful, non-fanciful candidate rejects the anchor
  int faithful_candidates = 0;
};

inline ImpossibilityReport impossibility_check(const DecisionProblem& p, const std::vector<CandidateBeliefs>& candidates,
                                               const Vec& anchor, double tol = kRatifyTol) {
  ImpossibilityReport rep;
  rep.anchor = anchor;
  for (const auto& c : candidates) {
    CandidateOutcome o;
    o.name = c.name;
    o.refusal = c.refusal;
    if (c.beliefs) {
      o.applicable = true;
      o.audit = audit_beliefs(p, anchor, *c.beliefs);
      o.ratify = is_ratifiable(p, *c.beliefs, anchor, tol);
      if (o.audit.faithful && !o.audit.fanciful) {
        ++rep.faithful_candidates;
        if (o.ratify.ratifiable) rep.claim_holds = false;
      }
    }
    rep.outcomes.push_back(std::move(o));
  }
  return rep;
}

// GGT (when it applies), a faithful hand-built system with credence eps on
// the reachable copies of the agent, and a fanciful one sitting on an
// unreachable state.
inline std::vector<CandidateBeliefs> standard_candidates(const DecisionProblem& p, const Vec& anchor, double eps = 0.01) {
  std::vector<CandidateBeliefs> out;
  const int k = p.num_actions();
  try {
    out.push_back({"ggt", ggt_beliefs(p, anchor), ""});
  } catch (const DerivativeUnavailable& e) {
    out.push_back({"ggt", std::nullopt, e.what()});
  }
  const ChainSolution sol = solve_at(p, anchor);
  std::vector<std::vector<Vec>> tau(p.num_dependants());
  for (int j = 0; j < p.num_dependants(); ++j)
    for (int a = 0; a < k; ++a)
      tau[j].push_back(p.dependence[j].is_identity() ? Policy::vertex(k, a).probs() : p.dependence[j].eval(anchor).probs());

  BeliefSystem faithful;
  faithful.anchor = anchor;
  faithful.transforms = tau;
  faithful.credences.assign(p.num_states(), 0.0);
  double copies = 0, others = 0;
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal || sol.visits[s] <= kReachTol) continue;
    (p.dependence[p.states[s].dependant].is_identity() ? copies : others) += sol.visits[s];
  }
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal || sol.visits[s] <= kReachTol) continue;
    const bool copy = p.dependence[p.states[s].dependant].is_identity();
    if (others == 0) faithful.credences[s] = sol.visits[s] / copies;
    else faithful.credences[s] = copy ? eps * sol.visits[s] / copies : (1 - eps) * sol.visits[s] / others;
  }
  out.push_back({"faithful-eps", faithful, ""});

  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal || sol.visits[s] > kReachTol) continue;
    BeliefSystem fanciful;
    fanciful.anchor = anchor;
    fanciful.transforms = tau;
    fanciful.credences.assign(p.num_states(), 0.0);
    fanciful.credences[s] = 1;
    out.push_back({"fanciful-" + p.states[s].id, fanciful, ""});
    break;
  }
  return out;
}

}  // namespace selfloc
