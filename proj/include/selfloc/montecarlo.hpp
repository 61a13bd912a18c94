#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "selfloc/chain.hpp"
#include "selfloc/error.hpp"
#include "selfloc/problem.hpp"

namespace selfloc {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator: draw i of stream s under seed k is a pure
// function of (k, s, i), so streams can be handed out independently.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(seed ^ mix64(stream ^ 0x5851f42d4c957f2dULL))) {}

  std::uint64_t next() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  CounterRng split(std::uint64_t stream) const { return CounterRng(key_, stream); }
  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline int sample_index(const Vec& w, double u) {
  double c = 0;
  int last = -1;
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0) continue;
    c += w[i];
    last = static_cast<int>(i);
    if (u < c) return last;
  }
  return last;
}

struct HistorySample {
  std::vector<int> states;   // ends in a terminal
  std::vector<int> actions;  // one per non-terminal state
  double utility = 0;
  std::size_t length() const { return states.size(); }
};

inline constexpr std::size_t kStepCap = 10'000'000;

inline HistorySample rollout(const DecisionProblem& p, const std::vector<Vec>& joint, CounterRng& rng) {
  HistorySample h;
  int s = sample_index(p.initial, rng.uniform());
  while (true) {
    h.states.push_back(s);
    if (p.states[s].terminal) break;
    if (h.states.size() > kStepCap) throw TerminationError("rollout exceeded the step cap");
    const int a = sample_index(joint[p.states[s].dependant], rng.uniform());
    h.actions.push_back(a);
    s = sample_index(p.transitions[s][a], rng.uniform());
  }
  h.utility = *p.states[s].utility;
  return h;
}

inline HistorySample rollout(const DecisionProblem& p, const std::vector<Vec>& joint, std::uint64_t seed,
                             std::uint64_t stream = 0) {
  CounterRng rng(seed, stream);
  return rollout(p, joint, rng);
}

struct QuantityCheck {
  std::string name;
  double expected = 0;
  double mean = 0;
  double se = 0;
  double z = 0;
  bool pass = false;
};

struct MonteCarloReport {
  std::vector<QuantityCheck> checks;
  double mean_length = 0;
  std::size_t rollouts = 0;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

struct Moments {
  double s = 0, ss = 0;
  void add(double x) {
    s += x;
    ss += x * x;
  }
};

// With zero sample spread the z-score is undefined; accept gaps smaller
// than a few unseen events of size `span`.
inline QuantityCheck z_check(std::string name, double expected, const Moments& m, std::size_t n, double z,
                             double span) {
  QuantityCheck c;
  c.name = std::move(name);
  c.expected = expected;
  c.mean = m.s / n;
  const double var = std::max(0.0, (m.ss - n * c.mean * c.mean) / (n > 1 ? n - 1 : 1));
  c.se = std::sqrt(var / n);
  const double gap = c.mean - expected;
  if (c.se > 0) {
    c.z = gap / c.se;
    c.pass = std::abs(c.z) <= z;
  } else {
    c.z = gap == 0 ? 0 : INFINITY;
    c.pass = std::abs(gap) <= 1e-12 * std::max(1.0, std::abs(expected)) || std::abs(gap) * n <= z * span;
  }
  return c;
}

}  // namespace detail

// Empirical EU and per-state visit counts over `rollouts` histories, each
// compared with the chain solution by z-score.
inline MonteCarloReport validate(const DecisionProblem& p, const Vec& pi, std::size_t rollouts, std::uint64_t seed,
                                 double z = 4, const std::optional<ChainSolution>& reference = std::nullopt) {
  const std::vector<Vec> joint = joint_policy(p, pi);
  const ChainSolution sol = reference ? *reference : solve_chain(p, joint);
  const int S = p.num_states();
  detail::Moments eu, len;
  std::vector<detail::Moments> visits(S);
  std::vector<int> count(S, 0);
  for (std::size_t r = 0; r < rollouts; ++r) {
    CounterRng rng(seed, r);
    const HistorySample h = rollout(p, joint, rng);
    eu.add(h.utility);
    len.add(static_cast<double>(h.length()));
    for (int s : h.states) ++count[s];
    for (int s : h.states) {
      if (count[s] == 0) continue;
      visits[s].add(count[s]);
      count[s] = 0;
    }
  }
  MonteCarloReport rep;
  rep.rollouts = rollouts;
  rep.mean_length = len.s / rollouts;
  rep.checks.push_back(detail::z_check("eu", sol.ex_ante_eu, eu, rollouts, z, p.utility_range()));
  for (int s = 0; s < S; ++s) {
    if (p.states[s].terminal) continue;
    rep.checks.push_back(detail::z_check("visits[" + p.states[s].id + "]", sol.visits[s], visits[s], rollouts, z, 1.0));
  }
  return rep;
}

struct TwoSample {
  double mean_a = 0, mean_b = 0, se_a = 0, se_b = 0, z = 0;
  bool pass = false;
};

// Empirical EUs of two problems under their own policies, compared jointly.
inline TwoSample compare_eu(const DecisionProblem& a, const Vec& pa, const DecisionProblem& b, const Vec& pb,
                            std::size_t rollouts, std::uint64_t seed, double z = 4) {
  auto run = [&](const DecisionProblem& p, const Vec& pi, std::uint64_t sd) {
    const std::vector<Vec> joint = joint_policy(p, pi);
    detail::Moments m;
    for (std::size_t r = 0; r < rollouts; ++r) {
      CounterRng rng(sd, r);
      m.add(rollout(p, joint, rng).utility);
    }
    const double mean = m.s / rollouts;
    const double var = std::max(0.0, (m.ss - rollouts * mean * mean) / (rollouts - 1));
    return std::pair{mean, std::sqrt(var / rollouts)};
  };
  TwoSample t;
  std::tie(t.mean_a, t.se_a) = run(a, pa, seed);
  std::tie(t.mean_b, t.se_b) = run(b, pb, mix64(seed + 1));
  const double se = std::sqrt(t.se_a * t.se_a + t.se_b * t.se_b);
  t.z = se > 0 ? (t.mean_a - t.mean_b) / se : (t.mean_a == t.mean_b ? 0 : INFINITY);
  t.pass = std::abs(t.z) <= z;
  return t;
}

}  // namespace selfloc
