#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "selfloc/dependence.hpp"
#include "selfloc/error.hpp"
#include "selfloc/io.hpp"
#include "selfloc/problem.hpp"

#ifndef SELFLOC_FIXTURE_DIR
#define SELFLOC_FIXTURE_DIR ""
#endif

namespace selfloc {

struct ExpectedValue {
  std::string key;
  double value = 0;
  double tolerance = 0;
  std::string kind;  // "exact" (closed form) or "approximate" (reported to a few digits)
  std::string note;
};

struct Fixture {
  std::string name;
  std::string description;
  DecisionProblem problem;
  std::vector<ExpectedValue> expected;

  const ExpectedValue& expect(const std::string& key) const {
    for (const auto& e : expected)
      if (e.key == key) return e;
    throw InputError("fixture '" + name + "' has no expected value '" + key + "'");
  }
};

namespace fixtures {

// Two-stage Sleeping-Beauty-like prisoner's dilemma. Theodora (dependant 2)
// plays twice, then Dorothea (dependant 1) plays once.
inline ProblemBuilder sbpd_layout() {
  ProblemBuilder b({"C", "D"});
  b.state("Th0", 1).state("ThC", 1).state("ThD", 1).state("DoC", 0).state("DoD", 0);
  b.terminal("0", 0).terminal("2", 2).terminal("3", 3).terminal("5", 5);
  b.initial("Th0", 1);
  b.edge("Th0", "C", "ThC").edge("Th0", "D", "ThD");
  b.edge("ThC", "C", "DoC").edge("ThC", "D", "DoD");
  b.edge_all("ThD", "DoD");
  b.edge("DoC", "C", "3").edge("DoC", "D", "5");
  b.edge("DoD", "C", "0").edge("DoD", "D", "2");
  return b;
}

inline Fixture sbpd_v1() {
  PolynomialMap f(2);
  // F2(p)_C = 1/6 + 2p^2 - 4/3 p^3, p = pi(C)
  f.add({0, 0}, {1.0 / 6, 5.0 / 6});
  f.add({2, 0}, {2.0, -2.0});
  f.add({3, 0}, {-4.0 / 3, 4.0 / 3});
  auto b = sbpd_layout();
  b.dependant(DependenceFunction::identity(2)).dependant(DependenceFunction::polynomial(f));
  return {"sbpd_v1",
          "two-stage prisoner's dilemma, Theodora follows 1/6 + 2p^2 - 4/3 p^3",
          b.build(),
          {{"exante_eu_pure_C", 25.0 / 12, 1e-10, "exact", "pi = (1,0)"},
           {"gsgt_credence_theodora", 6.0 / 7, 1e-10, "exact", "any pi"},
           {"gsgt_advantage_C_vertex", -2.0 / 7, 1e-9, "exact", "at (1,0) and (0,1)"},
           {"stationary_low", 0.36, 0.01, "approximate", "pi(C)"},
           {"stationary_high", 0.88, 0.01, "approximate", "pi(C)"},
           {"exante_opt", 0.88, 0.01, "approximate", "pi(C) at the ex ante optimum"}}};
}

inline Fixture sbpd_v2() {
  auto b = sbpd_layout();
  b.dependant(DependenceFunction::linear({{0.9, 0.1}, {0.1, 0.9}})).dependant(builtin::sqrt_theodora());
  return {"sbpd_v2",
          "two-stage prisoner's dilemma, Dorothea linear, Theodora sqrt(0.1 + 0.8p)",
          b.build(),
          {{"exante_eu_pure_C", 2.9, 1e-10, "exact", "pi = (1,0)"},
           {"ggt_credence_dorothea", 1.0 / 6, 1e-10, "exact", "rho = (0.8, 2), pi = (1,0)"},
           {"ggt_credence_theodora", 5.0 / 6, 1e-10, "exact", "rho = (0.8, 2), pi = (1,0)"},
           {"ggt_advantage_C", 1.0 / 6, 1e-9, "exact", "rho = (0.8, 2), any pi"},
           {"stationary_C", 1.0, 1e-9, "exact", "unique stationary policy, pi(C)"}}};
}

inline ProblemBuilder newcomb_layout() {
  ProblemBuilder b({"one-box", "two-box"});
  b.state("sim", 0).state("full", 0).state("empty", 0);
  b.terminal("full-one", 1'000'000).terminal("full-two", 1'001'000);
  b.terminal("empty-one", 0).terminal("empty-two", 1'000);
  b.edge("sim", "one-box", "full").edge("sim", "two-box", "empty");
  b.edge("full", "one-box", "full-one").edge("full", "two-box", "full-two");
  b.edge("empty", "one-box", "empty-one").edge("empty", "two-box", "empty-two");
  b.dependant(DependenceFunction::identity(2));
  return b;
}

inline Fixture newcomb() {
  auto b = newcomb_layout();
  b.initial("sim", 1);
  return {"newcomb",
          "exact-copy predictor: the simulation fills the box iff it one-boxes",
          b.build(),
          {{"gt_credence_sim", 0.5, 1e-10, "exact", "any pi"},
           {"exante_eu_one_box", 1'000'000, 1e-6, "exact", "relative"},
           {"exante_eu_two_box", 1'000, 1e-6, "exact", "relative"}}};
}

// The coin is folded into the initial distribution.
inline Fixture newcomb75() {
  auto b = newcomb_layout();
  b.initial("sim", 0.5).initial("full", 0.25).initial("empty", 0.25);
  return {"newcomb75",
          "predictor simulates with probability 1/2, else fills at random",
          b.build(),
          {{"gt_credence_sim", 1.0 / 3, 1e-10, "exact", "any pi"},
           {"exante_eu_one_box", 750'000, 1e-6, "exact", "relative"},
           {"exante_eu_two_box", 251'000, 1e-6, "exact", "relative"}}};
}

// x0 runs a four-sample simulation g; x_i is the agent facing offer i.
inline Fixture adversarial_offer() {
  ProblemBuilder b({"a1", "a2", "a3"});
  b.state("x0", 1).state("x1", 0).state("x2", 0).state("x3", 0);
  b.terminal("win", 2).terminal("lose", -1).terminal("pass", 0);
  b.initial("x0", 1);
  b.edge("x0", "a1", "x1").edge("x0", "a2", "x2").edge("x0", "a3", "x3");
  b.edge("x1", "a1", "win").edge("x1", "a2", "lose").edge("x1", "a3", "pass");
  b.edge("x2", "a1", "lose").edge("x2", "a2", "win").edge("x2", "a3", "pass");
  b.edge("x3", "a1", "lose").edge("x3", "a2", "lose").edge("x3", "a3", "pass");
  auto g = SimulationFunction::symmetric_from(3, 4, [](const Counts& c) {
    if (c[1] == 4) return Vec{1, 0, 0};
    if (c[0] == 4) return Vec{0, 1, 0};
    if (c[2] == 4) return Vec{0.5, 0.5, 0};
    return Vec{0, 0, 1};
  });
  b.dependant(DependenceFunction::identity(3)).dependant(DependenceFunction::sampler(g));
  const double theta = 0.5 + 0.5 / std::sqrt(3.0);
  return {"adversarial_offer",
          "offer predicted from four samples; the agent randomizes between a1 and a2",
          b.build(),
          {{"exante_theta", theta, 1e-4, "exact", "pi(a1) / (pi(a1) + pi(a2)), or its mirror"},
           {"exante_p", 0.046, 0.005, "approximate", "pi(a1) + pi(a2)"},
           {"theta_product", 1.0 / 12, 1e-8, "exact", "theta (1-theta) (theta^3 + (1-theta)^3) at the optimum"}}};
}

inline Fixture wine() {
  ProblemBuilder b({"0", "1"});
  b.state("x", 1).state("x0", 0).state("x1", 0);
  b.terminal("x00", 0).terminal("x01", 1).terminal("x10", 0).terminal("x11", -100);
  b.initial("x", 1);
  b.edge("x", "0", "x0").edge("x", "1", "x1");
  b.edge("x0", "0", "x00").edge("x0", "1", "x01");
  b.edge("x1", "0", "x10").edge("x1", "1", "x11");
  b.dependant(DependenceFunction::identity(2)).dependant(builtin::positive_indicator(2, 1, 0));
  return {"wine",
          "the copy drinks whenever the agent might; action 1 is drinking",
          b.build(),
          {{"exante_opt_drink", 0.0, 1e-9, "exact", "pi(1) at the ex ante optimum"},
           {"exante_value", 0.0, 1e-9, "exact", "never drink"}}};
}

inline Fixture staircase(int n = 5) {
  ProblemBuilder b({"0", "1"});
  b.state("s", 1).state("s0", 0).state("s1", 0);
  b.terminal("0", 0).terminal("1", 1).terminal("2", -1);
  b.initial("s", 1);
  b.edge("s", "0", "s0").edge("s", "1", "s1");
  b.edge("s0", "0", "0").edge("s0", "1", "1");
  b.edge("s1", "0", "1").edge("s1", "1", "2");
  b.dependant(DependenceFunction::identity(2)).dependant(builtin::staircase(n, 1));
  // EU = f(1-p) + (1-f)p - fp with f = floor(np)/n, p = pi(1)
  const double p = 0.5, f = std::floor(n * p + 1e-12) / n;
  const std::string name = n == 5 ? "staircase" : "staircase(" + std::to_string(n) + ")";
  return {name,
          "first mover plays floor(n p)/n, then the agent; utilities 0, 1, -1 by number of 1s",
          b.build(),
          {{"exante_eu_half", f * (1 - p) + (1 - f) * p - f * p, 1e-12, "exact", "pi = (1/2, 1/2)"}}};
}

inline Fixture nrho() {
  ProblemBuilder b({"0", "1"});
  b.state("s", 0).terminal("0", 0).terminal("1", 1);
  b.initial("s", 1);
  b.edge("s", "0", "0").edge("s", "1", "1");
  b.dependant(builtin::quartic_logistic(1));
  return {"nrho",
          "single state following 16p^4 / (1 + 16p^4)",
          b.build(),
          {{"gamma_half", 2.0, 1e-9, "exact", "minimal weight at pi = (1/2, 1/2)"}}};
}

// f1 = ((p1 - 1/2)^2 + p3^2/4) p3 is positive inside the simplex yet fails
// the ratio test near (1/2, 1/2, 0).
inline Fixture k3_nonsampleable() {
  PolynomialMap f(3);
  const Vec c{1, -0.5, -0.5};
  auto scaled = [&](double s) { return Vec{s * c[0], s * c[1], s * c[2]}; };
  f.add({0, 0, 0}, {0, 0.5, 0.5});
  f.add({2, 0, 1}, scaled(1));
  f.add({1, 0, 1}, scaled(-1));
  f.add({0, 0, 1}, scaled(0.25));
  f.add({0, 0, 3}, scaled(0.25));
  ProblemBuilder b({"a1", "a2", "a3"});
  b.state("s", 0).terminal("u0", 0).terminal("u1", 1).terminal("u2", 2);
  b.initial("s", 1);
  b.edge("s", "a1", "u0").edge("s", "a2", "u1").edge("s", "a3", "u2");
  b.dependant(DependenceFunction::polynomial(f));
  return {"k3_nonsampleable",
          "three-action polynomial with no finite sampler",
          b.build(),
          {{"scan_t", 1.0 / 3, 0, "exact", "ratio threshold used by the scan"},
           {"scan_finds_violation", 1.0, 0, "exact", "1 when the necessary-condition scan reports a violation"}}};
}

inline const std::map<std::string, std::function<Fixture()>>& registry() {
  static const std::map<std::string, std::function<Fixture()>> r{
      {"newcomb", newcomb},
      {"newcomb75", newcomb75},
      {"sbpd_v1", sbpd_v1},
      {"sbpd_v2", sbpd_v2},
      {"adversarial_offer", adversarial_offer},
      {"wine", wine},
      {"staircase", [] { return staircase(5); }},
      {"nrho", nrho},
      {"k3_nonsampleable", k3_nonsampleable},
  };
  return r;
}

// "staircase(7)" or "staircase:7" -> 7
inline std::optional<int> staircase_param(const std::string& name) {
  for (const char* pre : {"staircase(", "staircase:"}) {
    const std::string p(pre);
    if (name.rfind(p, 0) != 0) continue;
    std::string rest = name.substr(p.size());
    if (p.back() == '(') {
      if (rest.empty() || rest.back() != ')') return std::nullopt;
      rest.pop_back();
    }
    try {
      size_t used = 0;
      const int n = std::stoi(rest, &used);
      if (used != rest.size()) return std::nullopt;
      return n;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace fixtures

inline std::vector<std::string> fixture_names() {
  std::vector<std::string> names;
  for (const auto& [name, f] : fixtures::registry()) names.push_back(name);
  return names;
}

inline Fixture builtin_fixture(const std::string& name) {
  auto it = fixtures::registry().find(name);
  if (it != fixtures::registry().end()) return it->second();
  if (auto n = fixtures::staircase_param(name)) return fixtures::staircase(*n);
  throw InputError("unknown fixture '" + name + "'");
}

// ---- on-disk form: problem fields plus name, description and expected ------

inline Json fixture_to_json(const Fixture& f) {
  Json j;
  j["name"] = f.name;
  j["description"] = f.description;
  const Json body = problem_to_json(f.problem);
  for (const auto& [k, v] : body.items()) j[k] = v;
  Json ex = Json::array();
  for (const auto& e : f.expected)
    ex.push_back(Json{{"key", e.key}, {"value", e.value}, {"tolerance", e.tolerance}, {"kind", e.kind}, {"note", e.note}});
  j["expected"] = ex;
  return j;
}

inline Fixture fixture_from_json(const Json& j, const std::string& fallback_name) {
  Fixture f;
  f.problem = problem_from_json(j);
  f.name = j.value("name", fallback_name);
  f.description = j.value("description", "");
  if (j.contains("expected"))
    for (const auto& e : j.at("expected"))
      f.expected.push_back({e.value("key", ""), e.value("value", 0.0), e.value("tolerance", 0.0), e.value("kind", ""),
                            e.value("note", "")});
  return f;
}

inline Fixture load_fixture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("cannot parse '" + path + "': " + e.what());
  }
  return fixture_from_json(j, std::filesystem::path(path).stem().string());
}

inline std::string fixture_dir() {
  if (const char* env = std::getenv("ANTHROPIC_CDT_FIXTURES"); env && *env) return env;
  return SELFLOC_FIXTURE_DIR;
}

// A path to an existing file wins; then <dir>/<name>.json; then the built-in
// registry.
inline Fixture load_fixture(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(name_or_path, ec)) return load_fixture_file(name_or_path);
  const std::string dir = fixture_dir();
  if (!dir.empty()) {
    const fs::path candidate = fs::path(dir) / (name_or_path + ".json");
    if (fs::is_regular_file(candidate, ec)) return load_fixture_file(candidate.string());
  }
  return builtin_fixture(name_or_path);
}

}  // namespace selfloc
