#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "selfloc/beliefs.hpp"
#include "selfloc/cdt.hpp"
#include "selfloc/chain.hpp"
#include "selfloc/io.hpp"
#include "selfloc/montecarlo.hpp"
#include "selfloc/problem.hpp"
#include "selfloc/simcompile.hpp"

// Structured reports. Field order is fixed so that a dump, parse, dump cycle
// reproduces the same bytes.

namespace selfloc {

inline Json by_state(const DecisionProblem& p, const Vec& v, bool nonterminal_only = false) {
  Json j = Json::object();
  for (int s = 0; s < p.num_states(); ++s)
    if (!nonterminal_only || !p.states[s].terminal) j[p.states[s].id] = v[s];
  return j;
}

inline Json by_action(const DecisionProblem& p, const Vec& v) {
  Json j = Json::object();
  for (int a = 0; a < p.num_actions(); ++a) j[p.actions[a]] = v[a];
  return j;
}

inline Json diagnostics_report(const std::vector<Diagnostic>& d) {
  Json j = Json::array();
  for (const auto& x : d) j.push_back(Json{{"code", x.code}, {"location", x.location}, {"message", x.message}});
  return j;
}

inline Json termination_report(const DecisionProblem& p, const TerminationVerdict& v) {
  Json j;
  j["terminates"] = v.terminates;
  if (!v.terminates) {
    Json sigma = Json::array();
    for (int a : v.sigma) sigma.push_back(p.actions[a]);
    Json trap = Json::array();
    for (int s : v.trap) trap.push_back(p.states[s].id);
    j["sigma"] = sigma;
    j["trap"] = trap;
  }
  return j;
}

inline Json chain_report(const DecisionProblem& p, const ChainSolution& sol) {
  Json j;
  j["ex_ante_eu"] = sol.ex_ante_eu;
  j["visits"] = by_state(p, sol.visits);
  j["values"] = by_state(p, sol.values, true);
  return j;
}

inline Json beliefs_report(const DecisionProblem& p, const BeliefSystem& b) {
  Json j;
  j["kind"] = to_string(b.kind);
  j["anchor"] = by_action(p, b.anchor);
  j["credences"] = by_state(p, b.credences, true);
  Json per = Json::array();
  for (int d = 0; d < p.num_dependants(); ++d) {
    double c = 0;
    for (int s = 0; s < p.num_states(); ++s)
      if (!p.states[s].terminal && p.states[s].dependant == d) c += b.credences[s];
    Json e;
    e["dependant"] = d + 1;
    e["kind"] = p.dependence[d].kind();
    if (d < static_cast<int>(b.weights.size())) e["weight"] = b.weights[d];
    e["credence"] = c;
    Json tau = Json::object();
    for (int a = 0; a < p.num_actions(); ++a) tau[p.actions[a]] = b.transforms[d][a];
    e["transforms"] = tau;
    per.push_back(e);
  }
  j["dependants"] = per;
  j["degenerate_uniform"] = b.degenerate_uniform;
  j["admissible"] = b.admissible;
  return j;
}

inline Json ggt_components_report(const GGTComponents& c) {
  Json j = Json::array();
  for (size_t d = 0; d < c.dependants.size(); ++d)
    j.push_back(Json{{"dependant", d + 1},
                     {"gamma", c.dependants[d].gamma},
                     {"rho", c.dependants[d].rho},
                     {"admissible", c.dependants[d].admissible}});
  return j;
}

inline Json ratify_report(const DecisionProblem& p, const RatifiabilityReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["anchor"] = by_action(p, r.anchor);
  j["eu"] = by_action(p, r.eu);
  j["advantage"] = by_action(p, r.advantage);
  j["ratifiable"] = r.ratifiable;
  j["tol"] = r.tol;
  j["scale"] = r.scale;
  return j;
}

inline Json policy_set_report(const DecisionProblem& p, const PolicySet& s) {
  Json j;
  Json list = Json::array();
  for (const auto& e : s.policies) {
    Json x;
    x["policy"] = by_action(p, e.policy);
    if (!e.classification.empty()) x["classification"] = e.classification;
    x["eu"] = e.eu;
    if (!e.grad.empty()) x["grad"] = by_action(p, e.grad);
    list.push_back(x);
  }
  j["policies"] = list;
  j["everywhere_stationary"] = s.everywhere_stationary;
  j["empty"] = s.empty_flagged;
  return j;
}

inline Json optimum_report(const DecisionProblem& p, const OptimumResult& o) {
  Json j;
  j["value"] = o.value;
  Json list = Json::array();
  for (const auto& e : o.argmax.policies) list.push_back(by_action(p, e.policy));
  j["argmax"] = list;
  return j;
}

inline Json convergence_report(const ConvergenceReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"N", row.N},
                        {"sup_error", row.sup_error},
                        {"dist_opt", row.distance_to_optimal},
                        {"stationary", row.stationary.policies.size()},
                        {"optimum", row.optimum.value}});
  return Json{{"original_optimum", r.original.value}, {"rows", rows}};
}

inline Json expansion_report(const ExpansionCheck& c) {
  Json j;
  j["eu_gap"] = c.eu_gap;
  j["credence_gap"] = c.credence_gap;
  j["counterfactual_gap"] = c.counterfactual_gap;
  j["transition_gap"] = c.transition_gap;
  j["eu_ok"] = c.eu_ok;
  j["credence_ok"] = c.credence_ok;
  j["counterfactual_ok"] = c.counterfactual_ok;
  j["transition_ok"] = c.transition_ok;
  j["passed"] = c.passed();
  return j;
}

inline Json montecarlo_report(const MonteCarloReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(Json{{"name", c.name},
                          {"expected", c.expected},
                          {"mean", c.mean},
                          {"se", c.se},
                          {"z", std::isfinite(c.z) ? Json(c.z) : Json(nullptr)},
                          {"pass", c.pass}});
  return Json{{"rollouts", r.rollouts}, {"mean_length", r.mean_length}, {"checks", checks}, {"pass", r.pass()}};
}

// Indented plain-text view of a report.
inline void render_text(std::ostream& os, const Json& j, int indent = 0) {
  const std::string pad(indent, ' ');
  auto scalar = [](const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) {
      std::ostringstream s;
      s.precision(10);
      s << v.get<double>();
      return s.str();
    }
    return v.dump();
  };
  auto flat = [](const Json& v) {
    if (v.is_array()) return std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_primitive(); });
    if (v.is_object()) return std::all_of(v.begin(), v.end(), [](const Json& x) { return x.is_primitive(); });
    return true;
  };
  auto inline_form = [&](const Json& v) {
    if (v.is_primitive()) return scalar(v);
    std::string s = v.is_array() ? "(" : "{";
    bool first = true;
    for (const auto& [k, x] : v.items()) {
      s += (first ? "" : ", ") + (v.is_object() ? k + "=" : std::string()) + scalar(x);
      first = false;
    }
    return s + (v.is_array() ? ")" : "}");
  };
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (flat(v)) os << pad << k << ": " << inline_form(v) << "\n";
      else {
        os << pad << k << ":\n";
        render_text(os, v, indent + 2);
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (flat(v)) os << pad << "- " << inline_form(v) << "\n";
      else {
        os << pad << "-\n";
        render_text(os, v, indent + 2);
      }
    }
  } else {
    os << pad << scalar(j) << "\n";
  }
}

}  // namespace selfloc
