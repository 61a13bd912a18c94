#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfloc/dependence.hpp"
#include "selfloc/error.hpp"
#include "selfloc/problem.hpp"
#include "selfloc/simcompile.hpp"

namespace selfloc {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(where + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace detail

// ---- dependence specs ---------------------------------------------------------

inline Json dependence_to_json(const DependenceFunction& F, const std::vector<std::string>& actions) {
  Json j;
  j["kind"] = F.kind();
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ConstantDep>) j["policy"] = d.policy;
        else if constexpr (std::is_same_v<T, LinearDep>) j["columns"] = d.columns;
        else if constexpr (std::is_same_v<T, PolynomialDep>) {
          Json terms = Json::array();
          for (const auto& [e, c] : d.poly.terms()) terms.push_back(Json{{"exp", e}, {"coef", c}});
          j["terms"] = terms;
        } else if constexpr (std::is_same_v<T, SamplerDep>) {
          j["n"] = d.g.sample_count();
          j["symmetric"] = d.g.is_symmetric();
          Json table = Json::object();
          for (const auto& [key, v] : d.g.table()) {
            std::string k;
            if (d.g.is_symmetric()) k = detail::join_ints(key);
            else
              for (size_t i = 0; i < key.size(); ++i) k += (i ? "," : "") + actions[key[i]];
            table[k] = v;
          }
          j["table"] = table;
        } else if constexpr (std::is_same_v<T, BlackBoxDep>) {
          if (d.name.empty()) throw InputError("ad hoc black-box dependence cannot be serialized");
          j["name"] = d.name;
          for (const auto& [k, v] : d.params) {
            if (v == std::floor(v)) j[k] = static_cast<long long>(v);
            else j[k] = v;
          }
        }
      },
      F.variant());
  return j;
}

inline DependenceFunction dependence_from_json(const Json& j, const std::vector<std::string>& actions,
                                               const std::string& where) {
  const int k = static_cast<int>(actions.size());
  const std::string kind = detail::get<std::string>(j, "kind", where);
  if (kind == "identity") return DependenceFunction::identity(k);
  if (kind == "constant") return DependenceFunction::constant(detail::get<Vec>(j, "policy", where));
  if (kind == "linear") return DependenceFunction::linear(detail::get<std::vector<Vec>>(j, "columns", where));
  if (kind == "poly") {
    PolynomialMap p(k);
    for (const auto& t : detail::get<Json>(j, "terms", where))
      p.add(detail::get<Counts>(t, "exp", where), detail::get<Vec>(t, "coef", where));
    return DependenceFunction::polynomial(std::move(p));
  }
  if (kind == "sampler") {
    const int n = detail::get<int>(j, "n", where);
    const bool sym = j.value("symmetric", true);
    const Json table = detail::get<Json>(j, "table", where);
    if (sym) {
      std::map<Counts, Vec> m;
      for (const auto& [key, v] : table.items()) {
        Counts c;
        for (const auto& part : detail::split(key, ',')) {
          try {
            c.push_back(std::stoi(part));
          } catch (const std::exception&) {
            throw InputError(where + ": bad sampler key '" + key + "'");
          }
        }
        if (static_cast<int>(c.size()) != k || total(c) != n) throw InputError(where + ": bad sampler key '" + key + "'");
        m[c] = v.get<Vec>();
      }
      return DependenceFunction::sampler(SimulationFunction::symmetric(k, n, std::move(m)));
    }
    std::map<std::vector<int>, Vec> m;
    for (const auto& [key, v] : table.items()) {
      std::vector<int> t;
      for (const auto& label : detail::split(key, ',')) {
        auto it = std::find(actions.begin(), actions.end(), label);
        if (it == actions.end()) throw InputError(where + ": unknown action '" + label + "' in sampler key");
        t.push_back(static_cast<int>(it - actions.begin()));
      }
      if (static_cast<int>(t.size()) != n) throw InputError(where + ": bad sampler key '" + key + "'");
      m[t] = v.get<Vec>();
    }
    return DependenceFunction::sampler(SimulationFunction::tabulate(k, n, [&](const std::vector<int>& t) {
      auto it = m.find(t);
      if (it == m.end()) throw InputError(where + ": sampler table is missing an entry");
      return it->second;
    }));
  }
  if (kind == "builtin") {
    std::map<std::string, double> params;
    for (const auto& [key, v] : j.items())
      if (key != "kind" && key != "name") {
        if (!v.is_number()) throw InputError(where + ": builtin parameter '" + key + "' must be numeric");
        params[key] = v.get<double>();
      }
    return builtin::make(detail::get<std::string>(j, "name", where), params, k);
  }
  throw InputError(where + ": unknown dependence kind '" + kind + "'");
}

// ---- problems ---------------------------------------------------------------

// Indices are 1-based in files.
inline Json problem_to_json(const DecisionProblem& p) {
  Json j;
  j["actions"] = p.actions;
  Json states = Json::array();
  for (const auto& s : p.states) {
    Json e;
    e["id"] = s.id;
    e["terminal"] = s.terminal;
    if (s.terminal) e["utility"] = *s.utility;
    else e["dependant"] = s.dependant + 1;
    states.push_back(e);
  }
  j["states"] = states;
  Json init = Json::object();
  for (int s = 0; s < p.num_states(); ++s)
    if (p.initial[s] != 0) init[p.states[s].id] = p.initial[s];
  j["initial"] = init;
  Json tr = Json::object();
  for (int s = 0; s < p.num_states(); ++s) {
    if (p.states[s].terminal) continue;
    for (int a = 0; a < p.num_actions(); ++a) {
      Json row = Json::object();
      for (int t = 0; t < p.num_states(); ++t)
        if (p.transitions[s][a][t] != 0) row[p.states[t].id] = p.transitions[s][a][t];
      tr[p.states[s].id + "/" + p.actions[a]] = row;
    }
  }
  j["transitions"] = tr;
  Json deps = Json::array();
  for (const auto& F : p.dependence) deps.push_back(dependence_to_json(F, p.actions));
  j["dependants"] = deps;
  return j;
}

inline DecisionProblem problem_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("problem file must hold a JSON object");
  DecisionProblem p;
  p.actions = detail::get<std::vector<std::string>>(j, "actions", "problem");
  std::map<std::string, int> idx;
  for (const auto& e : detail::get<Json>(j, "states", "problem")) {
    StateRecord s;
    s.id = detail::get<std::string>(e, "id", "state");
    s.terminal = e.value("terminal", false);
    if (e.contains("utility")) s.utility = detail::get<double>(e, "utility", "state " + s.id);
    if (e.contains("dependant")) s.dependant = detail::get<int>(e, "dependant", "state " + s.id) - 1;
    idx[s.id] = static_cast<int>(p.states.size());
    p.states.push_back(s);
  }
  const int S = p.num_states();
  auto state = [&](const std::string& id, const std::string& where) {
    auto it = idx.find(id);
    if (it == idx.end()) throw InputError(where + ": unknown state '" + id + "'");
    return it->second;
  };
  p.initial.assign(S, 0.0);
  const Json initial = detail::get<Json>(j, "initial", "problem");
  for (const auto& [id, v] : initial.items())
    p.initial[state(id, "initial")] = v.get<double>();
  p.transitions.assign(S, {});
  for (int s = 0; s < S; ++s)
    if (!p.states[s].terminal) p.transitions[s].assign(p.num_actions(), Vec(S, 0.0));
  const Json transitions = detail::get<Json>(j, "transitions", "problem");
  for (const auto& [key, row] : transitions.items()) {
    int s = -1, a = -1;
    for (int b = 0; b < p.num_actions() && s < 0; ++b) {
      const std::string suffix = "/" + p.actions[b];
      if (key.size() > suffix.size() && key.compare(key.size() - suffix.size(), suffix.size(), suffix) == 0) {
        auto it = idx.find(key.substr(0, key.size() - suffix.size()));
        if (it != idx.end()) {
          s = it->second;
          a = b;
        }
      }
    }
    if (s < 0) throw InputError("transitions: cannot parse key '" + key + "' as state/action");
    if (p.states[s].terminal) throw InputError("transitions: terminal state '" + p.states[s].id + "' has a row");
    for (const auto& [to, v] : row.items()) p.transitions[s][a][state(to, "transitions[" + key + "]")] = v.get<double>();
  }
  int n = 0;
  for (const auto& d : detail::get<Json>(j, "dependants", "problem")) {
    ++n;
    p.dependence.push_back(dependence_from_json(d, p.actions, "dependants[" + std::to_string(n) + "]"));
  }
  return p;
}

inline DecisionProblem parse_problem(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("cannot parse problem file: ") + e.what());
  }
  return problem_from_json(j);
}

inline DecisionProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem(ss.str());
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void save_problem_file(const DecisionProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << dump(problem_to_json(p));
}

inline Json expanded_to_json(const ExpandedProblem& ex, const DecisionProblem& original) {
  Json j = problem_to_json(ex.problem);
  Json bm = Json::object();
  for (int x = 0; x < ex.problem.num_states(); ++x) {
    std::vector<std::string> prefix;
    for (int a : ex.back_map[x].prefix) prefix.push_back(original.actions[a]);
    bm[ex.problem.states[x].id] = Json{{"state", original.states[ex.back_map[x].original].id}, {"prefix", prefix}};
  }
  j["back_map"] = bm;
  return j;
}

}  // namespace selfloc
