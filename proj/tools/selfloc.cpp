#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selfloc.hpp"
#include "selfloc/report.hpp"

using namespace selfloc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRefused = 1;
constexpr int kExitInput = 2;

struct RunConfig {
  std::string command;
  std::string problem;
  std::string policy;
  std::string kind;
  std::string rho;
  int grid = 0;  // 0: command default
  int restarts = 16;
  double tol = kRatifyTol;
  std::string n_list = "4,8,16,32,64";
  std::size_t rollouts = 100'000;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string out;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(std::string("bad ") + what + " entry '" + item + "'");
    }
  }
  if (v.empty()) throw InputError(std::string("empty ") + what);
  return v;
}

Vec policy_of(const RunConfig& cfg, const DecisionProblem& p) {
  if (cfg.policy.empty()) return Policy::uniform(p.num_actions()).probs();
  return parse_policy(cfg.policy, p.num_actions()).probs();
}

std::optional<Vec> rho_of(const RunConfig& cfg, const DecisionProblem& p) {
  if (cfg.rho.empty()) return std::nullopt;
  Vec r = parse_list(cfg.rho, "rho");
  if (static_cast<int>(r.size()) != p.num_dependants())
    throw InputError("--rho needs " + std::to_string(p.num_dependants()) + " weights");
  return r;
}

BeliefKind kind_of(const RunConfig& cfg, BeliefKind dflt) {
  return cfg.kind.empty() ? dflt : parse_belief_kind(cfg.kind);
}

DecisionProblem load(const RunConfig& cfg) {
  DecisionProblem p = load_fixture(cfg.problem).problem;
  require_valid(p);
  return p;
}

// GGT beliefs honour --rho; weights under Gamma are allowed with a warning.
BeliefSystem beliefs_for(const RunConfig& cfg, const DecisionProblem& p, BeliefKind kind, const Vec& pi,
                         Json* components = nullptr) {
  if (kind != BeliefKind::GGT) {
    if (!cfg.rho.empty()) throw InputError("--rho only applies to --kind ggt");
    return beliefs_of_kind(p, kind, pi);
  }
  const GGTComponents comps = ggt_components(p, pi, rho_of(cfg, p), RhoCheck::Permissive);
  for (size_t j = 0; j < comps.dependants.size(); ++j)
    if (!comps.dependants[j].admissible)
      std::cerr << "warning: rho for dependant " << j + 1 << " is below Gamma = " << comps.dependants[j].gamma
                << "; transforms may leave the simplex\n";
  if (components) *components = ggt_components_report(comps);
  return ggt_beliefs(p, pi, comps);
}

StationaryConfig stationary_config(const RunConfig& cfg) {
  StationaryConfig s;
  if (cfg.grid > 0) s.grid = cfg.grid;
  s.restarts = cfg.restarts;
  s.tol = cfg.tol;
  s.seed = cfg.seed;
  return s;
}

OptimizeConfig optimize_config(const RunConfig& cfg) {
  OptimizeConfig o;
  if (cfg.grid > 0) o.grid = cfg.grid;
  return o;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

struct Output {
  Json report;
  std::string csv;  // set by commands with a CSV form
  int exit = kExitOk;
  std::string failure;
};

Output cmd_validate(const RunConfig& cfg) {
  const DecisionProblem p = load_fixture(cfg.problem).problem;
  Output o;
  const auto diags = validate(p);
  o.report["diagnostics"] = diagnostics_report(diags);
  if (diags.empty()) o.report["termination"] = termination_report(p, check_termination(p));
  o.report["valid"] = diags.empty();
  if (!diags.empty()) {
    o.exit = kExitInput;
    o.failure = "error: invalid problem: " + diags.front().code + " at " + diags.front().location;
  }
  return o;
}

Output cmd_analyze(const RunConfig& cfg) {
  const DecisionProblem p = load(cfg);
  Output o;
  if (cfg.format == "csv") {
    if (p.num_actions() != 2) throw InputError("the CSV sweep needs a two-action problem");
    const BeliefKind kind = kind_of(cfg, BeliefKind::GGT);
    const int G = cfg.grid > 0 ? cfg.grid : 100;
    std::string csv = "p,exante_eu,grad_C,cdt_adv_C\n";
    for (int i = 0; i <= G; ++i) {
      const double x = static_cast<double>(i) / G;
      const Vec pi{x, 1 - x};
      std::string grad, adv;
      try {
        grad = num(ex_ante_grad(p, pi)[0]);
      } catch (const DerivativeUnavailable&) {
      }
      try {
        const Vec eu = cdt_eus(p, beliefs_of_kind(p, kind, pi, rho_of(cfg, p), RhoCheck::Permissive), pi);
        adv = num(eu[0] - eu[1]);
      } catch (const DerivativeUnavailable&) {
      } catch (const NotApplicable&) {
      }
      csv += num(x) + "," + num(ex_ante_eu(p, pi)) + "," + grad + "," + adv + "\n";
    }
    o.csv = csv;
    return o;
  }
  const Vec pi = policy_of(cfg, p);
  const ChainSolution sol = solve_at(p, pi);
  o.report["policy"] = by_action(p, pi);
  o.report["chain"] = chain_report(p, sol);
  try {
    o.report["gradient"] = by_action(p, ex_ante_grad(p, pi));
  } catch (const DerivativeUnavailable& e) {
    o.report["gradient"] = nullptr;
    o.report["gradient_note"] = e.what();
  }
  return o;
}

Output cmd_beliefs(const RunConfig& cfg) {
  const DecisionProblem p = load(cfg);
  const Vec pi = policy_of(cfg, p);
  Output o;
  Json comps;
  const BeliefSystem b = beliefs_for(cfg, p, kind_of(cfg, BeliefKind::GT), pi, &comps);
  o.report["beliefs"] = beliefs_report(p, b);
  if (!comps.is_null()) o.report["ggt"] = comps;
  o.report["audit"] = [&] {
    const AuditReport a = audit_beliefs(p, pi, b);
    return Json{{"faithful", a.faithful}, {"fanciful", a.fanciful}, {"details", a.details}};
  }();
  return o;
}

Output cmd_ratify(const RunConfig& cfg) {
  const DecisionProblem p = load(cfg);
  const Vec pi = policy_of(cfg, p);
  Output o;
  const BeliefSystem b = beliefs_for(cfg, p, kind_of(cfg, BeliefKind::GGT), pi);
  o.report["ratify"] = ratify_report(p, is_ratifiable(p, b, pi, cfg.tol));
  return o;
}

Output cmd_solve(const RunConfig& cfg) {
  const DecisionProblem p = load(cfg);
  Output o;
  try {
    o.report["stationary"] = policy_set_report(p, find_stationary(p, stationary_config(cfg)));
  } catch (const DerivativeUnavailable& e) {
    o.report["stationary"] = Json{{"refused", e.what()}};
  }
  o.report["optimum"] = optimum_report(p, optimize_ex_ante(p, optimize_config(cfg)));
  return o;
}

Output cmd_compile_sim(const RunConfig& cfg) {
  const DecisionProblem p = load(cfg);
  const Vec pi = policy_of(cfg, p);
  const auto g = samplers_of(p);
  const ExpandedProblem ex = expand_problem(p, g);
  Output o;
  Json samplers = Json::array();
  for (size_t j = 0; j < g.size(); ++j)
    samplers.push_back(Json{{"dependant", j + 1}, {"N", g[j].sample_count()}, {"symmetric", g[j].is_symmetric()}});
  o.report["samplers"] = samplers;
  o.report["expanded_states"] = ex.problem.num_states();
  o.report["policy"] = by_action(p, pi);
  const ExpansionCheck check = verify_expansion(p, g, ex, pi);
  o.report["check"] = expansion_report(check);
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw InputError("cannot write '" + cfg.out + "'");
    f << dump(expanded_to_json(ex, p));
  }
  if (!check.passed()) {
    o.exit = kExitRefused;
    o.failure = "check failed: expansion is not equivalent";
  }
  return o;
}

Output cmd_approx(const RunConfig& cfg) {
  const DecisionProblem p = load(cfg);
  std::vector<int> Ns;
  for (double x : parse_list(cfg.n_list, "--n-list")) {
    if (x < 1 || x != std::floor(x)) throw InputError("--n-list entries must be positive integers");
    Ns.push_back(static_cast<int>(x));
  }
  const ConvergenceReport rep = convergence_sequence(p, Ns, stationary_config(cfg), optimize_config(cfg));
  Output o;
  o.report["convergence"] = convergence_report(rep);
  std::string csv = "N,sup_error,dist_opt\n";
  for (const auto& r : rep.rows) csv += std::to_string(r.N) + "," + num(r.sup_error) + "," + num(r.distance_to_optimal) + "\n";
  o.csv = csv;
  return o;
}

Output cmd_simulate(const RunConfig& cfg) {
  const DecisionProblem p = load(cfg);
  const Vec pi = policy_of(cfg, p);
  const MonteCarloReport r = validate(p, pi, cfg.rollouts, cfg.seed);
  Output o;
  o.report["policy"] = by_action(p, pi);
  o.report["seed"] = cfg.seed;
  o.report["montecarlo"] = montecarlo_report(r);
  if (!r.pass()) {
    o.exit = kExitRefused;
    o.failure = "check failed: Monte Carlo validation";
  }
  return o;
}

Output cmd_verify(const RunConfig& cfg) {
  Output o;
  Json list = Json::array();
  bool all = true;
  for (const auto& cr : criteria()) {
    const CriterionResult r = run_criterion(cr, cfg.seed);
    all = all && r.passed;
    if (cfg.format == "text")
      std::cerr << "criterion " << r.id << ": " << (r.passed ? "PASS" : "FAIL") << "  " << r.title << "\n";
    list.push_back(Json{{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail}});
  }
  o.report["seed"] = cfg.seed;
  o.report["criteria"] = list;
  o.report["passed"] = all;
  if (!all) {
    o.exit = kExitRefused;
    o.failure = "check failed: acceptance suite";
  }
  return o;
}

Output cmd_export(const RunConfig& cfg) {
  const std::string dir = cfg.out.empty() ? "fixtures" : cfg.out;
  std::filesystem::create_directories(dir);
  Output o;
  Json files = Json::array();
  for (const auto& name : fixture_names()) {
    const std::string path = (std::filesystem::path(dir) / (name + ".json")).string();
    std::ofstream f(path);
    if (!f) throw InputError("cannot write '" + path + "'");
    f << dump(fixture_to_json(builtin_fixture(name)));
    files.push_back(path);
  }
  o.report["written"] = files;
  return o;
}

void emit(const RunConfig& cfg, const Output& o, bool to_out_file) {
  std::ostringstream os;
  if (cfg.format == "csv") {
    if (o.csv.empty()) throw InputError("--format csv is available for analyze and approx");
    os << o.csv;
  } else if (cfg.format == "structured") {
    Json j;
    j["command"] = cfg.command;
    if (!cfg.problem.empty()) j["problem"] = cfg.problem;
    for (const auto& [k, v] : o.report.items()) j[k] = v;
    os << dump(j);
  } else {
    render_text(os, o.report);
  }
  if (to_out_file && !cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) throw InputError("cannot write '" + cfg.out + "'");
    f << os.str();
  } else {
    std::cout << os.str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Policy-dependent decision problems: chains, self-locating beliefs, ratifiability"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_problem = [&](CLI::App* s) {
    s->add_option("problem", cfg.problem, "fixture name or problem file")->required();
  };
  auto add_format = [&](CLI::App* s) {
    s->add_option("--format", cfg.format, "text, structured or csv")
        ->check(CLI::IsMember({"text", "structured", "csv"}));
  };
  auto add_policy = [&](CLI::App* s) {
    s->add_option("--policy", cfg.policy, "comma-separated action probabilities (default uniform)");
  };
  auto add_kind = [&](CLI::App* s) {
    s->add_option("--kind", cfg.kind, "belief system")->check(CLI::IsMember({"gt", "gsgt", "lsgt", "ggt"}));
    s->add_option("--rho", cfg.rho, "GGT weights, one per dependant");
  };
  auto add_search = [&](CLI::App* s) {
    s->add_option("--grid", cfg.grid, "grid resolution")->check(CLI::Range(10, 100'000'000));
    s->add_option("--restarts", cfg.restarts, "random restarts per face")->check(CLI::NonNegativeNumber);
    s->add_option("--tol", cfg.tol, "tolerance relative to the utility range")->check(CLI::PositiveNumber);
    s->add_option("--seed", cfg.seed, "random seed");
  };
  auto add_out = [&](CLI::App* s, const std::string& what) { s->add_option("--out", cfg.out, what); };

  auto* v = app.add_subcommand("validate", "check a problem and its termination");
  add_problem(v), add_format(v), add_out(v, "write the report here");

  auto* an = app.add_subcommand("analyze", "chain quantities and gradient at a policy, or a CSV sweep");
  add_problem(an), add_format(an), add_policy(an), add_kind(an), add_out(an, "write the report here");
  an->add_option("--grid", cfg.grid, "sweep resolution for --format csv")->check(CLI::Range(10, 100'000'000));

  auto* be = app.add_subcommand("beliefs", "self-locating beliefs at a policy");
  add_problem(be), add_format(be), add_policy(be), add_kind(be), add_out(be, "write the report here");

  auto* ra = app.add_subcommand("ratify", "ratifiability at a policy");
  add_problem(ra), add_format(ra), add_policy(ra), add_kind(ra), add_out(ra, "write the report here");
  ra->add_option("--tol", cfg.tol, "tolerance relative to the utility range")->check(CLI::PositiveNumber);

  auto* so = app.add_subcommand("solve", "stationary set and ex ante optima");
  add_problem(so), add_format(so), add_search(so), add_out(so, "write the report here");

  auto* cs = app.add_subcommand("compile-sim", "synthesize samplers, expand and check the expansion");
  add_problem(cs), add_format(cs), add_policy(cs), add_out(cs, "write the expanded problem here");

  auto* ap = app.add_subcommand("approx", "convergence of Bernstein approximations");
  add_problem(ap), add_format(ap), add_search(ap), add_out(ap, "write the report here");
  ap->add_option("--n-list", cfg.n_list, "sample counts, comma-separated");

  auto* si = app.add_subcommand("simulate", "Monte Carlo check of the chain solution");
  add_problem(si), add_format(si), add_policy(si), add_out(si, "write the report here");
  si->add_option("--rollouts", cfg.rollouts, "number of histories")->check(CLI::PositiveNumber);
  si->add_option("--seed", cfg.seed, "random seed");

  auto* vp = app.add_subcommand("verify-paper", "run the acceptance suite over the fixtures");
  add_format(vp), add_out(vp, "write the report here");
  vp->add_option("--seed", cfg.seed, "random seed");

  auto* ex = app.add_subcommand("export", "write the built-in fixtures as problem files");
  add_format(ex), add_out(ex, "target directory (default ./fixtures)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  const std::map<std::string, Output (*)(const RunConfig&)> commands{
      {"validate", cmd_validate}, {"analyze", cmd_analyze},         {"beliefs", cmd_beliefs},
      {"ratify", cmd_ratify},     {"solve", cmd_solve},             {"compile-sim", cmd_compile_sim},
      {"approx", cmd_approx},     {"simulate", cmd_simulate},       {"verify-paper", cmd_verify},
      {"export", cmd_export}};
  // --out names a side file for these two
  const bool out_is_report = cfg.command != "compile-sim" && cfg.command != "export";
  try {
    if (cfg.format == "csv" && cfg.command != "analyze" && cfg.command != "approx")
      throw InputError("--format csv is available for analyze and approx");
    const Output o = commands.at(cfg.command)(cfg);
    emit(cfg, o, out_is_report);
    if (!o.failure.empty()) std::cerr << o.failure << "\n";
    return o.exit;
  } catch (const DerivativeUnavailable& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const NotApplicable& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const CapExceeded& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const RangeViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const TerminationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}
