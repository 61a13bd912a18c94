#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"

using namespace selfloc;

namespace {

struct CliRun {
  int exit = -1;
  std::string out;
};

// stderr is dropped unless the caller redirects it.
CliRun run(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(SELFLOC_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Json structured(const std::string& args) {
  const CliRun r = run(args + " --format structured");
  EXPECT_EQ(r.exit, 0) << args;
  return Json::parse(r.out);
}

}  // namespace

TEST(Cli, SolveListsThreeStationaryPolicies) {
  const Json j = structured("solve sbpd_v1");
  const auto& ps = j.at("stationary").at("policies");
  ASSERT_EQ(ps.size(), 3u);
  EXPECT_NEAR(ps[1]["policy"]["C"].get<double>(), 0.36, 0.01);
  EXPECT_NEAR(ps[2]["policy"]["C"].get<double>(), 0.88, 0.01);
  const CliRun text = run("solve sbpd_v1");
  EXPECT_EQ(text.exit, 0);
  EXPECT_NE(text.out.find("ex-ante-max"), std::string::npos);
}

TEST(Cli, GgtBeliefsWithOverrides) {
  const Json j = structured("beliefs sbpd_v2 --kind ggt --rho 0.8,2 --policy 1,0");
  const auto& deps = j.at("beliefs").at("dependants");
  EXPECT_NEAR(deps[0]["credence"].get<double>(), 1.0 / 6, 1e-12);
  EXPECT_NEAR(deps[1]["credence"].get<double>(), 5.0 / 6, 1e-12);
  const CliRun warned = run("beliefs sbpd_v2 --kind ggt --rho 0.8,2 --policy 1,0", true);
  EXPECT_NE(warned.out.find("warning"), std::string::npos);
}

TEST(Cli, RatifyRefusesStepDependence) {
  const CliRun r = run("ratify wine --kind ggt --policy 0,1", true);
  EXPECT_EQ(r.exit, 1);
  EXPECT_NE(r.out.find("derivative unavailable"), std::string::npos);
}

TEST(Cli, StructuredOutputRoundTrips) {
  for (const char* args : {"validate sbpd_v1", "analyze sbpd_v2 --policy 0.3,0.7", "beliefs newcomb75 --kind gt",
                           "ratify adversarial_offer --policy 0.2,0.3,0.5", "solve sbpd_v2"}) {
    const CliRun r = run(std::string(args) + " --format structured");
    ASSERT_EQ(r.exit, 0) << args;
    EXPECT_EQ(dump(Json::parse(r.out)), r.out) << args;
  }
}

TEST(Cli, AnalyzeCsvSweep) {
  const CliRun r = run("analyze sbpd_v1 --format csv --grid 10");
  ASSERT_EQ(r.exit, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "p,exante_eu,grad_C,cdt_adv_C");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 11);
}

TEST(Cli, ApproxCsv) {
  const CliRun r = run("approx sbpd_v2 --n-list 4,16 --format csv");
  ASSERT_EQ(r.exit, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "N,sup_error,dist_opt");
}

TEST(Cli, InputErrorsExitTwo) {
  EXPECT_EQ(run("analyze sbpd_v1 --policy 0.7,0.7").exit, 2);
  EXPECT_EQ(run("analyze sbpd_v1 --policy 1,0,0").exit, 2);
  EXPECT_EQ(run("analyze no_such_problem").exit, 2);
  EXPECT_EQ(run("solve sbpd_v1 --grid 5").exit, 2);
  EXPECT_EQ(run("frobnicate").exit, 2);
  EXPECT_EQ(run("beliefs sbpd_v2 --kind ggt --rho 1").exit, 2);
  EXPECT_EQ(run("validate sbpd_v1 --format csv").exit, 2);
}

TEST(Cli, RefusalsExitOne) {
  EXPECT_EQ(run("beliefs sbpd_v1 --kind gt").exit, 1);
  EXPECT_EQ(run("beliefs nrho --kind lsgt --policy 0.5,0.5").exit, 1);
}

TEST(Cli, ValidateReportsDiagnostics) {
  const auto dir = std::filesystem::temp_directory_path() / "selfloc_cli_test";
  std::filesystem::create_directories(dir);
  DecisionProblem p = load_fixture("sbpd_v1").problem;
  p.initial[0] = 0.5;
  const auto path = (dir / "broken.json").string();
  save_problem_file(p, path);
  const CliRun r = run("validate " + path + " --format structured");
  EXPECT_EQ(r.exit, 2);
  EXPECT_NE(r.out.find("initial-sum"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Cli, CompileSimWritesExpansion) {
  const auto dir = std::filesystem::temp_directory_path() / "selfloc_cli_sim";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "expanded.json").string();
  const CliRun r = run("compile-sim sbpd_v1 --out " + path);
  EXPECT_EQ(r.exit, 0) << r.out;
  const DecisionProblem q = load_problem_file(path);
  EXPECT_EQ(q.num_states(), 27);
  EXPECT_EQ(run("compile-sim sbpd_v2").exit, 1);
  std::filesystem::remove_all(dir);
}

TEST(Cli, SimulateIsDeterministic) {
  const CliRun a = run("simulate sbpd_v1 --rollouts 2000 --seed 5 --format structured");
  const CliRun b = run("simulate sbpd_v1 --rollouts 2000 --seed 5 --format structured");
  EXPECT_EQ(a.exit, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, VerifyPaperPasses) {
  const CliRun r = run("verify-paper --seed 3 --format structured");
  EXPECT_EQ(r.exit, 0) << r.out;
  EXPECT_TRUE(Json::parse(r.out).at("passed").get<bool>());
}

TEST(Cli, ExportWritesFixtures) {
  const auto dir = std::filesystem::temp_directory_path() / "selfloc_cli_export";
  const CliRun r = run("export --out " + dir.string());
  EXPECT_EQ(r.exit, 0);
  for (const auto& name : fixture_names()) {
    const Fixture f = load_fixture_file((dir / (name + ".json")).string());
    EXPECT_EQ(dump(fixture_to_json(f)), dump(fixture_to_json(builtin_fixture(name)))) << name;
  }
  std::filesystem::remove_all(dir);
}
