#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tlgerm/harness.hpp"

using namespace tlgerm;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = TLGERM_SCENARIO_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tlgerm_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kMinimal = R"(
fluxes:
  - {family: quadratic, a: 0, c: 1, f_max: 1}
  - {family: quadratic, a: 0, c: 1, f_max: 1}
  - {family: quadratic, a: 0, c: 1, f_max: 0.5}
signal:
  - {duration: 0.4, phase: 1, A: 1}
  - {duration: 0.6, phase: 2, A: 0.5}
run: {model: meso, eps: 0.25, T: 1}
)";

}  // namespace

TEST(Scenario, BundledExampleParsesAndRoundTrips) {
  auto sc = parse_scenario(kScenarios + "/example1.yaml");
  EXPECT_TRUE(sc.notes.empty());
  EXPECT_EQ(sc.run.model, Model::meso);
  EXPECT_EQ(sc.signal.size(), 2u);
  EXPECT_DOUBLE_EQ(sc.fluxes[2].f_max(), 0.5);
  auto again = parse_scenario_text(to_yaml(sc));
  EXPECT_TRUE(same_scenario(sc, again));
  EXPECT_EQ(to_yaml(again), to_yaml(sc));

  Field f = initial_field(sc);
  EXPECT_EQ(f.cells(), 1600u);
  EXPECT_NEAR(f.u[0][5], 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(f.u[1][5], 0.0);
}

TEST(Scenario, AllBundledScenariosParse) {
  for (const char* name : {"example1.yaml", "example2.yaml", "two_to_one.yaml"})
    EXPECT_NO_THROW(parse_scenario(kScenarios + "/" + name)) << name;
  auto conv = parse_scenario(kScenarios + "/two_to_one.yaml");
  EXPECT_EQ(conv.layout(), Orientation::converging);
  Field f = initial_field(conv);
  EXPECT_NEAR(f.u[1][0], 0.3, 1e-12);
  EXPECT_DOUBLE_EQ(f.u[0][0], 0.0);
}

TEST(Scenario, CapViolationNamesTheAssumption) {
  std::string text = kMinimal;
  text.replace(text.find("A: 0.5"), 6, "A: 0.7");
  try {
    parse_scenario_text(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("flux-limiter cap"), std::string::npos) << e.what();
  }
}

TEST(Scenario, MissingSectionsAreNoted) {
  auto sc = parse_scenario_text(kMinimal);
  ASSERT_EQ(sc.notes.size(), 2u);
  EXPECT_NE(sc.notes[0].find("grid section missing"), std::string::npos);
  EXPECT_EQ(sc.grid, GridSpec{});
}

TEST(Scenario, Errors) {
  EXPECT_THROW(parse_scenario_text("fluxes: [unclosed"), ValidationError);
  EXPECT_THROW(parse_scenario_text("- 1\n- 2\n"), ValidationError);
  EXPECT_THROW(parse_scenario(kScenarios + "/does_not_exist.yaml"), ValidationError);
  std::string bad_sum = kMinimal;
  bad_sum.replace(bad_sum.find("duration: 0.6"), 13, "duration: 0.5");
  EXPECT_THROW(parse_scenario_text(bad_sum), ValidationError);
  std::string bad_tol = std::string(kMinimal) + "tolerances: {nonsense: 1}\n";
  EXPECT_THROW(parse_scenario_text(bad_tol), ValidationError);
  std::string bad_init = std::string(kMinimal) + "initial:\n  - {branch: 1, from: -1, to: 0, rho: 0.2}\n";
  EXPECT_THROW(parse_scenario_text(bad_init), ValidationError);
}

TEST(Csv, OutputIsDeterministic) {
  auto sc = parse_scenario(kScenarios + "/example1.yaml");
  auto L = scenario_effective_germ(sc).params;
  fs::path d = scratch("csv");
  write_effective_germ_csv(d / "a.csv", L);
  write_effective_germ_csv(d / "b.csv", L);
  std::string a = slurp(d / "a.csv");
  EXPECT_EQ(a, slurp(d / "b.csv"));
  std::istringstream lines(a);
  std::string first, second;
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_EQ(first.rfind("# bar0=", 0), 0u);
  EXPECT_EQ(second, "lambda,hat1,hat2");

  sc.grid.dx = 0.01;
  sc.run.T = 0.5;
  SimulationOptions o;
  o.T = sc.run.T;
  auto t1 = run_scenario(sc, Model::meso, 0.125, o), t2 = run_scenario(sc, Model::meso, 0.125, o);
  write_trace_csv(d / "t1.csv", t1);
  write_trace_csv(d / "t2.csv", t2);
  write_ledger_csv(d / "l1.csv", t1);
  EXPECT_EQ(slurp(d / "t1.csv"), slurp(d / "t2.csv"));
  EXPECT_EQ(slurp(d / "l1.csv").rfind("t,mass,inflow,outflow,residual\n", 0), 0u);
  fs::remove_all(d);
}

TEST(Battery, FilterSelectsGroupsAndIds) {
  int germ = 0, all = 0;
  for (const auto& c : acceptance_criteria()) {
    ++all;
    if (matches_filter(c, "germ")) {
      ++germ;
      EXPECT_TRUE(c.group == "germ" || c.id.find("germ") != std::string::npos) << c.id;
    }
  }
  EXPECT_EQ(germ, 3);  // both germ criteria and macro-rule-germ
  EXPECT_EQ(all, 10);
  int picked = 0;
  for (const auto& c : acceptance_criteria()) picked += matches_filter(c, "kato,bv-bound");
  EXPECT_EQ(picked, 2);
}

TEST(Manifest, Keys) {
  fs::path d = scratch("manifest");
  RunManifest m;
  m.command = "effective";
  m.scenario_path = "scenarios/example1.yaml";
  m.output_dir = d;
  m.parameters["eps"] = "0.125";
  m.write();
  auto j = nlohmann::json::parse(slurp(d / "manifest.json"));
  for (const char* k : {"command", "scenario", "seed", "tolerances", "output_dir", "module_versions", "wall_clock_budget_s"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["module_versions"].size(), 6u);
  EXPECT_TRUE(j["tolerances"].contains("macro_member"));
  fs::remove_all(d);
}

TEST(RunDirs, AreDistinctAndClaimedOnlyWhenEmpty) {
  fs::path root = scratch("dirs");
  auto a = unique_run_dir(root, "simulate"), b = unique_run_dir(root, "simulate");
  EXPECT_NE(a, b);
  EXPECT_EQ(a.filename(), "simulate-001");
  std::ofstream(b / "x.csv") << "1\n";
  EXPECT_THROW(claim_run_dir(b), Error);
  EXPECT_NO_THROW(claim_run_dir(root / "fresh"));
  fs::remove_all(root);
}
