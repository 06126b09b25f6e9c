#pragma once

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tlgerm/battery.hpp"
#include "tlgerm/effective.hpp"
#include "tlgerm/fvm.hpp"
#include "tlgerm/io.hpp"
#include "tlgerm/scenario.hpp"

namespace tlgerm {

inline const std::map<std::string, std::string>& module_versions() {
  static const std::map<std::string, std::string> v{
      {"flux_core", "1.0.0"},   {"germ_algebra", "1.0.0"}, {"effective_germ", "1.0.0"},
      {"hj_correctors", "1.0.0"}, {"junction_fvm", "1.0.0"}, {"cli_harness", "1.0.0"}};
  return v;
}

struct RunManifest {
  std::string command;
  std::string scenario_path;
  std::uint64_t seed = 1;
  Tolerances tol;
  std::filesystem::path output_dir;
  double wall_clock_budget = 0.0;  // seconds, 0 for none
  std::map<std::string, std::string> parameters;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["scenario"] = scenario_path;
    j["seed"] = seed;
    nlohmann::ordered_json t;
    for (const auto& e : detail::tolerance_keys()) t[e.key] = tol.*e.field;
    j["tolerances"] = t;
    j["output_dir"] = output_dir.string();
    j["module_versions"] = module_versions();
    j["wall_clock_budget_s"] = wall_clock_budget;
    j["parameters"] = parameters;
    return j;
  }
  void write() const {
    std::ofstream out(output_dir / "manifest.json");
    if (!out) throw Error("cannot write manifest in " + output_dir.string());
    out << to_json().dump(2) << '\n';
  }
};

inline std::filesystem::path output_root() {
  const char* env = std::getenv("TLGERM_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("runs");
}

// <root>/<stem>-NNN, the first index not yet taken.
inline std::filesystem::path unique_run_dir(const std::filesystem::path& root, const std::string& stem) {
  std::filesystem::create_directories(root);
  for (int i = 1; i < 1000000; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "-%03d", i);
    auto p = root / (stem + buf);
    if (std::filesystem::create_directory(p)) return p;
  }
  throw Error("no free run directory under " + root.string());
}

// Prepares an explicitly requested output directory; it must be new or empty.
inline std::filesystem::path claim_run_dir(const std::filesystem::path& p) {
  std::filesystem::create_directories(p);
  if (!std::filesystem::is_empty(p)) throw Error("output directory " + p.string() + " is not empty");
  return p;
}

inline std::vector<std::string> domain_warnings(const Scenario& sc) {
  std::vector<std::string> w;
  double reach = sc.flux_triple().max_speed() * sc.run.T;
  if (reach >= sc.grid.L) {
    std::ostringstream os;
    os << "waves may reach the far boundary before T: max speed * T = " << reach << " >= L = " << sc.grid.L;
    w.push_back(os.str());
  }
  return w;
}

inline EffectiveGerm scenario_effective_germ(const Scenario& sc) {
  return build_effective_germ(sc.build_signal(), sc.fluxes[0].f_max());
}

inline JunctionRule scenario_rule(const Scenario& sc, const FluxTriple& F, Model model, double eps, TraceAudit* meso_audit,
                                  MacroAudit* macro_audit) {
  if (model == Model::macro) return macro_rule(F, scenario_effective_germ(sc).params, macro_audit, sc.tol.macro_member);
  return meso_rule(F, sc.build_signal(), eps, meso_audit, sc.tol.macro_member);
}

// `inner` picks the junction model (meso or macro); the layout follows the scenario.
inline Trajectory run_scenario(const Scenario& sc, Model inner, double eps, const SimulationOptions& o,
                               TraceAudit* meso_audit = nullptr, MacroAudit* macro_audit = nullptr) {
  Field init = initial_field(sc);
  FluxTriple F = sc.flux_triple();
  if (sc.layout() == Orientation::converging)
    return simulate_converging(
        F, [&](const FluxTriple& Fr) { return scenario_rule(sc, Fr, inner, eps, meso_audit, macro_audit); }, init, o);
  return simulate(F, scenario_rule(sc, F, inner, eps, meso_audit, macro_audit), init, o);
}

// L1 distance at T between meso runs and the macro run on the same grid, one job per eps.
inline std::vector<ConvergenceRow> homogenize_scenario(const Scenario& sc, const std::vector<double>& eps, int jobs,
                                                       TraceAudit* audit = nullptr) {
  SimulationOptions o;
  o.T = sc.run.T;
  o.cfl = sc.grid.cfl;
  o.record_trace = o.record_ledger = false;
  std::vector<Field> finals(eps.size() + 1);
  std::vector<TraceAudit> audits(eps.size());
  parallel_for(jobs, static_cast<int>(eps.size()) + 1, [&](int i) {
    auto k = static_cast<std::size_t>(i);
    finals[k] = k < eps.size() ? run_scenario(sc, Model::meso, eps[k], o, &audits[k]).final
                               : run_scenario(sc, Model::macro, 0.0, o).final;
  });
  std::vector<ConvergenceRow> rows;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    rows.push_back({eps[k], l1_distance(finals[k], finals.back())});
    if (audit) audit->merge(audits[k]);
  }
  return rows;
}

}  // namespace tlgerm
