#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <sstream>

#include "tlgerm/harness.hpp"
#include "tlgerm/tlgerm.hpp"

using namespace tlgerm;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string scenario;
  std::string out;
  int jobs = 1;
};

fs::path prepare_dir(const Common& c, const std::string& cmd) {
  if (!c.out.empty()) return claim_run_dir(c.out);
  std::string stem = cmd;
  if (!c.scenario.empty()) stem += "-" + fs::path(c.scenario).stem().string();
  return unique_run_dir(output_root(), stem);
}

Scenario load(const Common& c) {
  Scenario sc = parse_scenario(c.scenario);
  for (const auto& n : sc.notes) std::cerr << "note: " << n << '\n';
  for (const auto& w : domain_warnings(sc)) std::cerr << "warning: " << w << '\n';
  return sc;
}

RunManifest manifest(const std::string& cmd, const Common& c, const Scenario* sc, const fs::path& dir, double budget) {
  RunManifest m;
  m.command = cmd;
  m.scenario_path = c.scenario;
  if (sc) {
    m.seed = sc->run.seed;
    m.tol = sc->tol;
  }
  m.output_dir = dir;
  m.wall_clock_budget = budget;
  m.parameters["jobs"] = std::to_string(c.jobs);
  return m;
}

int cmd_effective(const Common& c) {
  Scenario sc = load(c);
  fs::path dir = prepare_dir(c, "effective");
  auto eg = scenario_effective_germ(sc);
  write_effective_germ_csv(dir / "effective_germ.csv", eg.params);
  manifest("effective", c, &sc, dir, 0).write();
  std::cout << "bar0=" << num(eg.params.bar0) << " bar1=" << num(eg.params.bar1) << " bar2=" << num(eg.params.bar2) << '\n'
            << dir.string() << '\n';
  return 0;
}

int cmd_germ_check(const Common& c, long pairs, int grid) {
  Scenario sc = load(c);
  fs::path dir = prepare_dir(c, "germ-check");
  FluxTriple F = sc.flux_triple();
  Signal s = sc.build_signal();
  std::vector<std::pair<std::string, GermParams>> germs{{"effective", scenario_effective_germ(sc).params}};
  for (std::size_t i = 0; i < s.size(); ++i)
    germs.push_back({"phase" + std::to_string(i), meso_germ_params(s.segments()[i].A, s.segments()[i].phase, F[0].f_max())});

  std::vector<GermCheckRow> rows;
  double h = 1.0 / (grid - 1);
  for (const auto& [name, L] : germs) {
    auto p = check_germ_property(L, F, pairs, sc.run.seed);
    std::cerr << name << ": min D = " << p.min_dissipation << " over " << p.pairs << " pairs\n";
    if (p.min_dissipation < -sc.tol.dissipation_floor) rows.push_back({name + ":dissipation", p.worst_p, -p.min_dissipation});
    if (p.max_sample_violation > sc.tol.dissipation_floor)
      rows.push_back({name + ":sample", p.worst_p, p.max_sample_violation});
    auto g = check_generation(L, F, grid, 200, sc.tol.generation_dissipation * h, sc.tol.generation_member * h);
    std::cerr << name << ": " << g.counterexamples << " counterexamples among " << g.dissipative
              << " dissipative grid points\n";
    if (g.counterexamples > 0) rows.push_back({name + ":generation", g.worst_point, g.worst_violation});
  }
  write_germ_check_csv(dir / "germ_check.csv", rows);
  auto m = manifest("germ-check", c, &sc, dir, 0);
  m.parameters["pairs"] = std::to_string(pairs);
  m.parameters["grid"] = std::to_string(grid);
  m.write();
  std::cout << rows.size() << " violations\n" << dir.string() << '\n';
  return rows.empty() ? 0 : 1;
}

SubgermCase parse_case(const std::string& s) {
  if (s == "curve") return SubgermCase::curve;
  if (s == "first") return SubgermCase::first_only;
  if (s == "second") return SubgermCase::second_only;
  if (s == "saturated") return SubgermCase::saturated;
  throw ValidationError("unknown subgerm case '" + s + "' (expected curve, first, second or saturated)");
}

int cmd_corrector(const Common& c, const std::string& kind, double lambda_frac, int nt, int nx, double X) {
  Scenario sc = load(c);
  fs::path dir = prepare_dir(c, "corrector");
  FluxTriple F = sc.flux_triple();
  Signal s = sc.build_signal();
  auto L = scenario_effective_germ(sc).params;
  auto pt = subgerm_point(L, F, parse_case(kind), lambda_frac * L.bar0);
  auto corr = build_corrector(F, s, pt);
  CorrectorCheckOptions o;
  o.trace_tol = sc.tol.trace_membership;
  o.decay_factor = sc.tol.decay_factor;
  auto chk = verify_corrector(corr, o);
  write_corrector_csv(dir / "corrector.csv", corr, nt, nx, X);

  std::ofstream rep(dir / "report.txt");
  rep.precision(10);
  rep << "case " << kind << "\nlambda " << pt.lambda << "\nstates " << pt.p[0] << ' ' << pt.p[1] << ' ' << pt.p[2] << '\n';
  rep << "trace_pass_rate " << chk.trace_pass_rate << " (tolerance " << o.trace_tol << ")\n";
  rep << "decay_constants";
  for (std::size_t i = 0; i < chk.decay_constants.size(); ++i)
    rep << ' ' << "M=" << o.decay_levels[i] << ':' << chk.decay_constants[i];
  rep << "\ndecay_stable " << (chk.decay_stable ? "yes" : "no") << '\n';
  rep << "conservation_residual " << chk.conservation_residual << '\n';
  if (pt.kind == SubgermCase::curve)
    rep << "support_radius " << chk.support_radius << "\nsupport_verified " << (chk.support_verified ? "yes" : "no") << '\n';
  rep.close();

  auto m = manifest("corrector", c, &sc, dir, 0);
  m.parameters["case"] = kind;
  m.parameters["lambda"] = num(pt.lambda);
  m.write();
  bool ok = chk.trace_pass_rate >= sc.tol.trace_pass_rate && chk.decay_stable && chk.support_verified;
  std::cout << (ok ? "corrector checks passed" : "corrector checks FAILED") << '\n' << dir.string() << '\n';
  return ok ? 0 : 1;
}

int cmd_simulate(const Common& c, const std::string& model_opt, double eps_opt, double T_opt) {
  Scenario sc = load(c);
  if (!model_opt.empty()) sc.run.model = parse_model(model_opt);
  if (eps_opt > 0) sc.run.eps = eps_opt;
  if (T_opt > 0) sc.run.T = T_opt;
  validate_scenario(sc);
  fs::path dir = prepare_dir(c, "simulate");

  SimulationOptions o;
  o.T = sc.run.T;
  o.cfl = sc.grid.cfl;
  o.snapshot_times = sc.run.snapshots;
  if (o.snapshot_times.empty()) o.snapshot_times = {0.0, sc.run.T};
  TraceAudit audit;
  MacroAudit macro;
  Model inner = sc.run.model == Model::macro ? Model::macro : Model::meso;
  Trajectory tr = run_scenario(sc, inner, sc.run.eps, o, &audit, &macro);
  for (const auto& snap : tr.snapshots) write_snapshot_csv(dir / snapshot_name(snap.t), snap.field);
  write_trace_csv(dir / "trace.csv", tr);
  write_ledger_csv(dir / "ledger.csv", tr);

  auto m = manifest("simulate", c, &sc, dir, 0);
  m.parameters["model"] = model_name(sc.run.model);
  m.parameters["eps"] = num(sc.run.eps);
  m.parameters["T"] = num(sc.run.T);
  m.write();
  std::cerr << tr.steps << " steps, max ledger residual " << tr.max_ledger_residual << '\n';
  if (inner == Model::meso) {
    std::cerr << "junction traces: " << audit.failures << " of " << audit.evaluations << " outside the 1:1 germ\n";
    if (sc.layout() == Orientation::diverging)
      std::cerr << "adjacent cell averages within 5 dx of the 1:1 germ: "
                << 100 * meso_trace_pass_rate(sc.flux_triple(), sc.build_signal(), sc.run.eps, tr, 5 * sc.grid.dx) << "%\n";
  } else {
    std::cerr << macro.evaluations.load() << " macro junction evaluations\n";
  }
  std::cout << dir.string() << '\n';
  return tr.max_ledger_residual <= sc.tol.ledger * std::max(1.0, l1_norm(tr.final)) ? 0 : 1;
}

int cmd_homogenize(const Common& c, const std::string& eps_list) {
  Scenario sc = load(c);
  std::vector<double> eps = sc.run.eps_list;
  if (!eps_list.empty()) {
    eps.clear();
    std::stringstream ss(eps_list);
    std::string item;
    while (std::getline(ss, item, ',')) eps.push_back(std::stod(item));
  }
  fs::path dir = prepare_dir(c, "homogenize");
  TraceAudit audit;
  auto rows = homogenize_scenario(sc, eps, c.jobs, &audit);
  write_convergence_csv(dir / "convergence.csv", rows);
  auto m = manifest("homogenize", c, &sc, dir, 600);
  m.parameters["eps_list"] = eps_list.empty() ? "scenario" : eps_list;
  m.parameters["model"] = model_name(sc.run.model);
  m.write();
  for (const auto& r : rows) std::cout << "eps=" << r.eps << "  l1_error=" << r.l1_error << '\n';
  std::cout << dir.string() << '\n';
  return 0;
}

int cmd_battery(const Common& c, const std::string& filter) {
  fs::path dir = prepare_dir(c, "battery");
  BatteryContext ctx;
  ctx.jobs = c.jobs;
  ctx.out = dir;
  auto results = run_battery(ctx, filter, &std::cout);
  auto m = manifest("battery", c, nullptr, dir, 0);
  m.parameters["filter"] = filter;
  double budget = 0;
  for (const auto& cr : acceptance_criteria())
    if (matches_filter(cr, filter)) budget += cr.budget;
  m.wall_clock_budget = budget;
  m.write();
  int passed = 0;
  for (const auto& r : results) passed += r.passed;
  std::cout << "\n" << passed << "/" << results.size() << " criteria passed\n";
  for (const auto& r : results) std::cout << "  " << (r.passed ? "PASS  " : "FAIL  ") << r.id << '\n';
  std::cout << dir.string() << '\n';
  return passed == static_cast<int>(results.size()) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic-light junction germs: effective germs, correctors and junction simulations"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub, bool scenario) {
    if (scenario) sub->add_option("scenario", c.scenario, "scenario file (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory (default: a fresh directory under $TLGERM_OUT or ./runs)");
    sub->add_option("--jobs", c.jobs, "concurrent sweep jobs")->check(CLI::PositiveNumber);
  };

  auto* eff = app.add_subcommand("effective", "compute the effective germ of a scenario");
  add_common(eff, true);

  long pairs = 10000;
  int grid = 30;
  auto* gc = app.add_subcommand("germ-check", "check the germ property and generation for a scenario");
  add_common(gc, true);
  gc->add_option("--pairs", pairs, "random germ pairs per germ");
  gc->add_option("--grid", grid, "certification grid nodes per axis")->check(CLI::Range(2, 200));

  std::string kind = "curve";
  double frac = 0.75, X = 8.0;
  int nt = 40, nx = 160;
  auto* co = app.add_subcommand("corrector", "build and verify a corrector for one subgerm point");
  add_common(co, true);
  co->add_option("--case", kind, "curve, first, second or saturated");
  co->add_option("--lambda", frac, "incoming flux as a fraction of bar0 (curve case)")->check(CLI::Range(0.0, 1.0));
  co->add_option("--nt", nt, "time samples over one period");
  co->add_option("--nx", nx, "space samples per branch");
  co->add_option("--extent", X, "sampled length of each branch");

  std::string model;
  double eps = 0, T = 0;
  auto* sim = app.add_subcommand("simulate", "run one junction simulation");
  add_common(sim, true);
  sim->add_option("--model", model, "meso, macro or two-to-one");
  sim->add_option("--eps", eps, "signal period");
  sim->add_option("--T", T, "final time");

  std::string eps_list;
  auto* hom = app.add_subcommand("homogenize", "L1 distance between meso runs and the macro run over a list of periods");
  add_common(hom, true);
  hom->add_option("--eps-list", eps_list, "comma-separated periods");

  std::string filter;
  auto* bat = app.add_subcommand("battery", "run the acceptance battery");
  add_common(bat, false);
  bat->add_option("--filter", filter, "comma-separated groups (germ, effective, hj, fvm) or criterion ids");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*eff) return cmd_effective(c);
    if (*gc) return cmd_germ_check(c, pairs, grid);
    if (*co) return cmd_corrector(c, kind, frac, nt, nx, X);
    if (*sim) return cmd_simulate(c, model, eps, T);
    if (*hom) return cmd_homogenize(c, eps_list);
    if (*bat) return cmd_battery(c, filter);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
