#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tlgerm/effective.hpp"
#include "tlgerm/examples.hpp"
#include "tlgerm/fvm.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/hj.hpp"
#include "tlgerm/io.hpp"
#include "tlgerm/tolerances.hpp"

namespace tlgerm {

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results are stored by index, so order never depends on timing.
template <class Fn>
void parallel_for(int jobs, int n, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

struct CriterionResult {
  std::string id, group, title;
  bool passed = true;
  double seconds = 0.0, budget = 0.0;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    details.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    if (!ok) passed = false;
  }
  void note(const std::string& what) { details.push_back("     " + what); }
};

struct BatteryContext {
  Tolerances tol;
  int jobs = 1;
  std::optional<std::filesystem::path> out;
  MacroAudit macro;
  std::mutex mu;
  TraceAudit meso;
  long germ_violations = 0;

  void merge_meso(const TraceAudit& a) {
    std::lock_guard<std::mutex> lock(mu);
    meso.merge(a);
  }
};

struct Criterion {
  std::string id, group, title;
  double budget;  // seconds, 0 when the criterion has no runtime bound
  std::function<void(BatteryContext&, CriterionResult&)> run;
};

namespace battery_detail {

inline std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

struct NamedGerm {
  std::string name;
  GermParams L;
  FluxTriple F;
};

inline std::vector<NamedGerm> example_germs() {
  auto e1 = example_two_phase();
  auto e2 = example_stop_two_exits();
  FluxTriple Fm = quadratic_triple(1.0, 1.0, 1.0);
  return {{"two-phase", build_effective_germ(e1.signal(), e1.F[0].f_max()).params, e1.F},
          {"stop-then-two-exits", build_effective_germ(e2.signal(), e2.F[0].f_max()).params, e2.F},
          {"meso-phase1", meso_germ_params(0.6, 1, 1.0), Fm},
          {"meso-phase2", meso_germ_params(0.6, 2, 1.0), Fm}};
}

inline std::vector<SubgermPoint> corrector_points(const GermParams& L, const FluxTriple& F) {
  std::vector<SubgermPoint> v;
  for (double fr : {0.5, 0.625, 0.75, 0.875, 1.0}) v.push_back(subgerm_point(L, F, SubgermCase::curve, fr * L.bar0));
  for (auto k : {SubgermCase::first_only, SubgermCase::second_only, SubgermCase::saturated})
    v.push_back(subgerm_point(L, F, k));
  return v;
}

inline Field average_down(const Field& f, int factor) {
  Field c = Field::zeros(f.L, f.dx * factor, f.layout);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < c.cells(); ++i) {
      double s = 0.0;
      for (int k = 0; k < factor; ++k) s += f.u[j][i * static_cast<std::size_t>(factor) + static_cast<std::size_t>(k)];
      c.u[j][i] = s / factor;
    }
  return c;
}

inline void germ_property(BatteryContext& ctx, CriterionResult& r) {
  for (const auto& g : example_germs()) {
    auto rep = check_germ_property(g.L, g.F, 10000, 20240611);
    r.check(rep.min_dissipation >= -ctx.tol.dissipation_floor,
            g.name + ": min D over " + std::to_string(rep.pairs) + " pairs = " + sci(rep.min_dissipation));
    r.check(rep.max_sample_violation <= ctx.tol.dissipation_floor,
            g.name + ": sampled points lie in the germ (worst violation " + sci(rep.max_sample_violation) + ")");
  }
}

inline void germ_generation(BatteryContext& ctx, CriterionResult& r) {
  for (const auto& g : example_germs()) {
    double h = 1.0 / 29;
    auto rep = check_generation(g.L, g.F, 30, 200, ctx.tol.generation_dissipation * h, ctx.tol.generation_member * h);
    r.check(rep.counterexamples == 0, g.name + ": " + std::to_string(rep.counterexamples) + " counterexamples among " +
                                          std::to_string(rep.dissipative) + " dissipative grid points (worst violation " +
                                          sci(rep.worst_violation) + ", tolerance " +
                                          sci(ctx.tol.generation_member * h) + ")");
  }
}

inline void closed_forms(BatteryContext& ctx, CriterionResult& r) {
  auto sweep = [&](const std::string& name, const GermParams& L, double f0max, auto&& exact) {
    double err = 0.0, split = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      double l = L.bar0 * i / 1000;
      auto h = exact(l);
      err = std::max({err, std::abs(L.hat(1, l) - h[0]), std::abs(L.hat(2, l) - h[1])});
    }
    for (int i = 0; i <= 1000; ++i) {
      double l = f0max * i / 1000;
      split = std::max(split, std::abs(L.hat(1, l) + L.hat(2, l) - std::min(l, L.bar0)));
    }
    r.check(err <= ctx.tol.closed_form, name + ": sup |hat - closed form| = " + sci(err));
    r.check(split <= ctx.tol.split_identity, name + ": sup |hat1 + hat2 - min(lambda, bar0)| = " + sci(split));
  };
  auto e1 = example_two_phase();
  sweep("two-phase", build_effective_germ(e1.signal(), 1.0).params, 1.0, [&](double l) { return e1.hat(l); });
  TwoPhaseExample e1b{quadratic_triple(1.0, 0.5, 1.0), 0.4};
  sweep("two-phase (second exit faster)", build_effective_germ(e1b.signal(), 1.0).params, 1.0,
        [&](double l) { return e1b.hat(l); });
  auto e2 = example_stop_two_exits();
  sweep("stop-then-two-exits", build_effective_germ(e2.signal(), 1.0).params, 1.0, [&](double l) { return e2.hat(l); });
  StopThenTwoExits e2b{quadratic_triple(1.0, 0.8, 0.8), 0.2, 0.5, 0.3};
  sweep("stop-then-two-exits (uneven)", build_effective_germ(e2b.signal(), 1.0).params, 1.0,
        [&](double l) { return e2b.hat(l); });

  auto u = example_unimodal();
  u.validate();
  auto L = build_effective_germ(u.steps(512), 1.0).params;
  double err = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    double l = L.bar0 * i / 1000;
    err = std::max(err, std::abs(L.hat(1, l) - concave_hat(u, l)));
  }
  r.check(err <= ctx.tol.concave_form, "continuous signal, 512 steps: sup |hat1 - concave form| = " + sci(err));
}

inline void order_effect(BatteryContext& ctx, CriterionResult& r) {
  auto e2 = example_stop_two_exits();
  auto L = build_effective_germ(e2.signal(), 1.0).params;
  double l = L.bar0 / 2, gap = L.hat(1, l) - L.hat(2, l);
  r.check(gap >= ctx.tol.order_effect * L.bar0,
          "hat1 - hat2 at bar0/2 = " + sci(gap) + " (bar0 = " + sci(L.bar0) + ", closed form bar0/6 = " + sci(L.bar0 / 6) + ")");
  bool positive = true;
  for (int i = 1; i < 1000; ++i) positive = positive && L.hat(1, L.bar0 * i / 1000) > L.hat(2, L.bar0 * i / 1000);
  r.check(positive, "hat1 > hat2 on the open interval (0, bar0)");
}

inline void correctors(BatteryContext& ctx, CriterionResult& r) {
  auto ex = example_two_phase();
  Signal s = ex.signal();
  auto L = build_effective_germ(s, 1.0).params;
  auto pts = corrector_points(L, ex.F);
  std::vector<CorrectorCheck> checks(pts.size());
  std::vector<double> avg_err(pts.size(), 0.0);
  CorrectorCheckOptions o;
  o.trace_tol = ctx.tol.trace_membership;
  o.decay_factor = ctx.tol.decay_factor;
  parallel_for(ctx.jobs, static_cast<int>(pts.size()), [&](int i) {
    auto c = build_corrector(ex.F, s, pts[static_cast<std::size_t>(i)]);
    checks[static_cast<std::size_t>(i)] = verify_corrector(c, o);
    if (pts[static_cast<std::size_t>(i)].kind == SubgermCase::curve) {
      const int n = 4000;
      double a1 = 0, a2 = 0;
      for (int k = 0; k < n; ++k) {
        double t = (k + 0.5) / n;
        a1 += ex.F[1](c.density(1, t, o.trace_offset)) / n;
        a2 += ex.F[2](c.density(2, t, o.trace_offset)) / n;
      }
      double l = pts[static_cast<std::size_t>(i)].lambda;
      avg_err[static_cast<std::size_t>(i)] = std::max(std::abs(a1 - L.hat(1, l)), std::abs(a2 - L.hat(2, l)));
    }
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& c = checks[i];
    std::ostringstream name;
    name << "case " << static_cast<int>(pts[i].kind) << " lambda=" << std::setprecision(4) << pts[i].lambda;
    r.check(c.trace_pass_rate >= ctx.tol.trace_pass_rate,
            name.str() + ": traces in the 1:1 germ at " + std::to_string(c.trace_pass_rate * 100) + "% of times");
    std::ostringstream dc;
    for (double d : c.decay_constants) dc << ' ' << std::setprecision(4) << d;
    r.check(c.decay_stable, name.str() + ": M sup|u - p| at M = 10, 20, 40:" + dc.str());
    r.check(c.conservation_residual <= ctx.tol.trace_membership,
            name.str() + ": cell balance defect " + sci(c.conservation_residual));
    if (pts[i].kind == SubgermCase::curve) {
      r.check(c.support_verified, name.str() + ": u0 = p0 beyond fitted C = " + sci(c.support_radius));
      r.check(avg_err[i] <= ctx.tol.trace_membership, name.str() + ": mean branch fluxes match hat curves to " + sci(avg_err[i]));
    }
  }
}

inline void corrector_fixed_point(BatteryContext& ctx, CriterionResult& r) {
  auto ex = example_two_phase();
  Signal s = ex.signal();
  auto L = build_effective_germ(s, 1.0).params;
  auto pts = corrector_points(L, ex.F);
  const double dx = 1.0 / 200, len = 4.0;
  std::vector<double> drift(pts.size());
  std::vector<TraceAudit> audits(pts.size());
  parallel_for(ctx.jobs, static_cast<int>(pts.size()), [&](int i) {
    auto c = build_corrector(ex.F, s, pts[static_cast<std::size_t>(i)]);
    Field init = Field::from_cell_averages(len, dx, [&](int j, double xl, double xr) { return c.cell_average(j, 0.0, xl, xr); });
    SimulationOptions o;
    o.T = 1.0;
    o.record_trace = o.record_ledger = false;
    auto tr = simulate(ex.F, meso_rule(ex.F, s, 1.0, &audits[static_cast<std::size_t>(i)], ctx.tol.macro_member), init, o);
    drift[static_cast<std::size_t>(i)] = l1_distance(tr.final, init);
  });
  double bound = ctx.tol.fixed_point * dx * 3 * len;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ctx.merge_meso(audits[i]);
    std::ostringstream name;
    name << "case " << static_cast<int>(pts[i].kind) << " lambda=" << std::setprecision(4) << pts[i].lambda;
    r.check(drift[i] <= bound, name.str() + ": one-period L1 drift " + sci(drift[i]) + " (bound " + sci(bound) + ")");
  }
}

inline std::pair<Field, Field> kato_pair(std::mt19937_64& rng, double len, double dx) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Field a = Field::zeros(len, dx), b = a;
  for (std::size_t j = 0; j < 3; ++j) {
    double bg = U(rng);
    std::fill(a.u[j].begin(), a.u[j].end(), bg);
    std::fill(b.u[j].begin(), b.u[j].end(), bg);
    for (int piece = 0; piece < 4; ++piece) {
      double va = U(rng), vb = U(rng);
      double lo = (j == 0 ? -1.0 : 0.0) + 0.25 * piece, hi = lo + 0.25;
      for (std::size_t i = 0; i < a.cells(); ++i) {
        double x = a.x_center(static_cast<int>(j), i);
        if (x >= lo && x < hi) {
          a.u[j][i] = va;
          b.u[j][i] = vb;
        }
      }
    }
  }
  return {a, b};
}

inline void kato(BatteryContext& ctx, CriterionResult& r) {
  auto ex = example_two_phase();
  Signal s = ex.signal();
  auto L = build_effective_germ(s, 1.0).params;
  std::mt19937_64 rng(77);
  std::vector<std::pair<Field, Field>> pairs;
  for (int i = 0; i < 5; ++i) pairs.push_back(kato_pair(rng, 4.0, 1.0 / 200));
  std::vector<KatoReport> meso(5), macro(5);
  std::vector<TraceAudit> audits(5);
  parallel_for(ctx.jobs, 10, [&](int i) {
    auto k = static_cast<std::size_t>(i / 2);
    const auto& [a, b] = pairs[k];
    if (i % 2 == 0)
      meso[k] = kato_check(ex.F, meso_rule(ex.F, s, 0.25, &audits[k], ctx.tol.macro_member), a, b, 0.5, 0.9, ctx.tol.kato_step);
    else
      macro[k] = kato_check(ex.F, macro_rule(ex.F, L, &ctx.macro, ctx.tol.macro_member), a, b, 0.5, 0.9, ctx.tol.kato_step);
  });
  for (std::size_t k = 0; k < 5; ++k) {
    ctx.merge_meso(audits[k]);
    r.check(meso[k].contractive, "pair " + std::to_string(k) + " meso: d " + sci(meso[k].distance.front()) + " -> " +
                                     sci(meso[k].distance.back()) + ", worst step increase " + sci(meso[k].worst_increase));
    r.check(macro[k].contractive, "pair " + std::to_string(k) + " macro: d " + sci(macro[k].distance.front()) + " -> " +
                                      sci(macro[k].distance.back()) + ", worst step increase " + sci(macro[k].worst_increase));
  }
}

struct HomogenizationResult {
  std::vector<ConvergenceRow> rows;
  double initial_l1 = 0.0;
  double grid_control = 0.0;  // macro run at dx vs 2 dx
};

inline HomogenizationResult homogenization_sweep(BatteryContext& ctx, bool converging, const std::vector<double>& eps) {
  auto ex = example_two_phase();
  Signal s = ex.signal();
  auto L = build_effective_germ(s, 1.0).params;
  const double len = 4.0, T = 2.0;
  auto riemann = [&](double dx) {
    Field f = Field::zeros(len, dx);
    std::fill(f.u[0].begin(), f.u[0].end(), 0.8);
    return converging ? f.reversed() : f;
  };
  FluxTriple F = converging ? ex.F.reversed() : ex.F;
  SimulationOptions o;
  o.T = T;
  o.record_trace = o.record_ledger = false;
  auto solve = [&](bool macro, double e, double dx, TraceAudit* audit) {
    if (!converging) {
      JunctionRule rule = macro ? macro_rule(F, L, &ctx.macro, ctx.tol.macro_member)
                                : meso_rule(F, s, e, audit, ctx.tol.macro_member);
      return simulate(F, rule, riemann(dx), o).final;
    }
    auto make = [&](const FluxTriple& Fr) {
      return macro ? macro_rule(Fr, L, &ctx.macro, ctx.tol.macro_member) : meso_rule(Fr, s, e, audit, ctx.tol.macro_member);
    };
    return simulate_converging(F, make, riemann(dx), o).final;
  };

  HomogenizationResult h;
  h.initial_l1 = l1_norm(riemann(1.0 / 400));
  std::vector<Field> finals(eps.size() + 2);
  std::vector<TraceAudit> audits(eps.size());
  parallel_for(ctx.jobs, static_cast<int>(eps.size()) + 2, [&](int i) {
    auto k = static_cast<std::size_t>(i);
    if (k < eps.size()) finals[k] = solve(false, eps[k], 1.0 / 400, &audits[k]);
    else if (k == eps.size()) finals[k] = solve(true, 0.0, 1.0 / 400, nullptr);
    else finals[k] = solve(true, 0.0, 1.0 / 200, nullptr);
  });
  const Field& ref = finals[eps.size()];
  for (std::size_t k = 0; k < eps.size(); ++k) {
    h.rows.push_back({eps[k], l1_distance(finals[k], ref)});
    ctx.merge_meso(audits[k]);
  }
  h.grid_control = l1_distance(average_down(ref, 2), finals[eps.size() + 1]);
  return h;
}

inline void homogenization(BatteryContext& ctx, CriterionResult& r) {
  std::vector<double> eps{0.25, 0.125, 0.0625, 0.03125};
  auto judge = [&](const std::string& name, const HomogenizationResult& h) {
    std::ostringstream os;
    bool decreasing = true;
    for (std::size_t k = 0; k < h.rows.size(); ++k) {
      os << (k ? ", " : "") << "eps=" << h.rows[k].eps << ": " << sci(h.rows[k].l1_error);
      if (k > 0 && !(h.rows[k].l1_error < h.rows[k - 1].l1_error)) decreasing = false;
    }
    r.check(decreasing, name + " L1 errors decrease along eps (" + os.str() + ")");
    double first = h.rows.front().l1_error, last = h.rows.back().l1_error;
    r.check(last < ctx.tol.homog_ratio * first, name + " error(1/32) / error(1/4) = " + sci(last / first));
    r.check(last < ctx.tol.homog_relative * h.initial_l1,
            name + " error(1/32) = " + sci(last) + " vs " + sci(ctx.tol.homog_relative * h.initial_l1) +
                " (relative to |initial datum| = " + sci(h.initial_l1) + ")");
    r.note(name + " macro grid control |rho(dx) - rho(2 dx)| = " + sci(h.grid_control));
  };
  auto h12 = homogenization_sweep(ctx, false, eps);
  judge("1:2", h12);
  auto h21 = homogenization_sweep(ctx, true, eps);
  judge("2:1", h21);
  double diff = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k) diff = std::max(diff, std::abs(h12.rows[k].l1_error - h21.rows[k].l1_error));
  r.check(diff <= ctx.tol.transform_identity, "2:1 errors equal the 1:2 errors to " + sci(diff));
  r.check(ctx.meso.failures == 0, "meso junction traces in the 1:1 germ: " + std::to_string(ctx.meso.failures) +
                                      " failures over " + std::to_string(ctx.meso.evaluations) + " evaluations");
  if (ctx.out) {
    write_convergence_csv(*ctx.out / "convergence.csv", h12.rows);
    write_convergence_csv(*ctx.out / "convergence_2to1.csv", h21.rows);
  }
}

inline void macro_rule_check(BatteryContext& ctx, CriterionResult& r) {
  auto ex = example_two_phase();
  Signal s = ex.signal();
  auto L = build_effective_germ(s, 1.0).params;
  const FluxTriple& F = ex.F;
  struct Case {
    std::string name;
    Triple rho, expected;
    int which;
  };
  double l = 0.4;
  auto h = ex.hat(l);
  std::vector<Case> cases{
      {"curve split", {F[0].inv_plus(l), 0.0, 0.0}, {l, h[0], h[1]}, 0},
      {"P1 (exit 2 jammed)", {0.8, 0.0, F[2].c()}, {L.bar1, L.bar1, 0.0}, 2},
      {"P2 (exit 1 jammed)", {0.8, F[1].c(), 0.0}, {L.bar2, 0.0, L.bar2}, 1},
      {"P3 (all jammed)", {F[0].c(), F[1].c(), F[2].c()}, {0.0, 0.0, 0.0}, 3},
  };
  for (const auto& c : cases) {
    Field f = Field::zeros(4.0, 1.0 / 200);
    for (std::size_t j = 0; j < 3; ++j) std::fill(f.u[j].begin(), f.u[j].end(), c.rho[j]);
    SimulationOptions o;
    o.T = 0.25;
    o.record_ledger = false;
    auto tr = simulate(F, macro_rule(F, L, &ctx.macro, ctx.tol.macro_member), f, o);
    int which = -1;
    macro_junction_flux(F, L, c.rho, &which);
    const Triple& phi = tr.trace.front().phi;
    double err = 0.0, drift = 0.0;
    for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(phi[j] - c.expected[j]));
    for (const auto& row : tr.trace)
      for (int j = 0; j < 3; ++j) drift = std::max(drift, std::abs(row.phi[j] - phi[j]));
    r.check(err <= 1e-15 && which == c.which,
            c.name + ": junction fluxes (" + sci(phi[0]) + ", " + sci(phi[1]) + ", " + sci(phi[2]) + "), error " + sci(err));
    r.note(c.name + ": flux drift over the run " + sci(drift));
  }
  long total = ctx.macro.evaluations.load();
  r.check(ctx.germ_violations == 0 && total > 0,
          std::to_string(total) + " macro junction evaluations, " + std::to_string(ctx.germ_violations) +
              " germ violations (cases hit: " + std::to_string(ctx.macro.hits[0].load()) + ", " +
              std::to_string(ctx.macro.hits[1].load()) + ", " + std::to_string(ctx.macro.hits[2].load()) + ", " +
              std::to_string(ctx.macro.hits[3].load()) + ")");
}

// Space-time variation of a shock moving through the box, for several radii.
inline std::vector<double> bv_ratios(double dx) {
  FluxTriple F = quadratic_triple(1.0, 1.0, 1.0);
  Signal s({{1.0, 1, 1.0}});
  Field f = Field::zeros(4.0, dx);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    f.u[0][i] = 0.1;
    f.u[1][i] = f.x_center(1, i) < 1.0 ? 0.1 : 0.6;
  }
  SimulationOptions o;
  o.T = 1.0;
  o.record_trace = o.record_ledger = false;
  o.history_branch = 1;
  o.history_t0 = 0.0;
  o.history_t1 = 1.0;
  auto tr = simulate(F, meso_rule(F, s, 1.0), f, o);
  std::vector<double> v;
  for (double R : {0.25, 0.5, 1.0}) v.push_back(bv_estimate(tr, f, 1, 0.5, 1.6, R, 0.5) / R);
  return v;
}

inline void bv_bound(BatteryContext& ctx, CriterionResult& r) {
  std::vector<double> all;
  for (double dx : {1.0 / 200, 1.0 / 400}) {
    auto v = bv_ratios(dx);
    all.insert(all.end(), v.begin(), v.end());
    r.note("dx=" + sci(dx) + ": V/R at R = 0.25, 0.5, 1: " + sci(v[0]) + ", " + sci(v[1]) + ", " + sci(v[2]));
  }
  double lo = *std::min_element(all.begin(), all.end()), hi = *std::max_element(all.begin(), all.end());
  r.check(lo > 0 && hi <= ctx.tol.bv_factor * lo, "fitted C spread " + sci(hi / lo) + " across radii and grids");
}

}  // namespace battery_detail

inline std::vector<Criterion> acceptance_criteria() {
  using namespace battery_detail;
  return {
      {"germ-property", "germ", "sampled germ pairs dissipate nonnegatively", 10, germ_property},
      {"germ-generation", "germ", "generators certify membership on a 30^3 grid", 60, germ_generation},
      {"effective-closed-forms", "effective", "hat curves match closed forms", 30, closed_forms},
      {"effective-order-effect", "effective", "stop-then-two-exits order effect", 0, order_effect},
      {"corrector-verification", "hj", "corrector traces, decay and support", 120, correctors},
      {"corrector-fixed-point", "hj", "correctors are near-fixed points of the solver", 0, corrector_fixed_point},
      {"kato-contraction", "fvm", "L1 contraction for both junction models", 0, kato},
      {"homogenization", "fvm", "meso runs converge to the macro run as eps -> 0", 600, homogenization},
      {"bv-bound", "fvm", "local BV bound stable across radii and grids", 0, bv_bound},
      {"macro-rule-germ", "fvm", "macro junction rule realises the effective germ", 0, macro_rule_check},
  };
}

inline bool matches_filter(const Criterion& c, const std::string& filter) {
  if (filter.empty()) return true;
  std::stringstream ss(filter);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item == c.group || c.id.find(item) != std::string::npos) return true;
  return false;
}

inline std::vector<CriterionResult> run_battery(BatteryContext& ctx, const std::string& filter = "",
                                                std::ostream* log = nullptr) {
  std::vector<CriterionResult> results;
  for (const auto& c : acceptance_criteria()) {
    if (!matches_filter(c, filter)) continue;
    CriterionResult r;
    r.id = c.id;
    r.group = c.group;
    r.title = c.title;
    r.budget = c.budget;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(ctx, r);
    } catch (const GermViolation& e) {
      ++ctx.germ_violations;
      r.check(false, std::string("germ violation: ") + e.what());
    } catch (const std::exception& e) {
      r.check(false, std::string("error: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.budget > 0) {
      std::ostringstream os;
      os << "runtime " << std::fixed << std::setprecision(2) << r.seconds << " s within budget " << r.budget << " s";
      r.check(r.seconds < r.budget, os.str());
    }
    if (log) {
      *log << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(24) << r.id << std::right << std::fixed
           << std::setprecision(2) << std::setw(8) << r.seconds << " s  " << r.title << '\n';
      for (const auto& d : r.details) *log << "       " << d << '\n';
      log->flush();
    }
    results.push_back(std::move(r));
  }
  if (ctx.out) {
    CsvWriter w(*ctx.out / "battery.csv", {"criterion", "group", "passed", "seconds", "budget"});
    for (const auto& r : results)
      w.row_strings({r.id, r.group, r.passed ? "1" : "0", num(r.seconds), num(r.budget)});
    auto ex = example_two_phase();
    write_effective_germ_csv(*ctx.out / "effective_germ.csv", build_effective_germ(ex.signal(), 1.0).params);
  }
  return results;
}

}  // namespace tlgerm
