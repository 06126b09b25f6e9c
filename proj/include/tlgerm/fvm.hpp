#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tlgerm/effective.hpp"
#include "tlgerm/errors.hpp"
#include "tlgerm/flux.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/signal.hpp"

namespace tlgerm {

inline double godunov_flux(const Flux& f, double uL, double uR) { return std::min(f.plus(uL), f.minus(uR)); }

// Cell averages on the three branches. In the diverging layout branch 0 covers [-L, 0] (cell n-1 touches the
// junction) and branches 1, 2 cover [0, L] (cell 0 touches it); the converging layout mirrors every branch.
struct Field {
  double L = 1.0, dx = 0.1;
  Orientation layout = Orientation::diverging;
  std::array<std::vector<double>, 3> u;

  static Field zeros(double L, double dx, Orientation layout = Orientation::diverging) {
    Field f;
    f.L = L;
    f.dx = dx;
    f.layout = layout;
    auto n = static_cast<std::size_t>(std::llround(L / dx));
    if (n < 2 || std::abs(n * dx - L) > 1e-9 * L) throw ValidationError("grid spacing must divide the branch length");
    for (auto& v : f.u) v.assign(n, 0.0);
    return f;
  }

  std::size_t cells() const { return u[0].size(); }
  bool incoming(int j) const { return (j == 0) == (layout == Orientation::diverging); }
  double x_center(int j, std::size_t i) const {
    double x = (static_cast<double>(i) + 0.5) * dx;
    return incoming(j) ? x - L : x;
  }
  std::size_t junction_cell(int j) const { return incoming(j) ? cells() - 1 : 0; }
  double mass() const {
    long double s = 0;
    for (const auto& v : u)
      for (double x : v) s += x;
    return static_cast<double>(s * dx);
  }

  // rho^j(x) -> -rho^j(-x): exchanges the diverging and converging layouts.
  Field reversed() const {
    Field r = *this;
    r.layout = layout == Orientation::diverging ? Orientation::converging : Orientation::diverging;
    for (int j = 0; j < 3; ++j) {
      auto& v = r.u[static_cast<std::size_t>(j)];
      std::reverse(v.begin(), v.end());
      for (double& x : v) x = -x;
    }
    return r;
  }

  template <class Fn>
  static Field from_cell_averages(double L, double dx, Fn&& avg) {
    Field f = zeros(L, dx);
    for (int j = 0; j < 3; ++j)
      for (std::size_t i = 0; i < f.cells(); ++i) {
        double xc = f.x_center(j, i);
        f.u[static_cast<std::size_t>(j)][i] = avg(j, xc - 0.5 * dx, xc + 0.5 * dx);
      }
    return f;
  }
};

inline double l1_distance(const Field& a, const Field& b) {
  long double s = 0;
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < a.u[j].size(); ++i) s += std::abs(a.u[j][i] - b.u[j][i]);
  return static_cast<double>(s * a.dx);
}

inline double l1_norm(const Field& a) {
  long double s = 0;
  for (const auto& v : a.u)
    for (double x : v) s += std::abs(x);
  return static_cast<double>(s * a.dx);
}

// Junction rule: maps junction-adjacent states to (phi0, phi1, phi2) with phi0 = phi1 + phi2.
struct JunctionRule {
  std::string name;
  std::function<Triple(double, const Triple&)> flux;
  std::function<double(double)> next_switch;  // next discontinuity of the rule after t, if any
};

inline Triple meso_junction_flux(const FluxTriple& F, double A, int phase, const Triple& rho) {
  int k = phase;
  double phi = std::min({A, F[0].plus(rho[0]), F[k].minus(rho[k])});
  Triple out{phi, 0.0, 0.0};
  out[k] = phi;
  return out;
}

// Traces on the three branches produced by the junction fluxes (Riemann problem at the junction).
inline Triple reconstruct_trace(const FluxTriple& F, const Triple& rho, const Triple& phi) {
  auto same = [](double a, double b) { return std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(a)); };
  Triple p;
  p[0] = same(phi[0], F[0](rho[0])) && rho[0] <= F[0].b() ? rho[0] : F[0].inv_minus(std::clamp(phi[0], 0.0, F[0].f_max()));
  for (int k = 1; k <= 2; ++k)
    p[k] = same(phi[k], F[k](rho[k])) && rho[k] >= F[k].b() ? rho[k] : F[k].inv_plus(std::clamp(phi[k], 0.0, F[k].f_max()));
  return p;
}

struct TraceAudit {
  long evaluations = 0;
  long failures = 0;
  double worst = 0.0;

  void record(double v, double tol) {
    ++evaluations;
    worst = std::max(worst, v);
    if (!(v <= tol)) ++failures;
  }
  void merge(const TraceAudit& o) {
    evaluations += o.evaluations;
    failures += o.failures;
    worst = std::max(worst, o.worst);
  }
};

using MesoFlux = Triple (*)(const FluxTriple&, double, int, const Triple&);

// With an audit, the traces reconstructed from every junction flux are checked against the 1:1 germ in force.
inline JunctionRule meso_rule(const FluxTriple& F, const Signal& s, double eps, TraceAudit* audit = nullptr,
                              double tol = 1e-8, MesoFlux flux = meso_junction_flux) {
  if (!(eps > 0)) throw ValidationError("period eps must be positive");
  return {"meso",
          [F, s, eps, audit, tol, flux](double t, const Triple& rho) {
            double tau = t / eps;
            double A = s.A(tau);
            int phase = s.phase(tau);
            Triple phi = flux(F, A, phase, rho);
            if (audit) {
              Triple p = reconstruct_trace(F, rho, phi);
              audit->record(germ_violation(meso_germ_params(A, phase, F[0].f_max()), F, p), tol);
            }
            return phi;
          },
          [s, eps](double t) { return s.next_switch(t, eps); }};
}

struct MacroAudit {
  std::atomic<long> evaluations{0};
  std::atomic<long> hits[4] = {0, 0, 0, 0};  // demand-split, first-only binding, second-only binding, both binding
};

inline Triple macro_junction_flux(const FluxTriple& F, const GermParams& L, const Triple& rho, int* branch_case = nullptr) {
  double d = F[0].plus(rho[0]);
  double c1 = std::min(F[1].minus(rho[1]), L.bar1), c2 = std::min(F[2].minus(rho[2]), L.bar2);
  double total = std::min(d, L.bar0);
  double l1 = L.hat1.upper_inverse(c1), l2 = L.hat2.upper_inverse(c2);
  double lstar = std::min({total, l1, l2});
  double tol = 1e-14 * std::max(1.0, L.bar0);
  Triple phi;
  int which = 0;
  if (lstar >= total - tol) {
    phi = {total, L.hat(1, total), L.hat(2, total)};
  } else {
    bool b1 = l1 <= lstar + tol, b2 = l2 <= lstar + tol;
    phi[1] = b1 ? c1 : std::max(0.0, std::min(total - (b2 ? c2 : 0.0), c1));
    phi[2] = b2 ? c2 : std::max(0.0, std::min(total - (b1 ? c1 : 0.0), c2));
    phi[0] = phi[1] + phi[2];
    which = b1 && b2 ? 3 : (b1 ? 1 : 2);
  }
  if (branch_case) *branch_case = which;
  return phi;
}

inline JunctionRule macro_rule(const FluxTriple& F, const GermParams& L, MacroAudit* audit = nullptr,
                               double tol = 1e-8) {
  return {"macro",
          [F, L, audit, tol](double, const Triple& rho) {
            int which = 0;
            Triple phi = macro_junction_flux(F, L, rho, &which);
            Triple p = reconstruct_trace(F, rho, phi);
            double v = germ_violation(L, F, p);
            if (audit) {
              ++audit->evaluations;
              ++audit->hits[which];
            }
            if (!(v <= tol)) {
              std::ostringstream os;
              os.precision(17);
              os << "junction trace (" << p[0] << ", " << p[1] << ", " << p[2] << ") from states (" << rho[0] << ", "
                 << rho[1] << ", " << rho[2] << ") violates the effective germ by " << v;
              throw GermViolation(os.str());
            }
            return phi;
          },
          {}};
}

struct SimulationOptions {
  double T = 1.0;
  double cfl = 0.9;
  std::vector<double> snapshot_times;
  bool record_trace = true;
  bool record_ledger = true;
  // Optional dense space-time record of one branch over [history_t0, history_t1].
  int history_branch = -1;
  double history_t0 = 0.0, history_t1 = 0.0;
};

struct Snapshot {
  double t;
  Field field;
};

struct TraceRow {
  double t;   // end of the step
  double dt;
  Triple phi, p;
};

struct LedgerRow {
  double t, mass, inflow, outflow, residual;
};

struct HistoryRow {
  double t;
  std::vector<double> u;
};

struct Trajectory {
  Field final;
  std::vector<Snapshot> snapshots;
  std::vector<TraceRow> trace;
  std::vector<LedgerRow> ledger;
  std::vector<HistoryRow> history;
  double max_ledger_residual = 0.0;
  long steps = 0;
  double dt_max = 0.0;
};

inline double stable_dt(const FluxTriple& F, double dx, double cfl) {
  if (!(cfl > 0 && cfl <= 1.0)) throw ValidationError("CFL number must lie in (0, 1]");
  return cfl * dx / F.max_speed();
}

// One explicit Godunov step on the diverging layout; returns the junction fluxes used.
inline Triple fvm_step(Field& fld, const FluxTriple& F, const JunctionRule& rule, double t, double dt,
                       double* inflow = nullptr, double* outflow = nullptr) {
  const std::size_t n = fld.cells();
  Triple rho{fld.u[0][n - 1], fld.u[1][0], fld.u[2][0]};
  Triple phi = rule.flux(t + 0.5 * dt, rho);
  double r = dt / fld.dx;
  double in = 0.0, out = 0.0;
  static thread_local std::vector<double> flux;
  flux.resize(n + 1);
  for (int j = 0; j < 3; ++j) {
    auto& u = fld.u[static_cast<std::size_t>(j)];
    const Flux& f = F[j];
    if (j == 0) {
      flux[0] = f(u[0]);
      for (std::size_t i = 1; i < n; ++i) flux[i] = godunov_flux(f, u[i - 1], u[i]);
      flux[n] = phi[0];
      in = flux[0];
    } else {
      flux[0] = phi[static_cast<std::size_t>(j)];
      for (std::size_t i = 1; i < n; ++i) flux[i] = godunov_flux(f, u[i - 1], u[i]);
      flux[n] = f(u[n - 1]);
      out += flux[n];
    }
    for (std::size_t i = 0; i < n; ++i) u[i] -= r * (flux[i + 1] - flux[i]);
  }
  if (inflow) *inflow = in;
  if (outflow) *outflow = out;
  return phi;
}

inline Trajectory simulate(const FluxTriple& F, const JunctionRule& rule, Field init, const SimulationOptions& o) {
  if (init.layout != Orientation::diverging) throw ValidationError("simulate expects the diverging layout");
  for (int j = 0; j < 3; ++j)
    for (double v : init.u[static_cast<std::size_t>(j)]) F[j].check_domain(v, 1e-9);
  Trajectory tr;
  double dtc = stable_dt(F, init.dx, o.cfl);
  tr.dt_max = dtc;
  auto snaps = o.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;
  double t = 0.0;
  Field& u = init;
  auto take_snapshots = [&]() {
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
      tr.snapshots.push_back({snaps[next_snap], u});
      ++next_snap;
    }
  };
  auto record_history = [&]() {
    if (o.history_branch >= 0 && t >= o.history_t0 - 1e-12 && t <= o.history_t1 + 1e-12)
      tr.history.push_back({t, u.u[static_cast<std::size_t>(o.history_branch)]});
  };
  take_snapshots();
  record_history();
  double mass = u.mass();
  while (t < o.T - 1e-14) {
    double dt = std::min(dtc, o.T - t);
    if (rule.next_switch) dt = std::min(dt, rule.next_switch(t) - t);
    if (next_snap < snaps.size()) dt = std::min(dt, snaps[next_snap] - t);
    if (!(dt > 0)) dt = std::min(dtc, o.T - t);
    double in = 0, out = 0;
    Triple phi = fvm_step(u, F, rule, t, dt, &in, &out);
    t += dt;
    ++tr.steps;
    double m = u.mass();
    double res = (m - mass) - dt * (in - out);
    tr.max_ledger_residual = std::max(tr.max_ledger_residual, std::abs(res));
    mass = m;
    if (o.record_ledger) tr.ledger.push_back({t, m, in, out, res});
    if (o.record_trace) {
      const std::size_t n = u.cells();
      tr.trace.push_back({t, dt, phi, {u.u[0][n - 1], u.u[1][0], u.u[2][0]}});
    }
    take_snapshots();
    record_history();
  }
  tr.final = u;
  return tr;
}

// Converging (2:1) problem solved through the reversal x -> -x, rho -> -rho onto a diverging problem.
inline Trajectory simulate_converging(const FluxTriple& F, const std::function<JunctionRule(const FluxTriple&)>& make_rule,
                                      const Field& init, const SimulationOptions& o) {
  if (init.layout != Orientation::converging) throw ValidationError("expected the converging layout");
  FluxTriple Fr = F.reversed();
  Trajectory tr = simulate(Fr, make_rule(Fr), init.reversed(), o);
  tr.final = tr.final.reversed();
  for (auto& s : tr.snapshots) s.field = s.field.reversed();
  for (auto& row : tr.trace) row.p = reverse_triple(row.p);
  for (auto& h : tr.history) {
    std::reverse(h.u.begin(), h.u.end());
    for (double& x : h.u) x = -x;
  }
  return tr;
}

struct KatoReport {
  std::vector<double> distance;  // L1 distance after each step
  double worst_increase = 0.0;
  bool contractive = true;
};

inline KatoReport kato_check(const FluxTriple& F, const JunctionRule& rule, Field a, Field b, double T,
                             double cfl = 0.9, double tol = 1e-10) {
  KatoReport r;
  double dtc = stable_dt(F, a.dx, cfl);
  double t = 0.0;
  r.distance.push_back(l1_distance(a, b));
  while (t < T - 1e-14) {
    double dt = std::min(dtc, T - t);
    if (rule.next_switch) dt = std::min(dt, rule.next_switch(t) - t);
    fvm_step(a, F, rule, t, dt);
    fvm_step(b, F, rule, t, dt);
    t += dt;
    double d = l1_distance(a, b);
    double inc = d - r.distance.back();
    r.worst_increase = std::max(r.worst_increase, inc);
    if (inc > tol) r.contractive = false;
    r.distance.push_back(d);
  }
  return r;
}

// Space-time total variation of one branch over [t - R/3, t + R/3] x [x - 2 s R / 3, x + 2 s R / 3].
inline double bv_estimate(const Trajectory& tr, const Field& layout_ref, int branch, double t, double x, double R,
                          double speed) {
  double t0 = t - R / 3, t1 = t + R / 3;
  double x0 = x - 2 * speed * R / 3, x1 = x + 2 * speed * R / 3;
  if (layout_ref.incoming(branch) ? x1 >= 0.0 : x0 <= 0.0) throw RangeError("space-time box intersects the junction");
  const auto& H = tr.history;
  if (H.size() < 2 || H.front().t > t0 + 1e-9 || H.back().t < t1 - 1e-9)
    throw RangeError("space-time record does not cover the requested box");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < layout_ref.cells(); ++i) {
    double xc = layout_ref.x_center(branch, i);
    if (xc >= x0 && xc <= x1) idx.push_back(i);
  }
  if (idx.size() < 2) throw RangeError("box narrower than two cells");
  double V = 0.0;
  for (std::size_t n = 0; n + 1 < H.size(); ++n) {
    if (H[n].t < t0 - 1e-12 || H[n + 1].t > t1 + 1e-12) continue;
    double dt = H[n + 1].t - H[n].t;
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) V += std::abs(H[n].u[idx[k + 1]] - H[n].u[idx[k]]) * dt;
    for (std::size_t i : idx) V += std::abs(H[n + 1].u[i] - H[n].u[i]) * layout_ref.dx;
  }
  return V;
}

// Fraction of recorded steps whose junction-adjacent cells lie in the 1:1 germ active during that step.
inline double meso_trace_pass_rate(const FluxTriple& F, const Signal& s, double eps, const Trajectory& tr, double tol) {
  if (tr.trace.empty()) return 1.0;
  long pass = 0;
  for (const auto& row : tr.trace) {
    double tau = (row.t - 0.5 * row.dt) / eps;
    if (germ_contains(meso_germ_params(s, tau, F[0].f_max()), F, row.p, tol)) ++pass;
  }
  return static_cast<double>(pass) / static_cast<double>(tr.trace.size());
}

struct BoundaryTraceRow {
  double t;
  Triple p;
};

inline std::vector<BoundaryTraceRow> boundary_trace(const Trajectory& tr) {
  std::vector<BoundaryTraceRow> v;
  for (const auto& row : tr.trace) v.push_back({row.t, row.p});
  return v;
}

}  // namespace tlgerm
