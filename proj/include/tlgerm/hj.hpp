#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "tlgerm/effective.hpp"
#include "tlgerm/errors.hpp"
#include "tlgerm/flux.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/periodic.hpp"
#include "tlgerm/signal.hpp"

namespace tlgerm {

struct HJValue {
  double w = 0.0;
  double p = 0.0;       // d/dx w at (t, x), i.e. the maximiser of xi at the optimal time
  double p_alt = 0.0;   // other end of the superdifferential when the optimiser is not unique
  bool kink = false;
  double t1 = 0.0;      // optimal boundary time
};

// w(t, x) = sup_{t1 <= t} psi(t1) - xi(t - t1, x) on the half-line x >= 0 (g increasing)
// or x <= 0 (g decreasing). With clip_at_zero the result is max(0, w).
class HalfLineHJ {
 public:
  HalfLineHJ(ShiftedFlux g, PeriodicPL psi, bool clip_at_zero = false)
      : g_(std::move(g)), psi_(std::move(psi)), clip_(clip_at_zero) {
    g_top_ = g_(g_.top());
    if (g_top_ <= 1e-14 && !psi_.constant(1e-12))
      throw ValidationError("boundary datum must be constant when the Hamiltonian never exceeds zero");
  }

  const ShiftedFlux& hamiltonian() const { return g_; }
  const PeriodicPL& boundary() const { return psi_; }

  HJValue eval(double t, double x) const {
    HJValue r = raw(t, x);
    if (!clip_) return r;
    if (r.w < 0) return {0.0, 0.0, 0.0, false, t};
    if (r.w == 0.0) return {0.0, r.p, 0.0, true, r.t1};
    return r;
  }
  double w(double t, double x) const { return eval(t, x).w; }
  double dx(double t, double x) const { return eval(t, x).p; }

 private:
  ShiftedFlux g_;
  PeriodicPL psi_;
  bool clip_;
  double g_top_ = 0.0;

  HJValue raw(double t, double x) const {
    if (g_top_ <= 1e-14) {
      double pstar = g_.inverse(0.0);
      return {psi_(t) + pstar * x, pstar, pstar, false, -std::numeric_limits<double>::infinity()};
    }
    double xi0 = std::max(-g_.lo * x, -g_.hi * x);
    double window = (psi_.max() - psi_.min() + g_.top() * x + xi0) / g_top_ + 1.0;
    double scale = std::max({1.0, std::abs(psi_.max()), std::abs(psi_.min()), std::abs(xi0)});

    HJValue best;
    best.w = -std::numeric_limits<double>::infinity();
    double pmin = 0, pmax = 0;
    auto consider = [&](double t1) {
      auto z = xi(g_, t - t1, x);
      double J = psi_(t1) - z.value;
      double tie = 1e-12 * scale;
      if (J > best.w + tie) {
        best = {J, z.p, z.p, false, t1};
        pmin = pmax = z.p;
      } else if (J >= best.w - tie) {
        pmin = std::min(pmin, z.p);
        pmax = std::max(pmax, z.p);
        if (J > best.w) {
          best.w = J;
          best.p = z.p;
          best.t1 = t1;
        }
      }
    };

    const auto& kn = psi_.knots();
    double lo_t = t - window;
    double n = std::floor(t);
    std::size_t i = psi_.piece_at(t - n);
    consider(t);
    while (true) {
      double a = n + kn[i], b = std::min(n + kn[i + 1], t);
      if (b < lo_t) break;
      a = std::max(a, lo_t);
      consider(a);
      double sigma = psi_.slope(i);
      double ps = g_.inverse(-sigma);
      double gp = g_.derivative(ps);
      if (gp != 0.0 && x * gp > 0) {
        double t1 = std::clamp(t - x / gp, a, b);
        consider(t1);
      } else if (x == 0.0) {
        consider(b);
      }
      if (i == 0) {
        i = psi_.pieces() - 1;
        n -= 1.0;
      } else {
        --i;
      }
    }
    if (pmax - pmin > 1e-9) {
      best.kink = true;
      best.p_alt = best.p == pmin ? pmax : pmin;
    }
    return best;
  }
};

struct Corrector {
  SubgermCase kind = SubgermCase::curve;
  Triple at_infinity{};  // (p0, p1, p2) approached far from the junction
  Signal signal;         // signal the corrector is periodic for
  FluxProfile profile;   // junction flux F over one period
  FluxTriple fluxes;
  std::optional<HalfLineHJ> w0;
  std::array<std::optional<HalfLineHJ>, 3> out;  // index 1 and 2 used

  // Density u^j(t, x); x <= 0 on branch 0, x >= 0 on branches 1, 2.
  double density(int j, double t, double x) const {
    if (j == 0) return at_infinity[0] + (w0 ? w0->dx(t, x) : 0.0);
    const auto& w = out[static_cast<std::size_t>(j)];
    return at_infinity[j] + (w ? w->dx(t, x) : 0.0);
  }
  // Antiderivative in x up to a per-branch additive constant.
  double potential(int j, double t, double x) const {
    const auto& w = j == 0 ? w0 : out[static_cast<std::size_t>(j)];
    return (w ? w->w(t, x) : 0.0) + at_infinity[j] * x;
  }
  double cell_average(int j, double t, double xl, double xr) const {
    return (potential(j, t, xr) - potential(j, t, xl)) / (xr - xl);
  }
};

inline HalfLineHJ outgoing_solution(const Flux& f, const FluxProfile& prof, int k, double level) {
  double ph = f.inv_plus(level);
  ShiftedFlux g{f, ph, f(ph), f.a() - ph, f.b() - ph};
  return HalfLineHJ(g, prof.outgoing_path(k, level));
}

inline Corrector build_corrector(const FluxTriple& F, const Signal& s, SubgermCase kind, double lambda = 0.0) {
  Corrector c;
  c.kind = kind;
  c.fluxes = F;
  c.signal = s;
  const Flux& f0 = F[0];
  switch (kind) {
    case SubgermCase::curve: {
      c.profile = junction_flux_profile(s, lambda);
      double p0 = f0.inv_plus(c.profile.lambda);
      c.at_infinity[0] = p0;
      ShiftedFlux g{f0, p0, f0(p0), f0.b() - p0, f0.c() - p0};
      c.w0.emplace(g, c.profile.psi_path(), true);
      for (int k = 1; k <= 2; ++k) {
        double level = std::min(c.profile.integral(k), F[k].f_max());
        c.at_infinity[k] = F[k].inv_plus(level);
        c.out[k].emplace(outgoing_solution(F[k], c.profile, k, level));
      }
      break;
    }
    case SubgermCase::first_only:
    case SubgermCase::second_only: {
      int k = kind == SubgermCase::first_only ? 1 : 2, o = 3 - k;
      Signal masked = s.masked(k);
      c.signal = s;
      c.profile = congested_flux_profile(masked);
      double level = c.profile.lambda;
      double p0 = f0.inv_minus(level);
      c.at_infinity[0] = p0;
      ShiftedFlux g{f0, p0, f0(p0), f0.b() - p0, f0.c() - p0};
      c.w0.emplace(g, c.profile.psi_path(), false);
      c.at_infinity[k] = F[k].inv_plus(level);
      c.out[k].emplace(outgoing_solution(F[k], c.profile, k, level));
      c.at_infinity[o] = F[o].c();
      break;
    }
    case SubgermCase::saturated:
      c.profile = congested_flux_profile(Signal({{1.0, 1, 0.0}}));
      c.at_infinity = {f0.c(), F[1].c(), F[2].c()};
      break;
  }
  return c;
}

inline Corrector build_corrector(const FluxTriple& F, const Signal& s, const SubgermPoint& p) {
  return build_corrector(F, s, p.kind, p.lambda);
}

struct CorrectorCheck {
  double conservation_residual = 0.0;  // worst cell balance defect, per unit cell width
  double trace_pass_rate = 0.0;        // fraction of sampled times whose traces lie in the 1:1 germ
  std::vector<double> decay_constants; // M * sup_{|x| >= M} |u - u_inf| for each M
  bool decay_stable = true;
  double support_radius = 0.0;         // fitted C with u0 = p0 for x <= -C (fluid incoming case)
  bool support_verified = true;
};

struct CorrectorCheckOptions {
  int trace_samples = 1000;
  double trace_tol = 1e-3;
  double trace_offset = 1e-6;
  std::vector<double> decay_levels{10.0, 20.0, 40.0};
  double decay_factor = 2.0;
  int decay_x_samples = 24;
  int decay_t_samples = 48;
  double dx = 1.0 / 200;
};

// Adaptive Simpson on `panels` equal panels; the panels keep short pulses from hiding between the first samples.
template <class Fn>
double adaptive_simpson(const Fn& f, double a, double b, double tol, int panels = 256, int depth = 40) {
  auto rec = [&](auto&& self, double l, double r, double fl, double fm, double fr, double whole, double eps, int d) -> double {
    double m = 0.5 * (l + r), lm = 0.5 * (l + m), rm = 0.5 * (m + r);
    double flm = f(lm), frm = f(rm);
    double left = (m - l) / 6 * (fl + 4 * flm + fm), right = (r - m) / 6 * (fm + 4 * frm + fr);
    if (d <= 0 || std::abs(left + right - whole) <= 15 * std::max(eps, 1e-15)) return left + right + (left + right - whole) / 15;
    return self(self, l, m, fl, flm, fm, left, eps / 2, d - 1) + self(self, m, r, fm, frm, fr, right, eps / 2, d - 1);
  };
  double sum = 0.0, h = (b - a) / panels, fl = f(a);
  for (int i = 0; i < panels; ++i) {
    double l = a + i * h, r = i + 1 == panels ? b : l + h;
    double fm = f(0.5 * (l + r)), fr = f(r);
    sum += rec(rec, l, r, fl, fm, fr, (r - l) / 6 * (fl + 4 * fm + fr), tol / panels, depth);
    fl = fr;
  }
  return sum;
}

// Balance of the cell [xl, xr] over [ta, tb]: mass from the potential, boundary fluxes from the density.
inline double corrector_balance(const Corrector& c, int j, double xl, double xr, double ta, double tb) {
  const Flux& f = c.fluxes[j];
  double mass = (c.potential(j, tb, xr) - c.potential(j, tb, xl)) - (c.potential(j, ta, xr) - c.potential(j, ta, xl));
  auto net = [&](double t) { return f(c.density(j, t, xr)) - f(c.density(j, t, xl)); };
  return mass + adaptive_simpson(net, ta, tb, 1e-10);
}

inline CorrectorCheck verify_corrector(const Corrector& c, const CorrectorCheckOptions& o = {}) {
  CorrectorCheck r;
  const auto& F = c.fluxes;

  for (int j = 0; j < 3; ++j) {
    double side = j == 0 ? -1.0 : 1.0;
    for (double x0 : {0.25, 1.5}) {
      double a = side * x0, b = side * (x0 + o.dx);
      double R = corrector_balance(c, j, std::min(a, b), std::max(a, b), 0.1, 1.1);
      r.conservation_residual = std::max(r.conservation_residual, std::abs(R) / o.dx);
    }
  }

  int pass = 0;
  for (int i = 0; i < o.trace_samples; ++i) {
    double t = (i + 0.5) / o.trace_samples;
    Triple P{c.density(0, t, -o.trace_offset), c.density(1, t, o.trace_offset), c.density(2, t, o.trace_offset)};
    if (germ_contains(meso_germ_params(c.signal, t, F[0].f_max()), F, P, o.trace_tol)) ++pass;
  }
  r.trace_pass_rate = static_cast<double>(pass) / o.trace_samples;

  for (double M : o.decay_levels) {
    double sup = 0.0;
    for (int ix = 0; ix < o.decay_x_samples; ++ix) {
      double x = M * std::pow(4.0, static_cast<double>(ix) / (o.decay_x_samples - 1));
      for (int it = 0; it < o.decay_t_samples; ++it) {
        double t = (it + 0.37) / o.decay_t_samples;
        for (int k = 1; k <= 2; ++k)
          if (c.out[k]) sup = std::max(sup, std::abs(c.density(k, t, x) - c.at_infinity[k]));
        if (c.w0 && c.kind != SubgermCase::curve) sup = std::max(sup, std::abs(c.density(0, t, -x) - c.at_infinity[0]));
      }
    }
    r.decay_constants.push_back(M * sup);
  }
  double cmax = *std::max_element(r.decay_constants.begin(), r.decay_constants.end());
  double cmin = *std::min_element(r.decay_constants.begin(), r.decay_constants.end());
  r.decay_stable = cmax <= 1e-12 || cmax <= o.decay_factor * cmin;

  if (c.kind == SubgermCase::curve && c.w0) {
    // the queue cannot reach further than the incoming characteristics travel in one period
    double reach = F[0].max_speed() + 1.0;
    for (int it = 0; it < 50; ++it) {
      double t = (it + 0.5) / 50;
      for (double x = -o.dx; x >= -reach; x -= o.dx)
        if (c.density(0, t, x) != c.at_infinity[0]) r.support_radius = std::max(r.support_radius, -x);
    }
    double C = r.support_radius + o.dx;
    for (int it = 0; it < 200 && r.support_verified; ++it) {
      double t = (it + 0.123) / 200;
      for (int ix = 0; ix < 40; ++ix) {
        double x = -C - (10.0 * C + 10.0) * (ix + 0.5) / 40;
        if (c.density(0, t, x) != c.at_infinity[0]) {
          r.support_verified = false;
          break;
        }
      }
    }
  }
  return r;
}

}  // namespace tlgerm
