#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "tlgerm/errors.hpp"
#include "tlgerm/flux.hpp"
#include "tlgerm/piecewise_linear.hpp"
#include "tlgerm/signal.hpp"

namespace tlgerm {

using Triple = std::array<double, 3>;

// Branch 0 is the incoming road (x < 0), branches 1 and 2 the outgoing roads (x > 0).
struct FluxTriple {
  std::array<Flux, 3> f;

  const Flux& operator[](int j) const { return f[static_cast<std::size_t>(j)]; }
  FluxTriple reversed() const { return {{f[0].reversed(), f[1].reversed(), f[2].reversed()}}; }
  double max_speed() const { return std::max({f[0].max_speed(), f[1].max_speed(), f[2].max_speed()}); }
  Triple lows() const { return {f[0].a(), f[1].a(), f[2].a()}; }
  Triple highs() const { return {f[0].c(), f[1].c(), f[2].c()}; }
  bool in_box(const Triple& P, double slack = 1e-12) const {
    for (int j = 0; j < 3; ++j) {
      double s = slack * std::max(1.0, f[j].c() - f[j].a());
      if (!(P[j] >= f[j].a() - s && P[j] <= f[j].c() + s)) return false;
    }
    return true;
  }
};

inline Triple reverse_triple(const Triple& P) { return {-P[0], -P[1], -P[2]}; }

inline double sgn(double v) { return (v > 0) - (v < 0); }

inline double entropy_flux(const Flux& f, double pbar, double p) { return sgn(p - pbar) * (f(p) - f(pbar)); }

enum class Orientation { diverging, converging };

// D(Pbar, P) with the junction at x = 0: incoming roads enter with +q, outgoing with -q.
inline double dissipation(const FluxTriple& F, const Triple& Pbar, const Triple& P,
                          Orientation o = Orientation::diverging) {
  double q0 = entropy_flux(F[0], Pbar[0], P[0]);
  double q1 = entropy_flux(F[1], Pbar[1], P[1]);
  double q2 = entropy_flux(F[2], Pbar[2], P[2]);
  return o == Orientation::diverging ? q0 - q1 - q2 : q1 + q2 - q0;
}

inline double rh_residual(const FluxTriple& F, const Triple& P) { return F[0](P[0]) - F[1](P[1]) - F[2](P[2]); }

// Sign-pattern characterisation of D(Pbar, P) < 0 for Rankine-Hugoniot pairs.
inline bool dissipation_negative_by_pattern(const Triple& s, const Triple& Fd) {
  auto weak = [&](int k, int i, int j) {
    return s[k] != 0 && s[i] * s[j] >= 0 && s[k] * s[i] <= 0 && s[k] * s[j] <= 0;
  };
  return (weak(0, 1, 2) && s[0] * Fd[0] < 0) || (weak(1, 0, 2) && s[1] * Fd[1] > 0) ||
         (weak(2, 0, 1) && s[2] * Fd[2] > 0);
}

struct GermParams {
  double bar0 = 0, bar1 = 0, bar2 = 0;
  PiecewiseLinear hat1, hat2;

  double bar(int k) const { return k == 0 ? bar0 : (k == 1 ? bar1 : bar2); }
  const PiecewiseLinear& hat_curve(int k) const { return k == 1 ? hat1 : hat2; }
  double hat(int k, double lambda) const {
    if (lambda >= bar0) return bar(k);
    return hat_curve(k)(std::max(lambda, 0.0));
  }

  void validate(double tol = 1e-10) const {
    auto fail = [](const std::string& m) { throw ValidationError("germ parameters: " + m); };
    if (bar0 < 0 || bar1 < 0 || bar2 < 0) fail("limiters must be nonnegative");
    if (std::abs(bar0 - bar1 - bar2) > tol) fail("bar0 must equal bar1 + bar2");
    if (!hat1.nondecreasing(tol) || !hat2.nondecreasing(tol)) fail("hat curves must be nondecreasing");
    if (std::abs(hat(1, 0.0)) > tol || std::abs(hat(2, 0.0)) > tol) fail("hat curves must vanish at zero");
    if (std::abs(hat_curve(1)(bar0) - bar1) > tol || std::abs(hat_curve(2)(bar0) - bar2) > tol)
      fail("hat curves must reach the limiters at bar0");
    std::vector<double> xs = hat1.xs();
    xs.insert(xs.end(), hat2.xs().begin(), hat2.xs().end());
    for (double l : xs) {
      if (l > bar0) continue;
      if (std::abs(hat(1, l) + hat(2, l) - std::min(l, bar0)) > tol) {
        std::ostringstream os;
        os << "hat1 + hat2 != min(lambda, bar0) at lambda = " << l;
        fail(os.str());
      }
    }
  }
};

enum class Envelope { plus, minus };

inline double envelope(const Flux& f, double p, Envelope e) { return e == Envelope::plus ? f.plus(p) : f.minus(p); }

// Largest violation of the germ conditions (0 when P belongs to the germ exactly).
inline double germ_violation(const GermParams& L, const FluxTriple& F, const Triple& P, Envelope e = Envelope::plus) {
  if (!F.in_box(P)) return std::numeric_limits<double>::infinity();
  double v = std::abs(rh_residual(F, P));
  for (int j = 0; j < 3; ++j) {
    double fj = F[j](P[j]);
    v = std::max(v, -fj);
    v = std::max(v, fj - L.bar(j));
  }
  double lam = envelope(F[0], P[0], e);
  for (int k = 1; k <= 2; ++k) v = std::max(v, L.hat(k, lam) - envelope(F[k], P[k], e));
  return std::max(v, 0.0);
}

inline bool germ_contains(const GermParams& L, const FluxTriple& F, const Triple& P, double tol,
                          Envelope e = Envelope::plus) {
  return germ_violation(L, F, P, e) <= tol;
}

inline Triple gamma_point(const GermParams& L, const FluxTriple& F, double lambda) {
  return {F[0].inv_plus(lambda), F[1].inv_plus(L.hat(1, lambda)), F[2].inv_plus(L.hat(2, lambda))};
}

struct GeneratorSet {
  std::vector<Triple> gamma;
  Triple P1, P2, P3;

  std::vector<Triple> all() const {
    auto v = gamma;
    v.push_back(P1);
    v.push_back(P2);
    v.push_back(P3);
    return v;
  }
};

inline GeneratorSet generator_set(const GermParams& L, const FluxTriple& F, int n) {
  if (n < 2) throw ValidationError("generator set needs at least two curve samples");
  GeneratorSet g;
  for (int i = 0; i < n; ++i) g.gamma.push_back(gamma_point(L, F, L.bar0 * i / (n - 1)));
  g.P1 = {F[0].inv_minus(L.bar1), F[1].inv_plus(L.bar1), F[2].c()};
  g.P2 = {F[0].inv_minus(L.bar2), F[1].c(), F[2].inv_plus(L.bar2)};
  g.P3 = {F[0].c(), F[1].c(), F[2].c()};
  return g;
}

// Draws points of the germ from its strata (curve, mixed fluid/congested sheets, corner points).
class GermSampler {
 public:
  GermSampler(GermParams L, FluxTriple F, std::uint64_t seed) : L_(std::move(L)), F_(std::move(F)), rng_(seed) {}

  Triple operator()() {
    int stratum = std::uniform_int_distribution<int>(0, 9)(rng_);
    double l0 = L_.bar0;
    switch (stratum) {
      case 0:
      case 1: return gamma_point(L_, F_, uni(0, l0));
      case 2:
      case 3: {
        int k = stratum == 2 ? 1 : 2, o = 3 - k;
        double lam = uni(0, l0);
        double sk = uni(std::max(0.0, lam - L_.bar(o)), L_.hat(k, lam));
        Triple P;
        P[0] = F_[0].inv_plus(lam);
        P[k] = F_[k].inv_minus(sk);
        P[o] = F_[o].inv_plus(std::clamp(lam - sk, 0.0, F_[o].f_max()));
        return P;
      }
      case 4: {
        double lam = uni(0, l0);
        double s1 = uni(std::max(0.0, lam - L_.bar2), std::min(L_.bar1, lam));
        double s2 = std::max(0.0, lam - s1);
        return {F_[0].inv_plus(lam), F_[1].inv_minus(s1), F_[2].inv_minus(s2)};
      }
      case 5:
      case 6:
      case 7: {
        Triple P;
        double lam = 0.0;
        for (int k = 1; k <= 2; ++k) {
          bool saturated = std::uniform_int_distribution<int>(0, 3)(rng_) == 0;
          double s = saturated ? L_.bar(k) : uni(0, L_.bar(k));
          P[k] = saturated ? F_[k].inv_plus(s) : F_[k].inv_minus(s);
          lam += s;
        }
        P[0] = F_[0].inv_minus(std::min(lam, F_[0].f_max()));
        return P;
      }
      case 8: {
        auto g = generator_set(L_, F_, 2);
        return std::uniform_int_distribution<int>(0, 1)(rng_) ? g.P1 : g.P2;
      }
      default: return {F_[0].c(), F_[1].c(), F_[2].c()};
    }
  }

 private:
  GermParams L_;
  FluxTriple F_;
  std::mt19937_64 rng_;

  double uni(double lo, double hi) {
    if (!(hi > lo)) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
};

struct PropertyReport {
  double min_dissipation = std::numeric_limits<double>::infinity();
  Triple worst_pbar{}, worst_p{};
  long pairs = 0;
  double max_sample_violation = 0.0;  // how far sampled points sit from the germ (sampler soundness)
};

inline PropertyReport check_germ_property(const GermParams& L, const FluxTriple& F, long n_pairs,
                                          std::uint64_t seed = 1) {
  GermSampler s(L, F, seed);
  PropertyReport r;
  for (long i = 0; i < n_pairs; ++i) {
    Triple a = s(), b = s();
    r.max_sample_violation = std::max({r.max_sample_violation, germ_violation(L, F, a), germ_violation(L, F, b)});
    double d = dissipation(F, a, b);
    if (d < r.min_dissipation) {
      r.min_dissipation = d;
      r.worst_pbar = a;
      r.worst_p = b;
    }
    ++r.pairs;
  }
  return r;
}

struct GenerationReport {
  long points = 0;
  long dissipative = 0;       // grid points with D >= -tol_d against every generator
  long counterexamples = 0;   // dissipative points failing membership at tol_member
  double grid_spacing = 0.0;
  double worst_violation = 0.0;  // largest germ violation among dissipative points
  Triple worst_point{};
};

// Certifies on a grid of the box that dissipativity against the generators implies membership.
inline GenerationReport check_generation(const GermParams& L, const FluxTriple& F, int grid_res, int n_gamma,
                                         double tol_d, double tol_member) {
  if (grid_res < 2) throw ValidationError("generation grid needs at least two nodes per axis");
  auto gens = generator_set(L, F, n_gamma).all();
  std::vector<Triple> gf(gens.size());
  for (std::size_t g = 0; g < gens.size(); ++g)
    for (int j = 0; j < 3; ++j) gf[g][j] = F[j](gens[g][j]);

  GenerationReport r;
  std::array<std::vector<double>, 3> axis, fax;
  for (int j = 0; j < 3; ++j) {
    double a = F[j].a(), c = F[j].c();
    r.grid_spacing = std::max(r.grid_spacing, (c - a) / (grid_res - 1));
    for (int i = 0; i < grid_res; ++i) {
      double p = i == grid_res - 1 ? c : a + (c - a) * i / (grid_res - 1);
      axis[j].push_back(p);
      fax[j].push_back(F[j](p));
    }
  }
  for (int i0 = 0; i0 < grid_res; ++i0)
    for (int i1 = 0; i1 < grid_res; ++i1)
      for (int i2 = 0; i2 < grid_res; ++i2) {
        Triple P{axis[0][i0], axis[1][i1], axis[2][i2]};
        Triple fp{fax[0][i0], fax[1][i1], fax[2][i2]};
        ++r.points;
        bool ok = true;
        for (std::size_t g = 0; g < gens.size() && ok; ++g) {
          double d = sgn(P[0] - gens[g][0]) * (fp[0] - gf[g][0]) - sgn(P[1] - gens[g][1]) * (fp[1] - gf[g][1]) -
                     sgn(P[2] - gens[g][2]) * (fp[2] - gf[g][2]);
          ok = d >= -tol_d;
        }
        if (!ok) continue;
        ++r.dissipative;
        double v = germ_violation(L, F, P);
        if (v > r.worst_violation) {
          r.worst_violation = v;
          r.worst_point = P;
        }
        if (v > tol_member) ++r.counterexamples;
      }
  return r;
}

// Germ of the 1:1 junction active on branch `phase` with intensity A.
inline GermParams meso_germ_params(double A, int phase, double f0max) {
  GermParams L;
  L.bar0 = A;
  L.bar1 = phase == 1 ? A : 0.0;
  L.bar2 = phase == 2 ? A : 0.0;
  double top = std::max(f0max, A);
  PiecewiseLinear active = A > 0 && A < top ? PiecewiseLinear({0.0, A, top}, {0.0, A, A})
                                             : PiecewiseLinear({0.0, top}, {0.0, A});
  PiecewiseLinear idle({0.0, top}, {0.0, 0.0});
  L.hat1 = phase == 1 ? active : idle;
  L.hat2 = phase == 2 ? active : idle;
  return L;
}

inline GermParams meso_germ_params(const Signal& s, double t, double f0max) {
  return meso_germ_params(s.A(t), s.phase(t), f0max);
}

// Direct form: the idle branch carries nothing and the active branch sees min(A, demand, supply).
inline bool meso_germ_direct(const FluxTriple& F, double A, int phase, const Triple& P, double tol) {
  if (!F.in_box(P)) return false;
  int k = phase, o = 3 - phase;
  double f0 = F[0](P[0]), fk = F[k](P[k]);
  double m = std::min({A, F[0].plus(P[0]), F[k].minus(P[k])});
  return std::abs(F[o](P[o])) <= tol && std::abs(m - f0) <= tol && std::abs(f0 - fk) <= tol;
}

}  // namespace tlgerm
