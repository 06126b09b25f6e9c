#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "tlgerm/errors.hpp"
#include "tlgerm/flux.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/periodic.hpp"
#include "tlgerm/piecewise_linear.hpp"
#include "tlgerm/signal.hpp"

namespace tlgerm {

// max_{t1 <= t} int_{t1}^t (lambda - A), by scanning the breakpoints of A in [t - 1, t].
inline double psi_scan(const Signal& s, double lambda, double t) {
  auto G = [&](double tau) { return lambda * tau - s.integral(tau); };
  double gmin = std::min(G(t), G(t - 1.0));
  double base = std::floor(t - 1.0);
  for (double n = base; n <= std::floor(t); n += 1.0)
    for (std::size_t i = 0; i < s.size(); ++i) {
      double tau = n + s.start(i);
      if (tau >= t - 1.0 && tau <= t) gmin = std::min(gmin, G(tau));
    }
  return std::max(0.0, G(t) - gmin);
}

struct FluxPiece {
  double t0, t1;
  double psi0, slope;  // psi on the piece is psi0 + slope (t - t0)
  double F;            // junction flux on the piece
  int phase;
};

// One period of the queue profile psi and the junction flux F it induces.
struct FluxProfile {
  double lambda = 0.0;
  bool congested = false;
  std::vector<FluxPiece> pieces;

  double F(double t) const { return piece(t).F; }
  double psi(double t) const {
    const auto& p = piece(t);
    double u = t - std::floor(t);
    return p.psi0 + p.slope * (u - p.t0);
  }
  double integral(int phase) const {
    double s = 0.0;
    for (const auto& p : pieces)
      if (p.phase == phase) s += p.F * (p.t1 - p.t0);
    return s;
  }
  PeriodicPL psi_path() const { return path([](const FluxPiece& p) { return p.slope; }, pieces.front().psi0); }
  // -int_0^t (F 1_{phase} - level): the outgoing-road boundary datum.
  PeriodicPL outgoing_path(int phase, double level) const {
    return path([&](const FluxPiece& p) { return -((p.phase == phase ? p.F : 0.0) - level); }, 0.0);
  }

 private:
  const FluxPiece& piece(double t) const {
    double u = t - std::floor(t);
    auto it = std::upper_bound(pieces.begin(), pieces.end(), u, [](double x, const FluxPiece& p) { return x < p.t0; });
    std::size_t i = it == pieces.begin() ? 0 : static_cast<std::size_t>(it - pieces.begin()) - 1;
    return pieces[std::min(i, pieces.size() - 1)];
  }
  template <class Slope>
  PeriodicPL path(Slope&& slope, double v0) const {
    std::vector<double> t{0.0}, v{v0};
    for (const auto& p : pieces) {
      t.push_back(p.t1);
      v.push_back(v.back() + slope(p) * (p.t1 - p.t0));
    }
    std::vector<double> tt{t.front()}, vv{v.front()};
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i] - tt.back() <= 1e-15 && i + 1 < t.size()) continue;
      tt.push_back(t[i]);
      vv.push_back(v[i]);
    }
    tt.back() = 1.0;
    return PeriodicPL(std::move(tt), std::move(vv));
  }
};

// Fluid incoming state with f0(p0) = lambda <= mean(A): queue psi >= 0 propagated exactly over one period.
inline FluxProfile junction_flux_profile(const Signal& s, double lambda) {
  double mean = s.mean();
  if (lambda < 0 || lambda > mean * (1 + 1e-12) + 1e-15) {
    std::ostringstream os;
    os << "incoming flux " << lambda << " exceeds the mean signal intensity " << mean;
    throw RangeError(os.str());
  }
  lambda = std::min(lambda, mean);
  FluxProfile prof;
  prof.lambda = lambda;
  double scale = std::max(1.0, s.max_A());
  double zero = 1e-15 * scale;
  double psi = psi_scan(s, lambda, 0.0);
  auto push = [&](double t0, double t1, double p0, double sl, double F, int ph) {
    if (t1 > t0) prof.pieces.push_back({t0, t1, p0, sl, F, ph});
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    double a = s.start(i), e = s.end(i), A = s.A_of(i);
    int ph = s.phase_of(i);
    double slope = lambda - A;
    if (psi > zero) {
      double hit = slope < 0 ? a + psi / (-slope) : std::numeric_limits<double>::infinity();
      if (hit < e) {
        push(a, hit, psi, slope, A, ph);
        push(hit, e, 0.0, 0.0, lambda, ph);
        psi = 0.0;
      } else {
        push(a, e, psi, slope, A, ph);
        psi = psi + slope * (e - a);
      }
    } else if (slope > 0) {
      push(a, e, 0.0, slope, A, ph);
      psi = slope * (e - a);
    } else {
      push(a, e, 0.0, 0.0, lambda, ph);
      psi = 0.0;
    }
  }
  return prof;
}

// Congested incoming state carrying lambda = mean(A): psi = int_0^t (lambda - A) and F = A.
inline FluxProfile congested_flux_profile(const Signal& s) {
  FluxProfile prof;
  prof.lambda = s.mean();
  prof.congested = true;
  double psi = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double slope = prof.lambda - s.A_of(i);
    prof.pieces.push_back({s.start(i), s.end(i), psi, slope, s.A_of(i), s.phase_of(i)});
    psi += slope * s.length(i);
  }
  return prof;
}

struct ObstacleValue {
  double phi;     // sup_{s <= t} B(s) + lambda (t - s)
  double flux;    // lambda + A(t) - right derivative of phi
};

// Obstacle representation of the junction flux; independent of the queue propagation.
inline ObstacleValue obstacle_phi(const Signal& s, double lambda, double t) {
  double Bt = s.integral(t);
  double best = Bt;
  double base = std::floor(t - 1.0);
  for (double n = base; n <= std::floor(t); n += 1.0)
    for (std::size_t i = 0; i < s.size(); ++i) {
      double tau = n + s.start(i);
      if (tau >= t - 1.0 && tau < t) best = std::max(best, s.integral(tau) + lambda * (t - tau));
    }
  double A = s.A(t);
  double dphi = best - Bt > 1e-13 * std::max(1.0, std::abs(Bt)) ? lambda : std::max(A, lambda);
  return {best, lambda + A - dphi};
}

inline Triple effective_limiters(const Signal& s) { return {s.mean(), s.limiter(1), s.limiter(2)}; }

inline double hat_lambda(const Signal& s, int k, double lambda) {
  if (lambda >= s.mean()) return s.limiter(k);
  return junction_flux_profile(s, lambda).integral(k);
}

struct EffectiveGerm {
  GermParams params;
  std::uint64_t signal_hash = 0;
  std::size_t kinks_inserted = 0;
};

// Tabulates the hat curves; they are piecewise linear in lambda, so kinks are located and inserted as nodes.
inline EffectiveGerm build_effective_germ(const Signal& s, double f0max, int fill = 256) {
  double bar0 = s.mean();
  if (bar0 > f0max * (1 + 1e-12)) throw ValidationError("mean signal intensity exceeds the incoming capacity");
  EffectiveGerm eg;
  eg.signal_hash = s.hash();
  eg.params.bar0 = bar0;
  eg.params.bar1 = s.limiter(1);
  eg.params.bar2 = s.limiter(2);
  double top = std::max(f0max, bar0);
  if (bar0 <= 0) {
    eg.params.hat1 = PiecewiseLinear({0.0, top}, {0.0, 0.0});
    eg.params.hat2 = eg.params.hat1;
    return eg;
  }

  auto eval = [&](double l) -> std::array<double, 2> {
    if (l >= bar0) return {eg.params.bar1, eg.params.bar2};
    auto p = junction_flux_profile(s, l);
    return {p.integral(1), p.integral(2)};
  };

  std::vector<double> seed{0.0, bar0};
  for (int i = 1; i < fill; ++i) seed.push_back(bar0 * i / fill);
  for (const auto& seg : s.segments())
    if (seg.A > 0 && seg.A < bar0) seed.push_back(seg.A);
  std::sort(seed.begin(), seed.end());
  seed.erase(std::unique(seed.begin(), seed.end(), [](double a, double b) { return b - a < 1e-14; }), seed.end());
  seed.back() = bar0;

  struct Node {
    double x;
    std::array<double, 2> y;
  };
  std::vector<Node> nodes;
  for (double x : seed) nodes.push_back({x, eval(x)});

  double tol = 1e-13 * std::max(1.0, bar0);
  auto linear_on = [&](const Node& l, const Node& r) {
    for (double w : {0.25, 0.5, 0.75}) {
      double x = l.x + w * (r.x - l.x);
      auto y = eval(x);
      for (int k = 0; k < 2; ++k)
        if (std::abs(y[k] - (l.y[k] + w * (r.y[k] - l.y[k]))) > tol) return false;
    }
    return true;
  };

  std::vector<Node> out{nodes.front()};
  std::function<void(const Node&, const Node&, int)> refine = [&](const Node& l, const Node& r, int depth) {
    if (depth > 60 || r.x - l.x < 1e-12 * bar0 || linear_on(l, r)) {
      out.push_back(r);
      return;
    }
    double d = (r.x - l.x) * 1e-4;
    auto yl = eval(l.x + d), yr = eval(r.x - d);
    double x = 0.5 * (l.x + r.x);
    auto jump = [&](int k) { return std::abs((yl[k] - l.y[k]) / d - (r.y[k] - yr[k]) / d); };
    int k = jump(0) >= jump(1) ? 0 : 1;
    double sl = (yl[k] - l.y[k]) / d, sr = (r.y[k] - yr[k]) / d;
    if (std::abs(sl - sr) > 1e-9) {
      double xk = (r.y[k] - l.y[k] + sl * l.x - sr * r.x) / (sl - sr);
      if (xk > l.x + d && xk < r.x - d) {
        x = xk;
        ++eg.kinks_inserted;
      }
    }
    Node m{x, eval(x)};
    refine(l, m, depth + 1);
    refine(m, r, depth + 1);
  };
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) refine(nodes[i], nodes[i + 1], 0);

  std::vector<double> xs, h1, h2;
  for (const auto& n : out) {
    xs.push_back(n.x);
    h1.push_back(n.y[0]);
    h2.push_back(n.y[1]);
  }
  if (top > bar0) {
    xs.push_back(top);
    h1.push_back(eg.params.bar1);
    h2.push_back(eg.params.bar2);
  }
  eg.params.hat1 = PiecewiseLinear(xs, h1);
  eg.params.hat2 = PiecewiseLinear(xs, h2);
  return eg;
}

inline double hat_p(const GermParams& L, const FluxTriple& F, int k, double p0) {
  double lam = F[0](p0);
  if (lam > L.bar0 * (1 + 1e-12) + 1e-15) throw RangeError("incoming state carries more than the effective limiter");
  return F[k].inv_plus(L.hat(k, std::min(lam, L.bar0)));
}

enum class SubgermCase { curve = 1, first_only = 2, second_only = 3, saturated = 4 };

struct SubgermPoint {
  SubgermCase kind;
  Triple p;
  double lambda;  // incoming flux f0(p0)
};

inline SubgermPoint subgerm_point(const GermParams& L, const FluxTriple& F, SubgermCase kind, double lambda = 0.0) {
  switch (kind) {
    case SubgermCase::curve: return {kind, gamma_point(L, F, lambda), lambda};
    case SubgermCase::first_only: return {kind, {F[0].inv_minus(L.bar1), F[1].inv_plus(L.bar1), F[2].c()}, L.bar1};
    case SubgermCase::second_only: return {kind, {F[0].inv_minus(L.bar2), F[1].c(), F[2].inv_plus(L.bar2)}, L.bar2};
    default: return {kind, {F[0].c(), F[1].c(), F[2].c()}, 0.0};
  }
}

inline std::vector<SubgermPoint> characteristic_subgerm(const GermParams& L, const FluxTriple& F, int n) {
  std::vector<SubgermPoint> v;
  for (int i = 0; i < n; ++i) v.push_back(subgerm_point(L, F, SubgermCase::curve, L.bar0 * i / std::max(1, n - 1)));
  v.push_back(subgerm_point(L, F, SubgermCase::first_only));
  v.push_back(subgerm_point(L, F, SubgermCase::second_only));
  v.push_back(subgerm_point(L, F, SubgermCase::saturated));
  return v;
}

// Continuous periodic signal, decreasing from its mean at t = 0 to its minimum at t1 (the first phase),
// then increasing to its maximum and decreasing back to the mean.
struct UnimodalSignal {
  std::vector<double> t, A;  // piecewise-linear knots on [0, 1], A.front() == A.back()

  double operator()(double u) const { return PiecewiseLinear(t, A)(u - std::floor(u)); }
  double mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) s += 0.5 * (A[i] + A[i + 1]) * (t[i + 1] - t[i]);
    return s;
  }
  std::size_t argmin() const { return static_cast<std::size_t>(std::min_element(A.begin(), A.end()) - A.begin()); }
  double t1() const { return t[argmin()]; }

  void validate() const {
    auto fail = [](const std::string& m) { throw ValidationError("unimodal signal: " + m); };
    if (t.size() < 4 || t.size() != A.size() || t.front() != 0.0 || t.back() != 1.0) fail("knots must span [0, 1]");
    if (std::abs(A.front() - A.back()) > 1e-12) fail("signal must be periodic");
    if (std::abs(A.front() - mean()) > 1e-9) fail("the decreasing phase must start where A equals its mean");
    std::size_t im = argmin();
    std::size_t ix = static_cast<std::size_t>(std::max_element(A.begin() + static_cast<long>(im), A.end()) - A.begin());
    for (std::size_t i = 0; i < im; ++i)
      if (!(A[i + 1] < A[i])) fail("A must decrease strictly on the first phase");
    for (std::size_t i = im; i < ix; ++i)
      if (A[i + 1] < A[i]) fail("A must increase after its minimum");
    for (std::size_t i = ix; i + 1 < A.size(); ++i)
      if (A[i + 1] > A[i]) fail("A must decrease after its maximum");
  }

  // Exact integral of A over [a, b] within [0, 1].
  double integral(double a, double b) const {
    PiecewiseLinear pl(t, A);
    std::vector<double> pts{a, b};
    for (double x : t)
      if (x > a && x < b) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += 0.5 * (pl(pts[i]) + pl(pts[i + 1])) * (pts[i + 1] - pts[i]);
    return s;
  }

  // Time in [0, t1] where the decreasing branch equals lambda.
  double inverse_on_first_phase(double lambda) const {
    std::size_t im = argmin();
    for (std::size_t i = 0; i < im; ++i)
      if (lambda <= A[i] && lambda >= A[i + 1]) return t[i] + (A[i] - lambda) / (A[i] - A[i + 1]) * (t[i + 1] - t[i]);
    return lambda > A.front() ? 0.0 : t1();
  }

  // n equal steps carrying the exact averages; a step belongs to the first phase when its midpoint does.
  Signal steps(int n) const {
    std::vector<SignalSegment> segs;
    double T1 = t1();
    for (int i = 0; i < n; ++i) {
      double a = static_cast<double>(i) / n, b = static_cast<double>(i + 1) / n;
      segs.push_back({b - a, 0.5 * (a + b) < T1 ? 1 : 2, integral(a, b) / (b - a)});
    }
    return Signal(std::move(segs));
  }
};

// Hat curve of the first phase for a unimodal signal, from the inverse of its decreasing branch.
inline double concave_hat(const UnimodalSignal& u, double lambda) {
  double T1 = u.t1(), m = u.A[u.argmin()], M = u.A.front();
  if (lambda <= m) return T1 * lambda;
  if (lambda >= M) return u.integral(0.0, T1);
  double tl = u.inverse_on_first_phase(lambda);
  return u.integral(0.0, T1) - (u.integral(0.0, tl) - lambda * tl);
}

inline double concave_hat_slope(const UnimodalSignal& u, double lambda) {
  double m = u.A[u.argmin()];
  return lambda < m ? u.t1() : u.inverse_on_first_phase(lambda);
}

}  // namespace tlgerm
