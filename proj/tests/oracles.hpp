#pragma once

// Independent reference computations used by the unit tests. None of these reuse the library's own
// closed-form shortcuts: they sample, scan or integrate directly.

#include <algorithm>
#include <cmath>
#include <vector>

#include "tlgerm/flux.hpp"
#include "tlgerm/fvm.hpp"
#include "tlgerm/signal.hpp"

namespace oracle {

using tlgerm::Flux;
using tlgerm::ShiftedFlux;
using tlgerm::SignalSegment;

inline double brute_xi(const ShiftedFlux& g, double s, double y, int n = 100000) {
  double best = -1e300;
  for (int i = 0; i <= n; ++i) {
    double p = g.lo + (g.hi - g.lo) * i / n;
    best = std::max(best, -p * y + s * g(p));
  }
  return best;
}

// B(t) = int_0^t A, summed segment by segment.
inline double running_integral(const std::vector<SignalSegment>& segs, double t) {
  double period = 0.0, mean = 0.0;
  for (const auto& s : segs) {
    period += s.duration;
    mean += s.duration * s.A;
  }
  double n = std::floor(t / period);
  double u = t - n * period, acc = n * mean;
  for (const auto& s : segs) {
    double d = std::min(u, s.duration);
    acc += d * s.A;
    u -= d;
    if (u <= 0) break;
  }
  return acc;
}

// max over t1 in [t - 1, t] of lambda (t - t1) - (B(t) - B(t1)), on a dense grid of t1.
inline double brute_psi(const std::vector<SignalSegment>& segs, double lambda, double t, int n = 20000) {
  double Bt = running_integral(segs, t), best = 0.0;
  for (int i = 0; i <= n; ++i) {
    double t1 = t - static_cast<double>(i) / n;
    best = std::max(best, lambda * (t - t1) - (Bt - running_integral(segs, t1)));
  }
  return best;
}

// Entropy solution of a single-road Riemann problem for a concave flux at similarity variable z = x / t.
inline double riemann(const Flux& f, double uL, double uR, double z) {
  if (uL < uR) {
    double s = (f(uR) - f(uL)) / (uR - uL);
    return z < s ? uL : uR;
  }
  if (uL == uR) return uL;
  if (z <= f.derivative(uL)) return uL;
  if (z >= f.derivative(uR)) return uR;
  return f.inv_derivative(z);
}

// Plain Godunov on one line of cells with copy boundaries; the junction is replaced by an ordinary interface.
inline std::vector<double> line_godunov(const Flux& f, std::vector<double> u, double dx, double dt, int steps,
                                        double A = 1e300) {
  const std::size_t n = u.size();
  std::vector<double> flux(n + 1);
  for (int s = 0; s < steps; ++s) {
    for (std::size_t i = 1; i < n; ++i) flux[i] = std::min(f.plus(u[i - 1]), f.minus(u[i]));
    flux[n / 2] = std::min(flux[n / 2], A);
    flux[0] = std::min(f.plus(u[0]), f.minus(u[0]));
    flux[n] = std::min(f.plus(u[n - 1]), f.minus(u[n - 1]));
    for (std::size_t i = 0; i < n; ++i) u[i] -= dt / dx * (flux[i + 1] - flux[i]);
  }
  return u;
}

}  // namespace oracle
