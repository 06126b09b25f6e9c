#pragma once

#include <algorithm>
#include <array>

#include "tlgerm/effective.hpp"
#include "tlgerm/flux.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/signal.hpp"

namespace tlgerm {

inline FluxTriple quadratic_triple(double f0max, double f1max, double f2max, double a = 0.0, double c = 1.0) {
  return {{Flux::quadratic(a, c, f0max), Flux::quadratic(a, c, f1max), Flux::quadratic(a, c, f2max)}};
}

// Two phases of lengths theta1 and 1 - theta1, each run at the largest admissible intensity.
struct TwoPhaseExample {
  FluxTriple F;
  double theta1;

  Signal signal() const {
    double phi1 = std::min(F[0].f_max(), F[1].f_max()), phi2 = std::min(F[0].f_max(), F[2].f_max());
    return Signal({{theta1, 1, phi1}, {1.0 - theta1, 2, phi2}});
  }
  // Closed-form hat curves.
  std::array<double, 2> hat(double lambda) const {
    double theta2 = 1.0 - theta1;
    double phi1 = std::min(F[0].f_max(), F[1].f_max()), phi2 = std::min(F[0].f_max(), F[2].f_max());
    double bar1 = theta1 * phi1, bar2 = theta2 * phi2, bar0 = bar1 + bar2;
    lambda = std::clamp(lambda, 0.0, bar0);
    if (phi1 >= phi2) return {std::max(theta1 * lambda, lambda - bar2), std::min(theta2 * lambda, bar2)};
    return {std::min(theta1 * lambda, bar1), std::max(theta2 * lambda, lambda - bar1)};
  }
};

// A red phase of length theta0 followed by green phases theta1 (exit 1) and theta2 (exit 2).
struct StopThenTwoExits {
  FluxTriple F;  // F[1] and F[2] share their maximum
  double theta0, theta1, theta2;

  double A0() const { return std::min(F[0].f_max(), F[1].f_max()); }
  Signal signal() const { return Signal({{theta0, 1, 0.0}, {theta1, 1, A0()}, {theta2, 2, A0()}}); }
  std::array<double, 2> hat(double lambda) const {
    double bar1 = A0() * theta1, bar0 = A0() * (theta1 + theta2);
    lambda = std::clamp(lambda, 0.0, bar0);
    return {std::min(lambda * (theta0 + theta1), bar1), std::max(lambda * theta2, lambda - bar1)};
  }
};

inline TwoPhaseExample example_two_phase() { return {quadratic_triple(1.0, 1.0, 0.5), 0.4}; }

inline StopThenTwoExits example_stop_two_exits() {
  return {quadratic_triple(1.0, 1.0, 1.0), 1.0 / 3, 1.0 / 3, 1.0 / 3};
}

inline UnimodalSignal example_unimodal() { return {{0.0, 0.375, 0.75, 1.0}, {0.5, 0.2, 0.86, 0.5}}; }

}  // namespace tlgerm
