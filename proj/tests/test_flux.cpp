#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tlgerm/flux.hpp"

using namespace tlgerm;

namespace {

Flux unit() { return Flux::quadratic(0.0, 1.0, 1.0); }

Flux sampled_unit() {
  std::vector<double> p, f;
  for (int i = 0; i <= 20; ++i) {
    double x = i / 20.0;
    p.push_back(x);
    f.push_back(4 * x * (1 - x));
  }
  return Flux::sampled(p, f);
}

}  // namespace

TEST(Flux, QuadraticValues) {
  Flux f = unit();
  EXPECT_DOUBLE_EQ(f(0.5), 1.0);
  EXPECT_DOUBLE_EQ(f(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f(0.25), 0.75);
  EXPECT_DOUBLE_EQ(f.b(), 0.5);
  EXPECT_THROW(f.check_domain(1.5), DomainError);
}

TEST(Flux, Envelopes) {
  Flux f = unit();
  EXPECT_DOUBLE_EQ(f.plus(0.75), 1.0);
  EXPECT_DOUBLE_EQ(f.minus(0.25), 1.0);
  EXPECT_DOUBLE_EQ(f.plus(0.25), 0.75);
  for (const Flux& g : {unit(), sampled_unit(), unit().reversed()}) {
    double prev_p = -1, prev_m = 2;
    for (int i = 0; i <= 1000; ++i) {
      double p = g.a() + (g.c() - g.a()) * i / 1000;
      EXPECT_GE(g.plus(p), prev_p);
      EXPECT_LE(g.minus(p), prev_m);
      prev_p = g.plus(p);
      prev_m = g.minus(p);
    }
  }
}

TEST(Flux, Inverses) {
  Flux f = unit();
  EXPECT_DOUBLE_EQ(f.inv_plus(1.0), 0.5);
  EXPECT_DOUBLE_EQ(f.inv_plus(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f.inv_minus(0.0), 1.0);
  EXPECT_NEAR(f.inv_plus(0.75), 0.25, 1e-15);
  EXPECT_THROW(f.inv_plus(1.5), RangeError);
  EXPECT_THROW(f.inv_minus(-0.1), RangeError);
}

TEST(Flux, InverseRoundTrip) {
  for (const Flux& g : {Flux::quadratic(0.0, 1.0, 1.0), Flux::quadratic(-0.3, 2.0, 0.7), sampled_unit(), unit().reversed()}) {
    double prev_up = -1e9, prev_down = 1e9;
    for (int i = 0; i <= 500; ++i) {
      double l = g.f_max() * i / 500;
      double up = g.inv_plus(l), down = g.inv_minus(l);
      EXPECT_NEAR(g(up), l, 1e-10);
      EXPECT_NEAR(g(down), l, 1e-10);
      EXPECT_LE(up, g.b() + 1e-12);
      EXPECT_GE(down, g.b() - 1e-12);
      EXPECT_GE(up, prev_up);
      EXPECT_LE(down, prev_down);
      prev_up = up;
      prev_down = down;
    }
  }
}

TEST(Flux, SampledValidation) {
  EXPECT_THROW(Flux::sampled({0, 0.5, 1}, {0, 1}), ValidationError);
  EXPECT_THROW(Flux::sampled({0, 0.3, 0.6, 1}, {0, 0.2, 0.9, 0}), ValidationError);  // convex kink
  EXPECT_THROW(Flux::sampled({0, 0.5, 1}, {0.1, 1, 0}), ValidationError);
  Flux s = sampled_unit();
  EXPECT_NEAR(s(0.35), 4 * 0.35 * 0.65, 1e-12);
  EXPECT_NEAR(s.f_max(), 1.0, 1e-15);
  double prev = 1e9;
  for (int i = 0; i <= 400; ++i) {
    double d = s.derivative(i / 400.0);
    EXPECT_LE(d, prev + 1e-12);
    prev = d;
  }
}

TEST(Flux, Reverse) {
  Flux r = unit().reversed();
  EXPECT_DOUBLE_EQ(r.a(), -1.0);
  EXPECT_DOUBLE_EQ(r.c(), 0.0);
  EXPECT_DOUBLE_EQ(r.b(), -0.5);
  EXPECT_DOUBLE_EQ(r.f_max(), 1.0);
  Flux rr = r.reversed();
  EXPECT_TRUE(rr == unit());
  for (double p : {0.0, 0.1, 0.37, 0.5, 0.9}) {
    EXPECT_DOUBLE_EQ(rr(p), unit()(p));
    EXPECT_DOUBLE_EQ(r(-p), unit()(p));
  }
}

TEST(Xi, EdgeValues) {
  ShiftedFlux g{unit(), 0.2, unit()(0.2), -0.2, 0.3};  // increasing branch, q in [-0.2, 0.3]
  double top = g(g.top());
  EXPECT_NEAR(xi(g, 2.0, 0.0).value, 2.0 * top, 1e-14);
  EXPECT_NEAR(xi(g, 0.0, 1.5).value, -1.5 * g.lo, 1e-14);
}

TEST(Xi, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0, 1);
  ShiftedFlux inc{unit(), 0.2, unit()(0.2), -0.2, 0.3};
  ShiftedFlux dec{unit(), 0.7, unit()(0.7), 0.5 - 0.7, 1.0 - 0.7};
  for (int i = 0; i < 200; ++i) {
    double s = 3 * U(rng), y = 4 * U(rng);
    EXPECT_NEAR(xi(inc, s, y).value, oracle::brute_xi(inc, s, y), 1e-6);
    EXPECT_NEAR(xi(dec, s, -y).value, oracle::brute_xi(dec, s, -y), 1e-6);
  }
}

TEST(Xi, EnvelopeDerivatives) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0, 1);
  ShiftedFlux g{unit(), 0.2, unit()(0.2), -0.2, 0.3};
  double zlo = g.derivative(g.lo), zhi = g.derivative(g.hi);
  int checked = 0;
  for (int i = 0; i < 400 && checked < 200; ++i) {
    double s = 0.2 + 2 * U(rng), y = 3 * U(rng);
    double z = y / s;
    if (std::abs(z - zlo) < 0.05 || std::abs(z - zhi) < 0.05) continue;
    const double h = 1e-5;
    auto v = xi(g, s, y);
    double dy = (xi(g, s, y + h).value - xi(g, s, y - h).value) / (2 * h);
    double ds = (xi(g, s + h, y).value - xi(g, s - h, y).value) / (2 * h);
    EXPECT_NEAR(dy, -v.p, 1e-3);
    EXPECT_NEAR(ds, g(v.p), 1e-3);
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}
