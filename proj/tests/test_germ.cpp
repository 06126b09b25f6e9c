#include <gtest/gtest.h>

#include <random>

#include "tlgerm/effective.hpp"
#include "tlgerm/examples.hpp"
#include "tlgerm/germ.hpp"

using namespace tlgerm;

namespace {

struct Ex1 {
  TwoPhaseExample ex = example_two_phase();
  FluxTriple F = ex.F;
  GermParams L = build_effective_germ(ex.signal(), 1.0).params;
};

}  // namespace

TEST(EntropyFlux, Values) {
  Flux f = Flux::quadratic(0, 1, 1);
  EXPECT_EQ(entropy_flux(f, 0.3, 0.3), 0.0);
  EXPECT_NEAR(entropy_flux(f, 0.2, 0.5), 0.36, 1e-15);
  EXPECT_DOUBLE_EQ(entropy_flux(f, 0.2, 0.5), entropy_flux(f, 0.5, 0.2));
}

TEST(Dissipation, SymmetricAndZeroOnDiagonal) {
  Ex1 e;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 100; ++i) {
    Triple P{U(rng), U(rng), U(rng)}, Q{U(rng), U(rng), U(rng)};
    EXPECT_EQ(dissipation(e.F, P, P), 0.0);
    EXPECT_DOUBLE_EQ(dissipation(e.F, P, Q), dissipation(e.F, Q, P));
  }
}

TEST(RankineHugoniot, Residual) {
  FluxTriple F = quadratic_triple(1, 1, 1);
  EXPECT_EQ(rh_residual(F, {0, 0, 0}), 0.0);
  EXPECT_EQ(rh_residual(F, {1, 1, 1}), 0.0);
  EXPECT_NEAR(rh_residual(F, {F[0].inv_plus(0.6), F[1].inv_plus(0.4), F[2].inv_plus(0.2)}), 0.0, 1e-15);
}

TEST(GermContains, GeneratorPointsAndPerturbation) {
  Ex1 e;
  auto g = generator_set(e.L, e.F, 50);
  EXPECT_TRUE(germ_contains(e.L, e.F, g.P3, 1e-12));
  Triple P1{e.F[0].inv_minus(e.L.bar1), e.F[1].inv_plus(e.L.bar1), e.F[2].c()};
  EXPECT_TRUE(germ_contains(e.L, e.F, P1, 1e-12));
  Triple P = gamma_point(e.L, e.F, 0.3);
  P[1] = e.F[1].inv_plus(e.F[1](P[1]) + 0.1 * e.F[1].f_max());
  EXPECT_FALSE(germ_contains(e.L, e.F, P, 1e-8));
  EXPECT_GT(std::abs(rh_residual(e.F, P)), 0.05);
}

TEST(GeneratorSet, Structure) {
  Ex1 e;
  const int n = 40;
  auto g = generator_set(e.L, e.F, n);
  ASSERT_EQ(g.gamma.size(), static_cast<std::size_t>(n));
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(g.gamma.front()[j], e.F[j].a(), 1e-15);
  Triple end{e.F[0].inv_plus(e.L.bar0), e.F[1].inv_plus(e.L.bar1), e.F[2].inv_plus(e.L.bar2)};
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(g.gamma.back()[j], end[j], 1e-12);
  auto all = g.all();
  EXPECT_EQ(all.size(), static_cast<std::size_t>(n + 3));
  for (const auto& P : all) {
    EXPECT_LE(std::abs(rh_residual(e.F, P)), 1e-10);
    EXPECT_TRUE(germ_contains(e.L, e.F, P, 1e-10));
  }
  EXPECT_THROW(generator_set(e.L, e.F, 1), ValidationError);
}

TEST(GermProperty, ExampleGermsAndGeneratorPairs) {
  Ex1 e;
  auto g = generator_set(e.L, e.F, 2);
  EXPECT_EQ(dissipation(e.F, g.P1, g.P1), 0.0);
  EXPECT_GE(dissipation(e.F, g.P1, g.P2), 0.0);
  auto r = check_germ_property(e.L, e.F, 10000, 11);
  EXPECT_GE(r.min_dissipation, -1e-9);
  EXPECT_LE(r.max_sample_violation, 1e-12);

  GermParams hand;
  hand.bar1 = 0.3;
  hand.bar2 = 0.25;
  hand.bar0 = 0.55;
  hand.hat1 = PiecewiseLinear({0, 0.2, 0.55, 1.0}, {0, 0.15, 0.3, 0.3});
  hand.hat2 = PiecewiseLinear({0, 0.2, 0.55, 1.0}, {0, 0.05, 0.25, 0.25});
  hand.validate();
  auto h = check_germ_property(hand, quadratic_triple(1, 0.6, 0.5), 10000, 12);
  EXPECT_GE(h.min_dissipation, -1e-9);
}

TEST(Generation, ExampleOneCertified) {
  Ex1 e;
  double h = 1.0 / 29;
  auto r = check_generation(e.L, e.F, 30, 200, h, 5 * h);
  EXPECT_EQ(r.counterexamples, 0);
  EXPECT_GT(r.dissipative, 3);
}

TEST(Generation, LimiterViolationIsDetectedByAGenerator) {
  Ex1 e;
  auto g = generator_set(e.L, e.F, 50);
  // incoming flux above bar0 + 0.1, split admissibly between the exits
  double l = e.L.bar0 + 0.1;
  Triple P{e.F[0].inv_plus(l), e.F[1].inv_plus(0.45), e.F[2].inv_plus(l - 0.45)};
  EXPECT_NEAR(rh_residual(e.F, P), 0.0, 1e-12);
  double worst = 0.0;
  for (const auto& Pb : {g.P1, g.P2, g.P3}) worst = std::min(worst, dissipation(e.F, Pb, P));
  EXPECT_LT(worst, 0.0);
  EXPECT_GE(dissipation(e.F, g.P3, g.P3), 0.0);
}

TEST(MesoGerm, Parameters) {
  auto L = meso_germ_params(0.4, 1, 1.0);
  EXPECT_DOUBLE_EQ(L.bar0, 0.4);
  EXPECT_DOUBLE_EQ(L.bar1, 0.4);
  EXPECT_DOUBLE_EQ(L.bar2, 0.0);
  EXPECT_DOUBLE_EQ(L.hat(1, 0.3), 0.3);
  EXPECT_DOUBLE_EQ(L.hat(1, 0.9), 0.4);
  EXPECT_DOUBLE_EQ(L.hat(2, 0.9), 0.0);

  FluxTriple F = quadratic_triple(1, 1, 1);
  auto Z = meso_germ_params(0.0, 2, 1.0);
  GermSampler s(Z, F, 4);
  for (int i = 0; i < 500; ++i) {
    Triple P = s();
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(F[j](P[j]), 0.0, 1e-12);
  }
}

TEST(MesoGerm, AgreesWithDirectFormula) {
  FluxTriple F = quadratic_triple(1, 0.8, 0.6);
  for (int phase : {1, 2}) {
    double A = 0.45;
    auto L = meso_germ_params(A, phase, 1.0);
    const int n = 40;
    long members = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Triple P{i / (n - 1.0), j / (n - 1.0), k / (n - 1.0)};
          bool a = germ_contains(L, F, P, 1e-9), b = meso_germ_direct(F, A, phase, P, 1e-9);
          EXPECT_EQ(a, b) << P[0] << ' ' << P[1] << ' ' << P[2];
          members += a;
        }
    EXPECT_GT(members, 0);
    GermSampler s(L, F, 8);
    for (int i = 0; i < 2000; ++i) {
      Triple P = s();
      EXPECT_TRUE(meso_germ_direct(F, A, phase, P, 1e-9));
    }
  }
}

TEST(Dissipation, SignPatternClassification) {
  // For Rankine-Hugoniot pairs, Fd0 = Fd1 + Fd2; D < 0 must occur exactly on the three listed patterns.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int s0 = -1; s0 <= 1; ++s0)
    for (int s1 = -1; s1 <= 1; ++s1)
      for (int s2 = -1; s2 <= 1; ++s2) {
        Triple s{double(s0), double(s1), double(s2)};
        for (int trial = 0; trial < 4000; ++trial) {
          double d1 = s1 == 0 ? 0.0 : U(rng), d2 = s2 == 0 ? 0.0 : U(rng);
          double d0 = d1 + d2;
          if (s0 == 0 && d0 != 0.0) continue;
          Triple Fd{d0, d1, d2};
          double D = s[0] * d0 - s[1] * d1 - s[2] * d2;
          if (std::abs(D) < 1e-12) continue;  // equal signs: D vanishes up to rounding
          EXPECT_EQ(D < 0, dissipation_negative_by_pattern(s, Fd)) << s0 << s1 << s2;
        }
      }
}

TEST(Reversion, InvolutionAndDissipationIdentity) {
  Ex1 e;
  FluxTriple R = e.F.reversed();
  GermSampler s(e.L, e.F, 21);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 1000; ++i) {
    Triple P{U(rng), U(rng), U(rng)}, Q{U(rng), U(rng), U(rng)};
    EXPECT_EQ(reverse_triple(reverse_triple(P)), P);
    EXPECT_NEAR(dissipation(R, reverse_triple(P), reverse_triple(Q), Orientation::converging),
                dissipation(e.F, P, Q), 1e-12);
    Triple G = s();
    EXPECT_NEAR(germ_violation(e.L, R, reverse_triple(G), Envelope::minus), germ_violation(e.L, e.F, G), 1e-12);
  }
  Triple P3{e.F[0].c(), e.F[1].c(), e.F[2].c()};
  EXPECT_TRUE(germ_contains(e.L, R, reverse_triple(P3), 1e-12, Envelope::minus));
}
