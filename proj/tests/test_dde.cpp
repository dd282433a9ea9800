#include <gtest/gtest.h>

#include <random>

#include "dposim/dde.hpp"
#include "dposim/presets.hpp"

using namespace dposim;

namespace {

const State kV0{cplx(1.0, 0.0), cplx(1.0, 0.0)};

ModelParams scaled_model(double g1, double g2, double eps, double S, int delta) {
  ModelParams p;
  p.gamma1 = g1;
  p.gamma2 = g2;
  p.eps_abs = eps;
  p.delay = DelaySpec::scaled(S, delta);
  return p;
}

}  // namespace

TEST(Dde, PureDecayWithoutPumpOrFeedback) {
  ModelParams p;
  p.gamma2 = 1.5;
  p.gamma3 = 0.5;
  p.delay = DelaySpec::raw(0.7);
  const ValidatedModel m = validate(p);
  const State v0{cplx(0.3, 0.4), cplx(0.3, -0.4)};
  const double t = 4 * 0.7;  // rate (g2 + g3) / 2 = 1
  const DdeTrace tr = integrate(m, v0, t, 0.7 / 500);
  const double expect = std::exp(-t);
  EXPECT_LE(std::abs(tr.v.back()[0] - v0[0] * expect), 1e-8 * std::abs(v0[0]) * expect);
  EXPECT_NEAR(tr.t.back(), t, 1e-12);
}

TEST(Dde, FirstIntervalIsUndelayedLinearSystem) {
  // on [0, tau] the delayed term is the constant v0: v' = A v + K v0
  const ValidatedModel m = validate(scaled_model(1.0, 2.0, 0.0, 0.5, 1));
  const DdeTrace tr = integrate(m, kV0, m.tau, m.tau / 1000);
  // eps = 0: c' = -G c - g1 c0, c(t) = (c0 + g1 c0 / G) e^{-G t} - g1 c0 / G
  const double G = m.derived.G, g1 = 1.0, t = tr.t.back();
  const double exact = (1.0 + g1 / G) * std::exp(-G * t) - g1 / G;
  EXPECT_NEAR(tr.v.back()[0].real(), exact, 1e-10);
}

TEST(Dde, ConjugateStructurePreserved) {
  ModelParams p = scaled_model(1.3, 2.0, 0.7, 0.37, 1);
  p.eps_phase = 0.9;
  const ValidatedModel m = validate(p);
  const State v0{cplx(0.2, -0.7), cplx(0.2, 0.7)};
  const DdeTrace tr = integrate(m, v0);
  for (const State& v : tr.v) EXPECT_LE(std::abs(v[1] - std::conj(v[0])), 1e-14 * std::max(1.0, std::abs(v[0])));
}

TEST(Dde, FourthOrderConvergence) {
  ModelParams p = scaled_model(0.2, 0.3, 0.1, 0.4, 1);
  p.eps_phase = 0.3;
  const ValidatedModel m = validate(p);
  const double t_end = 4.0 * m.tau;
  std::vector<cplx> ends;
  for (int n : {50, 100, 200, 400}) ends.push_back(integrate(m, kV0, t_end, m.tau / n).v.back()[0]);
  const double r1 = std::abs(ends[1] - ends[0]) / std::abs(ends[2] - ends[1]);
  const double r2 = std::abs(ends[2] - ends[1]) / std::abs(ends[3] - ends[2]);
  EXPECT_GT(r1, 12.0);
  EXPECT_LT(r1, 20.0);
  EXPECT_GT(r2, 12.0);
  EXPECT_LT(r2, 20.0);
}

TEST(Dde, StepTooLarge) {
  const ValidatedModel m = validate(scaled_model(1.0, 2.0, 0.5, 0.5, 0));
  try {
    integrate(m, kV0, 10.0, m.tau / 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepTooLarge);
  }
  EXPECT_THROW(integrate(m, kV0, -1.0, 1e-3), Error);
  ModelParams fast = scaled_model(100.0, 2.0, 0.5, 0.5, 0);
  EXPECT_THROW(integrate(validate(fast), kV0, 1.0, 1e-3), Error);
}

TEST(Dde, DefaultStepLandsOnDelayGrid) {
  const ValidatedModel m = validate(preset("fig3").model);
  const double dt = default_dde_dt(m);
  const double n = m.tau / dt;
  EXPECT_NEAR(n, std::round(n), 1e-9);
  EXPECT_LE(dt, m.tau / 50 * (1 + 1e-12));
}

TEST(Classify, PureExponential) {
  DdeTrace tr;
  tr.G = 1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 0.01 * i;
    tr.t.push_back(t);
    tr.v.push_back({cplx(std::exp(-t), 0.0), cplx(std::exp(-t), 0.0)});
    tr.norm.push_back(std::sqrt(2.0) * std::exp(-t));
  }
  const DdeClassification c = classify(tr);
  EXPECT_EQ(c.cls, DdeClass::Decaying);
  EXPECT_NEAR(c.rate, -1.0, 1e-3);
}

TEST(Classify, OverflowIsGrowing) {
  const ValidatedModel m = validate(scaled_model(1.0, 2.0, 5.0, 0.5, 1));
  const DdeTrace tr = integrate(m, kV0, 1000.0, default_dde_dt(m));
  EXPECT_TRUE(tr.overflow);
  EXPECT_EQ(classify(tr).cls, DdeClass::Growing);
}

TEST(Classify, ZeroTraceIsDegenerate) {
  const ValidatedModel m = validate(scaled_model(1.0, 2.0, 0.5, 0.5, 1));
  const DdeTrace tr = integrate(m, {cplx(0, 0), cplx(0, 0)});
  try {
    classify(tr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateTrace);
  }
}

TEST(Classify, MarginalWhenFlat) {
  DdeTrace tr;
  tr.G = 1.0;
  for (int i = 0; i <= 100; ++i) {
    tr.t.push_back(i);
    tr.v.push_back(kV0);
    tr.norm.push_back(std::sqrt(2.0));
  }
  EXPECT_EQ(classify(tr).cls, DdeClass::Marginal);
}

TEST(Dde, DestructiveNegativeAlphaDecays) {
  // alpha_tilde = -0.5 with g1 = 1, g2 = 2: |eps| = 0.5
  const ValidatedModel m = validate(scaled_model(1.0, 2.0, 0.5, 0.5, 0));
  const DdeClassification c = classify(integrate(m, kV0));
  EXPECT_EQ(c.cls, DdeClass::Decaying);
  EXPECT_LT(char_roots_lambert(m).s1.real(), 0.0);
}

TEST(Dde, PointPDecays) {
  const ValidatedModel m = validate(preset("fig5-g3").model);
  const DdeClassification c = classify(integrate(m, kV0));
  EXPECT_EQ(c.cls, DdeClass::Decaying);
  EXPECT_NEAR(c.rate, char_root_oracle(m).dominant.real(), 0.02 * std::abs(char_root_oracle(m).dominant.real()));
}

TEST(Pyragas, DestructiveIsInvariant) {
  const ValidatedModel m = validate(pyragas_params(2.0, 0.5, 0));
  EXPECT_LE(pyragas_invariance_check(m, kV0), 1e-8 * std::sqrt(2.0));
  EXPECT_EQ(pyragas_invariance_check(m, {cplx(0, 0), cplx(0, 0)}), 0.0);
}

TEST(Pyragas, ConstructiveIsNot) {
  const ValidatedModel m = validate(pyragas_params(2.0, 0.5, 1));
  EXPECT_GT(pyragas_invariance_check(m, kV0), 0.5);
  // on [0, tau]: v' = -g1 (v + v0), v = -v0 + 2 v0 e^{-g1 t}
  const DdeTrace tr = integrate(m, kV0, m.tau, default_dde_dt(m));
  EXPECT_NEAR(tr.v.back()[0].real(), -1.0 + 2.0 * std::exp(-2.0 * tr.t.back()), 1e-9);
  // afterwards the dominant root sets the rate
  const DdeTrace longer = integrate(m, kV0, 60.0 * m.tau, default_dde_dt(m));
  const double dom = char_root_oracle(m).dominant.real();
  EXPECT_LT(dom, 0.0);
  EXPECT_EQ(classify(longer).cls, DdeClass::Decaying);
}
