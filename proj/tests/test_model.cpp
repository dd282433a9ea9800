#include <gtest/gtest.h>

#include "dposim/model.hpp"

using namespace dposim;

namespace {

ModelParams base() {
  ModelParams p;
  p.gamma1 = 2.0;
  p.gamma2 = 2.0;
  p.eps_abs = 0.5;
  p.delay = DelaySpec::scaled(0.5, 0);
  return p;
}

ErrorCode code_of(const ModelParams& p) {
  try {
    validate(p);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(DelaySpec, ScaledTauIsSPlusDeltaMicroTimesPi) {
  EXPECT_DOUBLE_EQ(DelaySpec::scaled(0.5, 0).tau(), 0.5 * kPi);
  EXPECT_DOUBLE_EQ(DelaySpec::scaled(0.1, 1).tau(), 0.100001 * kPi);
  EXPECT_EQ(DelaySpec::scaled(0.1, 1).scaled_part().s_micro, 100000);
}

TEST(DelaySpec, RejectsMalformed) {
  EXPECT_THROW(DelaySpec::scaled(-0.1, 0), Error);
  EXPECT_THROW(DelaySpec::scaled(0.5, 2), Error);
  EXPECT_THROW(DelaySpec::scaled(0.1234567, 0), Error);
  try {
    DelaySpec::scaled(0.5, 3);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedDelaySpec);
  }
}

TEST(Phase, EvenMicroWithDeltaZeroIsDestructive) {
  const auto ph = phase_of_omega0_tau(DelaySpec::scaled(0.5, 0), kDefaultOmega0);
  EXPECT_TRUE(ph.exact);
  EXPECT_EQ(ph.numerator, 0);
  EXPECT_EQ(classify_phase(ph), Interference::Destructive);
  EXPECT_EQ(ph.unit(), cplx(1.0, 0.0));
}

TEST(Phase, DeltaOneFlipsToConstructive) {
  const auto ph = phase_of_omega0_tau(DelaySpec::scaled(0.5, 1), kDefaultOmega0);
  EXPECT_EQ(ph.numerator, kMicro);
  EXPECT_EQ(classify_phase(ph), Interference::Constructive);
  EXPECT_EQ(ph.unit(), cplx(-1.0, 0.0));
}

TEST(Phase, OddMicroWithDeltaZeroIsConstructive) {
  // S * 1e6 odd: omega0 tau = odd multiple of pi
  EXPECT_EQ(classify_phase(phase_of_omega0_tau(DelaySpec::scaled(0.000001, 0), kDefaultOmega0)),
            Interference::Constructive);
}

TEST(Phase, QuarterPeriodIsGeneric) {
  const auto ph = phase_of_omega0_tau(DelaySpec::scaled(0.25, 0), 2.0);
  EXPECT_TRUE(ph.exact);
  EXPECT_EQ(ph.numerator, 500000);
  EXPECT_EQ(classify_phase(ph), Interference::Generic);
  EXPECT_EQ(ph.unit(), cplx(0.0, 1.0));
}

TEST(Phase, NonIntegralOmega0WithScaledDelayRejected) {
  EXPECT_THROW(phase_of_omega0_tau(DelaySpec::scaled(0.5, 0), 1.5), Error);
}

TEST(Phase, RawDelayIsGenericUnlessZero) {
  EXPECT_EQ(classify_phase(phase_of_omega0_tau(DelaySpec::raw(1.0), kDefaultOmega0)), Interference::Generic);
  EXPECT_EQ(classify_phase(phase_of_omega0_tau(DelaySpec::raw(0.0), kDefaultOmega0)), Interference::Destructive);
}

TEST(Validate, DerivedQuantities) {
  const ValidatedModel m = validate(base());
  EXPECT_DOUBLE_EQ(m.derived.G, 3.0);
  ASSERT_TRUE(m.derived.alpha_tilde.has_value());
  EXPECT_DOUBLE_EQ(*m.derived.alpha_tilde, -0.25);
  EXPECT_DOUBLE_EQ(m.derived.gamma1_tau, kPi);
  EXPECT_EQ(m.derived.regime, DelayRegime::LongDelay);
  EXPECT_EQ(m.derived.interference, Interference::Destructive);
}

TEST(Validate, GeneralLoopG) {
  ModelParams p = base();
  p.gamma_f = 1.0;
  EXPECT_DOUBLE_EQ(validate(p).derived.G, (2.0 + 1.0 + 2.0) / 2.0);
}

TEST(Validate, Regimes) {
  ModelParams p = base();
  p.gamma1 = 0.5;
  p.delay = DelaySpec::raw(1.0);
  EXPECT_EQ(validate(p).derived.regime, DelayRegime::ShortDelay);
  p.delay = DelaySpec::raw(2.0);
  EXPECT_EQ(validate(p).derived.regime, DelayRegime::Boundary);
}

TEST(Validate, Errors) {
  ModelParams p = base();
  p.gamma2 = -1.0;
  EXPECT_EQ(code_of(p), ErrorCode::NegativeRate);
  p = base();
  p.omega0 = 0.0;
  EXPECT_EQ(code_of(p), ErrorCode::ZeroOmega0);
  p = base();
  p.gamma1 = 0.0;
  EXPECT_EQ(code_of(p), ErrorCode::Gamma1ZeroWithScaledDelay);
  p = base();
  p.delay = DelaySpec::raw(-1.0);
  EXPECT_EQ(code_of(p), ErrorCode::MalformedDelaySpec);
}

TEST(Validate, Gamma1ZeroWithRawDelayHasNoAlpha) {
  ModelParams p = base();
  p.gamma1 = 0.0;
  p.delay = DelaySpec::raw(1.0);
  const ValidatedModel m = validate(p);
  EXPECT_FALSE(m.derived.alpha_tilde.has_value());
  EXPECT_DOUBLE_EQ(m.derived.G, 1.0);
}

TEST(Theta, PaperConvention) {
  EXPECT_DOUBLE_EQ(resolve_theta({ThetaMode::Paper, 0.0}, 0.3), 0.5 * (0.3 + kPi));
  EXPECT_DOUBLE_EQ(resolve_theta({ThetaMode::Fixed, 0.7}, 0.3), 0.7);
}

TEST(Loop, PhaseExactAtPi) {
  ModelParams p = base();
  EXPECT_EQ(p.loop_phase(), cplx(-1.0, 0.0));
  EXPECT_TRUE(p.default_loop());
  p.phi = 0.0;
  EXPECT_EQ(p.loop_phase(), cplx(1.0, 0.0));
  EXPECT_FALSE(p.default_loop());
}
