#include <gtest/gtest.h>

#include <random>

#include "dposim/presets.hpp"
#include "dposim/stability.hpp"

using namespace dposim;

namespace {

ModelParams scaled_model(double g1, double g2, double g3, double eps, double S, int delta) {
  ModelParams p;
  p.gamma1 = g1;
  p.gamma2 = g2;
  p.gamma3 = g3;
  p.eps_abs = eps;
  p.delay = DelaySpec::scaled(S, delta);
  return p;
}

// Long-delay constructive boundary: a purely imaginary root s = i y / tau of
// s + g1 (1 - a) + g1 e^{-s tau} = 0 exists iff a = 1 + cos(y), y = x sin(y).
double boundary_oracle(double x) {
  double lo = 1e-12, hi = kPi - 1e-12;  // f(y) = y - x sin y, f(lo) < 0 < f(hi) for x > 1
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid - x * std::sin(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return 1.0 + std::cos(0.5 * (lo + hi));
}

cplx char_residual(const ValidatedModel& m, cplx s) {
  const double G = m.derived.G;
  const cplx k = loop_coupling(m);
  const cplx e = std::exp(-s * m.tau);
  return (s + G - k * e) * (s + G - std::conj(k) * e) - m.params.eps_abs * m.params.eps_abs;
}

}  // namespace

TEST(S1W, ConstructiveShortDelayBoundaryIsTwo) {
  for (double x : {0.05, 0.1, 0.3, 0.7, 0.95}) {
    EXPECT_NEAR(boundary_alpha(x, Interference::Constructive, 1.0, 3.0), 2.0, 1e-9);
    EXPECT_LT(s1w_dimensionless(x, 1.99, Interference::Constructive), 0.0);
    EXPECT_GT(s1w_dimensionless(x, 2.01, Interference::Constructive), 0.0);
  }
}

TEST(S1W, ConstructiveLongDelayBoundaryMatchesImaginaryRoot) {
  for (double x : {1.5, 3.0, 10.0, 30.0}) {
    EXPECT_NEAR(boundary_alpha(x, Interference::Constructive, 1e-9, 1.999), boundary_oracle(x), 1e-9) << x;
  }
}

TEST(S1W, DestructiveBoundaryIsZero) {
  for (double x : {0.1, 1.0, 5.0}) {
    EXPECT_NEAR(boundary_alpha(x, Interference::Destructive, -1.0, 1.0), 0.0, 1e-12);
    EXPECT_NEAR(s1w_dimensionless(x, 0.0, Interference::Destructive), 0.0, 1e-14);
  }
}

TEST(S1W, Errors) {
  EXPECT_THROW(s1w_dimensionless(1.0, 0.0, Interference::Generic), Error);
  EXPECT_THROW(s1w_dimensionless(0.0, 0.0, Interference::Constructive), Error);
}

TEST(S1W, HugeArgumentUsesLogForm) {
  // x (a - 1) very negative: W0 argument overflows a double
  const double v = s1w_dimensionless(50.0, -20.0, Interference::Destructive);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(v, 0.0);
}

TEST(CharRoots, LambertRootsSolveCharacteristicEquation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double S = static_cast<double>(static_cast<int>(1 + 999999 * u(rng))) * 1e-6;
    const ValidatedModel m = validate(scaled_model(0.1 + 3 * u(rng), 3 * u(rng), u(rng), 4 * u(rng), S, u(rng) < 0.5 ? 0 : 1));
    const CharRoots r = char_roots_lambert(m);
    for (cplx s : {r.s1, r.s2}) {
      EXPECT_LE(std::abs(char_residual(m, s)), 1e-9 * std::max({1.0, std::norm(s), m.derived.G * m.derived.G}));
    }
    EXPECT_GE(r.s1.real(), r.s2.real() - 1e-12);
  }
}

TEST(CharRoots, DestructiveMeansBetaPlusGamma1) {
  // delta = 0, S even: omega0 tau = 0 mod 2 pi and kappa = +g1
  const ValidatedModel m = validate(scaled_model(1.0, 2.0, 0.0, 0.8, 0.6, 0));
  EXPECT_EQ(m.derived.interference, Interference::Destructive);
  EXPECT_EQ(real_loop_gain(m), 1.0);
  const double dom = char_root_oracle(m).dominant.real();
  EXPECT_NEAR(char_roots_lambert(m).s1.real(), dom, 1e-9);
  const ValidatedModel c = validate(scaled_model(1.0, 2.0, 0.0, 0.8, 0.6, 1));
  EXPECT_EQ(real_loop_gain(c), -1.0);
}

TEST(CharRoots, GenericPhaseAndZeroDelay) {
  ModelParams p = scaled_model(1.0, 1.0, 0.0, 0.2, 0.25, 0);
  p.omega0 = 2.0;
  try {
    char_roots_lambert(validate(p));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GenericPhase);
  }
  ModelParams q = p;
  q.omega0 = kDefaultOmega0;
  q.delay = DelaySpec::raw(0.0);
  try {
    char_roots_lambert(validate(q));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroDelay);
  }
}

TEST(Oracle, MatchesLambertOnRandomRealGain) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double S = static_cast<double>(static_cast<int>(1 + 999999 * u(rng))) * 1e-6;
    const ValidatedModel m = validate(scaled_model(0.1 + 3 * u(rng), 3 * u(rng), u(rng), 0.05 + 4 * u(rng), S, u(rng) < 0.5 ? 0 : 1));
    const RootOracleResult o = char_root_oracle(m);
    EXPECT_NEAR(o.dominant.real(), char_roots_lambert(m).s1.real(), 1e-7 * std::max(1.0, std::abs(o.dominant)));
    for (const cplx& s : o.roots) EXPECT_LE(std::abs(char_residual(m, s)), 1e-8 * std::max({1.0, std::norm(s), 100.0}));
  }
}

TEST(Oracle, GeneralPhaseRootsAreRoots) {
  ModelParams p = scaled_model(1.2, 1.0, 0.3, 0.4, 0.25, 0);
  p.omega0 = 2.0;  // omega0 tau = pi / 2
  const ValidatedModel m = validate(p);
  const RootOracleResult o = char_root_oracle(m);
  ASSERT_FALSE(o.roots.empty());
  for (std::size_t i = 1; i < o.roots.size(); ++i) EXPECT_GE(o.roots[i - 1].real(), o.roots[i].real());
  EXPECT_LE(std::abs(char_residual(m, o.dominant)), 1e-9);
}

TEST(Oracle, NoRootInTinyBox) {
  const ValidatedModel m = validate(scaled_model(1.0, 2.0, 0.0, 0.5, 0.5, 0));
  RootOracleOptions opt;
  opt.re_points = 1;
  opt.im_points = 1;
  opt.re_min = 1e6;
  opt.max_iterations = 0;
  try {
    char_root_oracle(m, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoRootFound);
  }
}

TEST(RouthHurwitz, AgreesWithShortcut) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const double S = static_cast<double>(static_cast<int>(1 + 999999 * u(rng))) * 1e-6;
    const ValidatedModel m = validate(scaled_model(0.1 + 3 * u(rng), 3 * u(rng), u(rng), 3 * u(rng), S, u(rng) < 0.5 ? 0 : 1));
    const RouthHurwitzResult r = routh_hurwitz_delay_independent(m);
    EXPECT_TRUE(r.consistent) << "eps=" << m.params.eps_abs << " L=" << m.loss_rate();
    EXPECT_EQ(r.delay_independent_stable, m.loss_rate() > m.params.eps_abs);
  }
}

TEST(RouthHurwitz, CrossingReportedAboveThreshold) {
  // destructive, |eps| slightly above L: A + K Hurwitz fails
  const RouthHurwitzResult d = routh_hurwitz_delay_independent(validate(scaled_model(1.0, 2.0, 0.0, 1.2, 0.5, 0)));
  EXPECT_FALSE(d.condition1);
  EXPECT_FALSE(d.delay_independent_stable);
  // constructive, L < |eps| < L + 2 g1: tau = 0 stable, some delay destabilises
  const RouthHurwitzResult c = routh_hurwitz_delay_independent(validate(scaled_model(1.0, 2.0, 0.0, 1.5, 0.5, 1)));
  EXPECT_TRUE(c.condition1);
  EXPECT_FALSE(c.condition2);
  ASSERT_TRUE(c.crossing_T.has_value());
  EXPECT_GT(*c.crossing_T, 0.0);
}

TEST(Assess, Fig3IsMarginalAtThreshold) {
  const StabilityVerdict v = assess_stability(validate(preset("fig3").model), false);
  EXPECT_TRUE(v.marginal);
  EXPECT_EQ(v.method, "lambert-w");
  ASSERT_TRUE(v.delay_independent_stable.has_value());
  EXPECT_TRUE(*v.delay_independent_stable);
}

TEST(Assess, PointPStableNotDelayIndependent) {
  for (const char* n : {"fig5-g05", "fig5-g3", "fig5-g9"}) {
    const StabilityVerdict v = assess_stability(validate(preset(n).model), true);
    EXPECT_TRUE(v.stable) << n;
    EXPECT_FALSE(v.marginal);
    EXPECT_FALSE(*v.delay_independent_stable);
    EXPECT_NEAR(v.dominant_root->real(), v.s1w, 1e-8);
  }
}

TEST(Assess, NoFeedbackUsesEigenvalues) {
  ModelParams p;
  p.gamma1 = 0.0;
  p.gamma2 = 2.0;
  p.delay = DelaySpec::raw(1.0);
  p.eps_abs = 0.5;
  StabilityVerdict v = assess_stability(validate(p), false);
  EXPECT_EQ(v.method, "analytic-eigenvalues");
  EXPECT_DOUBLE_EQ(v.s1w, -0.5);
  EXPECT_TRUE(v.stable);
  p.eps_abs = 1.5;
  v = assess_stability(validate(p), false);
  EXPECT_FALSE(v.stable);
}

TEST(Assess, GenericNeedsOracle) {
  ModelParams p = scaled_model(1.0, 2.0, 0.0, 0.4, 0.25, 0);
  p.omega0 = 2.0;
  const ValidatedModel m = validate(p);
  EXPECT_THROW(assess_stability(m, false), Error);
  const StabilityVerdict v = assess_stability(m, true);
  EXPECT_EQ(v.method, "newton-oracle");
  EXPECT_TRUE(v.stable);  // |eps| < L: stable for every phase
}

TEST(Map, SingleCellAndBoundary) {
  MapSpec s;
  s.gamma1_tau_min = s.gamma1_tau_max = 0.5;
  s.gamma1_tau_points = 1;
  s.alpha_min = s.alpha_max = 1.0;
  s.alpha_points = 1;
  const StabilityMap one = stability_map(s, Interference::Constructive);
  ASSERT_EQ(one.s1w.size(), 1u);
  EXPECT_LT(one.s1w[0], 0.0);
  EXPECT_TRUE(one.boundary.empty());

  MapSpec d;
  d.gamma1_tau_points = 5;
  d.alpha_points = 51;
  const StabilityMap c = stability_map(d, Interference::Constructive);
  EXPECT_EQ(c.s1w.size(), 5u * 51u);
  EXPECT_EQ(c.boundary.size(), 5u);
  for (const BoundaryPoint& b : c.boundary) {
    if (b.gamma1_tau < 1.0) EXPECT_NEAR(b.alpha_tilde, 2.0, 1e-3);
    else EXPECT_NEAR(b.alpha_tilde, boundary_oracle(b.gamma1_tau), 2e-2);
  }
  const StabilityMap z = stability_map(d, Interference::Destructive);
  for (const BoundaryPoint& b : z.boundary) EXPECT_NEAR(b.alpha_tilde, 0.0, 1e-3);
}

TEST(Map, Errors) {
  MapSpec s;
  s.alpha_points = 0;
  EXPECT_THROW(stability_map(s, Interference::Constructive), Error);
  MapSpec t;
  t.gamma1_tau_min = 0.0;
  EXPECT_THROW(stability_map(t, Interference::Constructive), Error);
  EXPECT_THROW(stability_map(MapSpec{}, Interference::Generic), Error);
}
