#pragma once

// Cross-oracle self-checks behind `dposim verify`. The hooks (coefficient
// function, beta mapping) exist so tests can inject faults and watch the
// corresponding check fail.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dposim/dde.hpp"
#include "dposim/lambert_w.hpp"
#include "dposim/model.hpp"
#include "dposim/presets.hpp"
#include "dposim/spectrum.hpp"
#include "dposim/stability.hpp"
#include "dposim/textbook.hpp"

namespace dposim::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;  // worst value seen
  double limit = 0.0;
  std::string detail;
};

using CoeffFn = std::function<ScatteringCoeffs(int port, double omega, const ValidatedModel&)>;
using BetaMapFn = std::function<double(Interference, double gamma1)>;

inline ScatteringCoeffs default_coeffs(int port, double omega, const ValidatedModel& m) {
  return scattering_coeffs(port, omega, m);
}

/// beta = +g1 for destructive, -g1 for constructive.
inline double default_beta_map(Interference c, double gamma1) {
  return c == Interference::Destructive ? gamma1 : -gamma1;
}

inline constexpr std::uint64_t kSeed = 20160301;

/// Random model with |eps| < (g2 + g3)/2, hence stable for every delay.
/// About a third of the draws use a general loop (gamma_f, phi free).
inline ModelParams random_stable_params(std::mt19937_64& rng, double max_pump_fraction = 0.9) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelParams p;
  p.gamma1 = 0.1 + 4.9 * u(rng);
  p.gamma2 = 0.1 + 4.9 * u(rng);
  p.gamma3 = 2.0 * u(rng);
  p.eps_abs = max_pump_fraction * u(rng) * 0.5 * (p.gamma2 + p.gamma3);
  p.eps_phase = 2.0 * kPi * u(rng);
  const auto s_micro = static_cast<std::int64_t>(10'000 + u(rng) * 1'990'000);
  p.delay = DelaySpec::scaled_micro(s_micro, u(rng) < 0.5 ? 0 : 1);
  if (u(rng) < 1.0 / 3.0) {
    p.gamma_f = 0.1 + 4.9 * u(rng);
    p.phi = 2.0 * kPi * u(rng);
  }
  return p;
}

// ---------------------------------------------------------------------------

inline CheckResult check_bogoliubov(int draws = 10'000, const CoeffFn& coeffs = default_coeffs) {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> w(-20.0, 20.0);
  double worst = 0.0;
  for (int k = 0; k < draws; ++k) {
    const ValidatedModel m = validate(random_stable_params(rng));
    const double omega = w(rng);
    for (int port = 1; port <= 2; ++port) worst = std::max(worst, std::abs(bogoliubov_residual(coeffs(port, omega, m))));
  }
  return {"bogoliubov identity", worst <= 1e-9, worst, 1e-9, std::to_string(draws) + " draws x 2 outputs"};
}

inline CheckResult check_no_pump_floor() {
  std::mt19937_64 rng(kSeed + 1);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    ModelParams p = random_stable_params(rng);
    p.eps_abs = 0.0;
    const ValidatedModel m = validate(p);
    for (double omega : linspace(-15.0, 15.0, 61)) {
      for (double theta : linspace(0.0, kPi, 9)) {
        for (int port = 1; port <= 2; ++port) worst = std::max(worst, std::abs(squeezing_spectrum(port, omega, theta, m) - 1.0));
      }
    }
  }
  return {"no-pump noise floor", worst <= 1e-12, worst, 1e-12, "50 models x 61 omega x 9 theta"};
}

inline CheckResult check_markovian_reduction() {
  double worst = 0.0;
  for (int delta : {0, 1}) {
    RunManifest r = preset("fig3");
    r.model.delay = r.model.delay.with_delta(delta);
    const ValidatedModel m = validate(markovian_reference(r.model));
    const double kappa = m.params.gamma1 + m.params.gamma2 + m.params.gamma3;
    const double theta_sq = 0.5 * (m.params.eps_phase + kPi);
    for (double d : {0.0, 0.4, kPi / 2}) {
      for (double omega : default_grid(m)) {
        for (int port = 1; port <= 2; ++port) {
          const double g_out = port == 1 ? m.params.gamma1 : m.params.gamma2;
          const double ref = textbook::markovian_dpo_at(omega, m.params.eps_abs, kappa, g_out, d);
          worst = std::max(worst, std::abs(squeezing_spectrum(port, omega, theta_sq + d, m) - ref));
        }
      }
    }
  }
  return {"markovian reduction", worst <= 1e-9, worst, 1e-9, "fig3 grid, both delta, 3 quadratures"};
}

/// Sample points for the W0 residual check: a log-polar cloud plus the real
/// ray below the branch point.
inline std::vector<cplx> lambert_sample_points(int n = 10'000) {
  std::mt19937_64 rng(kSeed + 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> z;
  z.reserve(static_cast<std::size_t>(n));
  const int ray = n / 5;
  for (int k = 0; k < ray; ++k) z.emplace_back(-std::exp(-1.0) - std::pow(10.0, -8.0 + 14.0 * u(rng)), 0.0);
  while (static_cast<int>(z.size()) < n) z.push_back(std::polar(std::pow(10.0, -6.0 + 12.0 * u(rng)), -kPi + 2.0 * kPi * u(rng)));
  return z;
}

inline double lambert_residual(cplx z, cplx w) { return std::abs(w * std::exp(w) - z) / std::max(1.0, std::abs(z)); }

inline CheckResult check_lambert() {
  double worst = 0.0;
  bool branch_ok = true;
  for (const cplx& z : lambert_sample_points()) {
    const cplx w = lambert_w0(z);
    worst = std::max(worst, lambert_residual(z, w));
    branch_ok = branch_ok && on_principal_branch(w);
  }
  const double bp = std::abs(lambert_w0(cplx(-std::exp(-1.0), 0.0)) + 1.0);
  const bool pass = worst <= 1e-12 && bp <= 1e-6 && branch_ok;
  return {"lambert W0 residuals", pass, worst, 1e-12, "|W0(-1/e) + 1| = " + format_number(bp, 3)};
}

// ---------------------------------------------------------------------------
// Stability

struct SignGridOptions {
  int nx = 20;
  int na = 20;
  bool with_dde = true;
};

/// Cell (x, alpha) of the sign grid: g1 = 1, g2 = 3, g3 = 0, tau ~ x.
inline ModelParams sign_grid_params(double x, double alpha_tilde, Interference c) {
  ModelParams p;
  p.gamma1 = 1.0;
  p.gamma2 = 3.0;
  p.gamma3 = 0.0;
  p.eps_abs = alpha_tilde + 1.5;
  auto s_micro = static_cast<std::int64_t>(std::llround(x / kPi * 1e6));
  if (s_micro % 2 != 0) s_micro -= 1;
  p.delay = DelaySpec::scaled_micro(std::max<std::int64_t>(s_micro, 2), c == Interference::Constructive ? 1 : 0);
  return p;
}

inline CheckResult check_sign_agreement(Interference c, const SignGridOptions& opt = {},
                                        const BetaMapFn& beta_map = default_beta_map) {
  const auto xs = map_axis(0.05, 5.0, opt.nx);
  const auto as = map_axis(-1.0, 4.0, opt.na);
  std::vector<int> verdict(xs.size() * as.size(), 0);  // 1 agree, 0 excluded, -1 disagree
  parallel_for(verdict.size(), [&](std::size_t k) {
    const double a = as[k % as.size()];
    const ValidatedModel m = validate(sign_grid_params(xs[k / as.size()], a, c));
    const double x = m.derived.gamma1_tau;
    const double ab = c == Interference::Destructive ? 0.0
                      : x <= 1.0                     ? 2.0
                                                     : boundary_alpha(x, c, 1e-9, 2.0);
    if (std::abs(*m.derived.alpha_tilde - ab) < 1e-3) return;
    const double beta = beta_map(c, m.params.gamma1);
    const double s1w = detail::lambert_root(m.params.eps_abs - m.derived.G, beta, m.tau).real();
    const double dom = char_root_oracle(m).dominant.real();
    bool agree = (s1w < 0.0) == (dom < 0.0);
    if (opt.with_dde) {
      const DdeClassification d = classify(integrate(m, {cplx(1.0, 0.0), cplx(1.0, 0.0)}));
      agree = agree && d.cls != DdeClass::Marginal && ((d.cls == DdeClass::Decaying) == (s1w < 0.0));
    }
    verdict[k] = agree ? 1 : -1;
  });
  const auto bad = std::count(verdict.begin(), verdict.end(), -1);
  const auto used = std::count(verdict.begin(), verdict.end(), 1) + bad;
  return {"sign agreement (" + to_string(c) + ")", bad == 0 && used > 0, static_cast<double>(bad), 0.0,
          std::to_string(used) + " cells, " + std::to_string(bad) + " disagree"};
}

inline CheckResult check_constructive_boundary() {
  double worst = 0.0;
  for (double x : {0.1, 0.3, 0.7}) worst = std::max(worst, std::abs(boundary_alpha(x, Interference::Constructive, 1.0, 3.0) - 2.0));
  std::vector<double> b;
  for (double x : {3.0, 10.0, 30.0}) b.push_back(boundary_alpha(x, Interference::Constructive, 1e-9, 1.99));
  const bool decreasing = b[0] > b[1] && b[1] > b[2] && b[2] > 0.0;
  return {"constructive boundary", worst <= 1e-3 && decreasing, worst, 1e-3,
          "long-delay boundary " + format_number(b[0], 4) + ", " + format_number(b[1], 4) + ", " + format_number(b[2], 4)};
}

inline CheckResult check_destructive_boundary() {
  int bad = 0;
  double margin = 1e300;
  for (double x : {0.3, 1.0, 3.0}) {
    for (double a : linspace(-2.0, 2.0, 20)) {
      const double v = s1w_dimensionless(x, a, Interference::Destructive);
      if (std::abs(a) < 1e-3) continue;
      margin = std::min(margin, std::abs(v));
      if ((v < 0.0) != (a < 0.0)) ++bad;
    }
  }
  return {"destructive boundary", bad == 0, static_cast<double>(bad), 0.0, "min |tau S1W| " + format_number(margin, 3)};
}

inline CheckResult check_delay_independent(int scenarios = 50) {
  std::mt19937_64 rng(kSeed + 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ModelParams> base;
  for (int k = 0; k < scenarios; ++k) {
    ModelParams p;
    p.gamma1 = 0.1 + 4.9 * u(rng);
    p.gamma2 = 0.1 + 4.9 * u(rng);
    p.gamma3 = 2.0 * u(rng);
    p.eps_abs = 0.999 * u(rng) * 0.5 * (p.gamma2 + p.gamma3);
    base.push_back(p);
  }
  const auto s_values = linspace(-2.0, 0.0, 9);  // log10 S
  std::vector<int> ok(base.size(), 1);
  parallel_for(base.size(), [&](std::size_t k) {
    for (double ls : s_values) {
      for (int delta : {0, 1}) {
        ModelParams p = base[k];
        auto s_micro = static_cast<std::int64_t>(std::llround(std::pow(10.0, ls) * 1e6));
        if (s_micro % 2 != 0) s_micro -= 1;
        p.delay = DelaySpec::scaled_micro(s_micro, delta);
        const ValidatedModel m = validate(p);
        const RouthHurwitzResult rh = routh_hurwitz_delay_independent(m);
        const bool oracle_stable = char_root_oracle(m).dominant.real() < 0.0;
        if (!(rh.procedure_stable && rh.delay_independent_stable && oracle_stable)) ok[k] = 0;
      }
    }
  });
  const auto bad = std::count(ok.begin(), ok.end(), 0);
  return {"delay-independent criterion", bad == 0, static_cast<double>(bad), 0.0,
          std::to_string(scenarios) + " scenarios x 9 delays x 2 phases"};
}

inline CheckResult check_pyragas() {
  const State v0{cplx(1.0, 0.0), cplx(1.0, 0.0)};
  const double drift = pyragas_invariance_check(validate(pyragas_params(2.0, 0.5, 0)), v0);
  const double lim = 1e-8 * state_norm(v0);
  return {"pyragas non-invasiveness", drift <= lim, drift, lim, "g1 = 2, S = 0.5, delta = 0"};
}

/// Fitted DDE rate vs. dominant root for stable scenarios whose dominant root
/// is separated from the next one by >= 10% in real part.
inline CheckResult check_dde_rate(int wanted = 10) {
  std::mt19937_64 rng(kSeed + 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int used = 0;
  for (int tries = 0; tries < 500 && used < wanted; ++tries) {
    ModelParams p;
    p.gamma1 = 0.2 + 2.8 * u(rng);
    p.gamma2 = 0.2 + 2.8 * u(rng);
    p.eps_abs = 0.9 * u(rng) * 0.5 * p.gamma2;
    auto s_micro = static_cast<std::int64_t>(std::llround((0.05 + 0.95 * u(rng)) * 1e6));
    if (s_micro % 2 != 0) s_micro -= 1;
    p.delay = DelaySpec::scaled_micro(s_micro, u(rng) < 0.5 ? 0 : 1);
    const ValidatedModel m = validate(p);
    const RootOracleResult o = char_root_oracle(m);
    const double r0 = o.dominant.real();
    double r1 = -1e300;
    for (const cplx& s : o.roots) {
      if (s.real() < r0 - 1e-9 * std::max(1.0, std::abs(r0))) {
        r1 = s.real();
        break;
      }
    }
    if (!(r1 <= 1.1 * r0)) continue;
    const double t_end = std::max(20.0 * m.tau, 25.0 / std::abs(r0));
    const DdeClassification c = classify(integrate(m, {cplx(1.0, 0.0), cplx(1.0, 0.0)}, t_end, default_dde_dt(m)));
    worst = std::max(worst, std::abs(c.rate - r0) / std::abs(r0));
    ++used;
  }
  return {"dde rate vs dominant root", used == wanted && worst <= 0.02, worst, 0.02,
          std::to_string(used) + " separated scenarios"};
}

// ---------------------------------------------------------------------------
// Figures

inline CheckResult check_fig3() {
  const RunManifest r = preset("fig3");
  const ValidatedModel m = validate(r.model);
  const double p2 = squeezing_spectrum(2, 0.0, resolve_theta(r.model.theta, r.model.eps_phase), m);
  return {"fig3 P2(0) at threshold", p2 <= 1e-4, p2, 1e-4, "delta = 0"};
}

inline CheckResult check_fig4() {
  const RunManifest r = preset("fig4");
  const ValidatedModel m = validate(r.model);
  const double d = std::abs(squeezing_spectrum(1, 0.0, resolve_theta(r.model.theta, r.model.eps_phase), m) - 1.0);
  return {"fig4 P1(0) = 1", d <= 1e-9, d, 1e-9, "delta = 0"};
}

/// Squeezing depth 1 - P_i(0) for the three point-P presets.
inline std::array<std::array<double, 2>, 3> fig5_depths() {
  std::array<std::array<double, 2>, 3> out{};
  const char* names[] = {"fig5-g05", "fig5-g3", "fig5-g9"};
  for (int k = 0; k < 3; ++k) {
    const RunManifest r = preset(names[k]);
    const ValidatedModel m = validate(r.model);
    const double th = resolve_theta(r.model.theta, r.model.eps_phase);
    for (int port = 1; port <= 2; ++port) out[k][port - 1] = 1.0 - squeezing_spectrum(port, 0.0, th, m);
  }
  return out;
}

inline CheckResult check_fig5() {
  const auto d = fig5_depths();
  const bool p1_down = d[0][0] > d[1][0] && d[1][0] > d[2][0];
  const bool p2_up = d[0][1] < d[1][1] && d[1][1] < d[2][1];
  return {"fig5 trend", p1_down && p2_up, 0.0, 0.0,
          "depth P1 " + format_number(d[0][0], 4) + " > " + format_number(d[1][0], 4) + " > " + format_number(d[2][0], 4) +
              "; P2 " + format_number(d[0][1], 4) + " < " + format_number(d[1][1], 4) + " < " + format_number(d[2][1], 4)};
}

/// Derived quantities of the checked-in presets against fixed expectations.
inline CheckResult check_presets() {
  int bad = 0;
  auto near = [&](double a, double b, double tol) {
    if (!(std::abs(a - b) <= tol)) ++bad;
  };
  for (const char* n : {"fig3", "fig4"}) {
    const ValidatedModel m = validate(preset(n).model);
    near(m.derived.G, 3.0, 0.0);
    near(m.params.eps_abs, 1.0 - 1e-6, 1e-15);
    near(*m.derived.alpha_tilde, -5e-7, 1e-15);
    if (m.derived.interference != Interference::Destructive) ++bad;
    if (m.derived.regime != DelayRegime::LongDelay) ++bad;
  }
  const double g2s[] = {0.5, 3.0, 9.0};
  const char* names[] = {"fig5-g05", "fig5-g3", "fig5-g9"};
  for (int k = 0; k < 3; ++k) {
    const ValidatedModel m = validate(preset(names[k]).model);
    near(m.params.eps_abs - 0.5 * m.params.gamma2, 5.0, 1e-12);
    near(m.params.gamma2, g2s[k], 0.0);
    near(*m.derived.alpha_tilde, 5.0 / 2.75, 1e-12);
    near(m.derived.gamma1_tau, 2.75 * 0.100001 * kPi, 1e-12);
    if (m.derived.interference != Interference::Constructive) ++bad;
    if (m.derived.regime != DelayRegime::ShortDelay) ++bad;
    if (!assess_stability(m, false).stable) ++bad;
  }
  if (preset("fig2a-map").map.interference != Interference::Constructive) ++bad;
  if (preset("fig2b-map").map.interference != Interference::Destructive) ++bad;
  return {"preset derived quantities", bad == 0, static_cast<double>(bad), 0.0, "7 presets"};
}

inline std::vector<CheckResult> run_all() {
  return {check_bogoliubov(),
          check_no_pump_floor(),
          check_markovian_reduction(),
          check_lambert(),
          check_constructive_boundary(),
          check_destructive_boundary(),
          check_sign_agreement(Interference::Constructive),
          check_sign_agreement(Interference::Destructive),
          check_delay_independent(),
          check_pyragas(),
          check_dde_rate(),
          check_fig3(),
          check_fig4(),
          check_fig5(),
          check_presets()};
}

}  // namespace dposim::verify
