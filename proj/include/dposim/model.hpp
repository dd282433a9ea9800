#pragma once

// Scenario parameters for the pumped degenerate parametric oscillator with a
// delayed coherent feedback loop, plus the exact bookkeeping of the carrier
// phase accumulated around the loop.
//
// Units: rates in ns^-1, times in ns. All frequencies used by the solvers are
// detunings from the carrier omega0 (rotating frame).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

#include "dposim/error.hpp"

namespace dposim {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDefaultOmega0 = 1e6;  // 1 fs^-1 in ns^-1

// Scaled delays are stored in units of 1e-6 (the "micro" grid): S = s_micro / 1e6.
inline constexpr std::int64_t kMicro = 1'000'000;

struct RawDelay {
  double tau = 0.0;
  bool operator==(const RawDelay&) const = default;
};

/// tau = (S + 1e-6 * delta) * pi ns with S = s_micro / 1e6.
struct ScaledDelay {
  std::int64_t s_micro = 0;
  int delta = 0;
  bool operator==(const ScaledDelay&) const = default;
};

class DelaySpec {
 public:
  DelaySpec() = default;

  static DelaySpec raw(double tau) { return DelaySpec(RawDelay{tau}); }

  static DelaySpec scaled_micro(std::int64_t s_micro, int delta) {
    if (s_micro < 0) fail(ErrorCode::MalformedDelaySpec, "scaling parameter S must be >= 0");
    if (delta != 0 && delta != 1) fail(ErrorCode::MalformedDelaySpec, "delta must be 0 or 1");
    return DelaySpec(ScaledDelay{s_micro, delta});
  }

  /// Accepts S only if S * 1e6 is an integer (to within representation error).
  static DelaySpec scaled(double s, int delta) {
    if (!std::isfinite(s) || s < 0.0) fail(ErrorCode::MalformedDelaySpec, "scaling parameter S must be finite and >= 0");
    const double micro = s * static_cast<double>(kMicro);
    const double rounded = std::nearbyint(micro);
    if (std::abs(micro - rounded) > 1e-6 * std::max(1.0, std::abs(micro)) || rounded > 9.0e15) {
      fail(ErrorCode::MalformedDelaySpec, "S * 1e6 must be an integer");
    }
    return scaled_micro(static_cast<std::int64_t>(rounded), delta);
  }

  bool is_scaled() const { return std::holds_alternative<ScaledDelay>(value_); }
  const ScaledDelay& scaled_part() const { return std::get<ScaledDelay>(value_); }
  const RawDelay& raw_part() const { return std::get<RawDelay>(value_); }

  /// Delay in ns.
  double tau() const {
    if (is_scaled()) {
      const auto& sc = scaled_part();
      return static_cast<double>(sc.s_micro + sc.delta) / static_cast<double>(kMicro) * kPi;
    }
    return raw_part().tau;
  }

  /// The same delay with the tuning bit replaced (scaled form only).
  DelaySpec with_delta(int delta) const { return scaled_micro(scaled_part().s_micro, delta); }

  bool operator==(const DelaySpec&) const = default;

 private:
  explicit DelaySpec(std::variant<RawDelay, ScaledDelay> v) : value_(v) {}
  std::variant<RawDelay, ScaledDelay> value_{RawDelay{}};
};

/// omega0 * tau reduced modulo 2 pi.
///
/// For scaled delays the reduction is exact: the phase is pi * numerator / 1e6
/// with an integer numerator in [0, 2e6). Raw delays go through fmod and lose
/// roughly log10(omega0 * tau) digits; they are never classified as exactly
/// constructive or destructive unless omega0 * tau == 0.
struct OmegaTauPhase {
  bool exact = false;
  std::int64_t numerator = 0;
  double radians = 0.0;

  /// e^{i omega0 tau}; exact at multiples of pi / 2.
  cplx unit() const {
    if (exact && numerator % (kMicro / 2) == 0) {
      switch (numerator / (kMicro / 2)) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
      }
    }
    return std::polar(1.0, radians);
  }
};

inline OmegaTauPhase phase_of_omega0_tau(const DelaySpec& delay, double omega0) {
  OmegaTauPhase out;
  if (delay.is_scaled()) {
    const double w = std::nearbyint(omega0);
    if (w != omega0 || w <= 0.0 || w > 9.0e15) {
      fail(ErrorCode::MalformedDelaySpec, "scaled delays need an integral omega0 (ns^-1)");
    }
    const auto& sc = delay.scaled_part();
    constexpr std::int64_t period = 2 * kMicro;
    const std::int64_t w_mod = static_cast<std::int64_t>(w) % period;
    const std::int64_t k_mod = (sc.s_micro + sc.delta) % period;
    out.exact = true;
    out.numerator = (w_mod * k_mod) % period;
    out.radians = kPi * static_cast<double>(out.numerator) / static_cast<double>(kMicro);
    return out;
  }
  const double total = omega0 * delay.tau();
  double r = std::fmod(total, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  out.exact = (total == 0.0);
  out.numerator = 0;
  out.radians = out.exact ? 0.0 : r;
  return out;
}

enum class Interference { Constructive, Destructive, Generic };
enum class DelayRegime { ShortDelay, LongDelay, Boundary };

inline std::string to_string(Interference c) {
  switch (c) {
    case Interference::Constructive: return "constructive";
    case Interference::Destructive: return "destructive";
    default: return "generic";
  }
}

inline std::string to_string(DelayRegime r) {
  switch (r) {
    case DelayRegime::ShortDelay: return "short";
    case DelayRegime::LongDelay: return "long";
    default: return "boundary";
  }
}

inline Interference classify_phase(const OmegaTauPhase& phase) {
  if (!phase.exact) return Interference::Generic;
  if (phase.numerator == 0) return Interference::Destructive;
  if (phase.numerator == kMicro) return Interference::Constructive;
  return Interference::Generic;
}

enum class ThetaMode { Paper, Fixed, Optimal };

/// Quadrature phase selection. Paper: 2 theta = beta + pi.
struct ThetaSpec {
  ThetaMode mode = ThetaMode::Paper;
  double value = 0.0;  // used by Fixed only
  bool operator==(const ThetaSpec&) const = default;
};

struct ModelParams {
  double omega0 = kDefaultOmega0;
  double eps_abs = 0.0;
  double eps_phase = 0.0;  // beta
  double gamma1 = 0.0;     // feedback-port coupling
  double gamma2 = 0.0;     // mirror M2 loss
  double gamma3 = 0.0;     // feedback-imperfection loss
  std::optional<double> gamma_f;  // return coupling; unset means gamma1
  std::optional<double> phi;      // loop phase shift; unset means pi
  DelaySpec delay;
  ThetaSpec theta;

  bool operator==(const ModelParams&) const = default;

  double gamma_f_value() const { return gamma_f.value_or(gamma1); }
  double phi_value() const { return phi.value_or(kPi); }

  /// phi = pi and gamma_f = gamma1: the configuration the closed-form default
  /// path assumes.
  bool default_loop() const { return phi_value() == kPi && gamma_f_value() == gamma1; }

  cplx epsilon() const { return std::polar(eps_abs, eps_phase); }

  /// e^{i phi}, exact for phi in {0, pi}.
  cplx loop_phase() const {
    const double p = phi_value();
    if (p == kPi) return {-1.0, 0.0};
    if (p == 0.0) return {1.0, 0.0};
    return std::polar(1.0, p);
  }
};

struct DerivedParams {
  double G = 0.0;
  std::optional<double> alpha_tilde;
  double gamma1_tau = 0.0;
  Interference interference = Interference::Generic;
  DelayRegime regime = DelayRegime::ShortDelay;

  bool operator==(const DerivedParams&) const = default;
};

struct ValidatedModel {
  ModelParams params;
  DerivedParams derived;
  double tau = 0.0;
  OmegaTauPhase phase;

  double loss_rate() const { return 0.5 * (params.gamma2 + params.gamma3); }
};

inline DerivedParams derive(const ModelParams& p, double tau, const OmegaTauPhase& phase) {
  DerivedParams d;
  if (p.gamma_f) {
    d.G = (p.gamma1 + *p.gamma_f + p.gamma2 + p.gamma3) / 2.0;
  } else {
    d.G = (2.0 * p.gamma1 + p.gamma2 + p.gamma3) / 2.0;
  }
  if (p.gamma1 > 0.0) d.alpha_tilde = (p.eps_abs - (p.gamma2 + p.gamma3) / 2.0) / p.gamma1;
  d.gamma1_tau = p.gamma1 * tau;
  d.interference = classify_phase(phase);
  if (d.gamma1_tau < 1.0) {
    d.regime = DelayRegime::ShortDelay;
  } else if (d.gamma1_tau > 1.0) {
    d.regime = DelayRegime::LongDelay;
  } else {
    d.regime = DelayRegime::Boundary;
  }
  return d;
}

inline ValidatedModel validate(const ModelParams& p) {
  auto check_rate = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::NegativeRate, std::string(name) + " must be finite and >= 0");
  };
  check_rate(p.gamma1, "gamma1");
  check_rate(p.gamma2, "gamma2");
  check_rate(p.gamma3, "gamma3");
  check_rate(p.eps_abs, "epsilon_abs");
  if (p.gamma_f) check_rate(*p.gamma_f, "gamma_f");
  if (!std::isfinite(p.omega0) || p.omega0 <= 0.0) fail(ErrorCode::ZeroOmega0, "omega0 must be > 0");
  if (!std::isfinite(p.eps_phase)) fail(ErrorCode::InvalidArgument, "beta must be finite");
  if (p.phi && !std::isfinite(*p.phi)) fail(ErrorCode::InvalidArgument, "phi must be finite");
  if (p.theta.mode == ThetaMode::Fixed && !std::isfinite(p.theta.value)) {
    fail(ErrorCode::InvalidArgument, "theta must be finite");
  }
  if (p.delay.is_scaled()) {
    if (p.gamma1 == 0.0) {
      fail(ErrorCode::Gamma1ZeroWithScaledDelay, "gamma1 = 0 leaves alpha_tilde undefined; use a raw tau");
    }
  } else {
    const double tau = p.delay.raw_part().tau;
    if (!std::isfinite(tau) || tau < 0.0) fail(ErrorCode::MalformedDelaySpec, "tau must be finite and >= 0");
  }

  ValidatedModel m;
  m.params = p;
  m.tau = p.delay.tau();
  m.phase = phase_of_omega0_tau(p.delay, p.omega0);
  m.derived = derive(p, m.tau, m.phase);
  return m;
}

/// Quadrature angle implied by a theta spec (Optimal has no single angle and
/// falls back to the paper convention).
inline double resolve_theta(const ThetaSpec& t, double beta) {
  if (t.mode == ThetaMode::Fixed) return t.value;
  return 0.5 * (beta + kPi);
}

}  // namespace dposim
