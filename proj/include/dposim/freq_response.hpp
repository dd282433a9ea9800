#pragma once

// Frequency-domain solution of the rotating-frame delayed Langevin system.
//
// omega is always the detuning from the carrier. The loop contributes the
// factor e^{i omega0 tau} e^{-i omega tau}, where the first term comes from the
// exact phase reduction in model.hpp.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "dposim/error.hpp"
#include "dposim/model.hpp"

namespace dposim {

struct FreqResponse {
  double omega = 0.0;
  cplx s_plus;        // s(omega)
  cplx s_minus_conj;  // s*(-omega)
  cplx z_plus;        // Z(omega)
  cplx z_minus_conj;  // Z*(-omega)
  cplx delta;         // det M = Z(omega) Z*(-omega) - |eps|^2
  std::array<cplx, 3> a_minus{};  // coefficient of b^j_in(omega)
  std::array<cplx, 3> a_plus{};   // coefficient of b^j_in^dagger(-omega)
};

/// Output-port relation b^i_out = X_i b^i_in + Y_i c.
struct PortFunctions {
  cplx x1, y1;
  cplx x2{1.0, 0.0};
  cplx y2;

  cplx x(int port) const { return port == 1 ? x1 : x2; }
  cplx y(int port) const { return port == 1 ? y1 : y2; }
};

/// |Delta| below this is treated as an evaluation on the instability
/// threshold.
inline double singular_delta_floor(const ValidatedModel& m) {
  return 1e-12 * std::max(1.0, m.params.gamma2 * m.params.gamma2);
}

/// e^{i omega0 tau} e^{-i omega tau}.
inline cplx loop_delay_factor(double omega, const ValidatedModel& m) {
  return m.phase.unit() * std::polar(1.0, -omega * m.tau);
}

inline cplx eval_s(double omega, const ValidatedModel& m) {
  return 1.0 - loop_delay_factor(omega, m);
}

namespace detail {

// s*(-omega) evaluated without going through -omega.
inline cplx eval_s_minus_conj(double omega, const ValidatedModel& m) {
  return 1.0 - std::conj(m.phase.unit()) * std::polar(1.0, -omega * m.tau);
}

inline void check_delta(const FreqResponse& r, const ValidatedModel& m) {
  if (!(std::abs(r.delta) >= singular_delta_floor(m))) {
    fail(ErrorCode::SingularDelta, "det M vanishes at omega = " + std::to_string(r.omega));
  }
}

inline void fill_coefficients(FreqResponse& r, cplx feedback_minus, cplx feedback_plus, const ValidatedModel& m) {
  const cplx eps = m.params.epsilon();
  const double rg2 = std::sqrt(m.params.gamma2);
  const double rg3 = std::sqrt(m.params.gamma3);
  const cplx inv = 1.0 / r.delta;
  r.a_minus[0] = -feedback_minus * r.z_minus_conj * inv;
  r.a_plus[0] = -feedback_plus * eps * inv;
  r.a_minus[1] = -rg2 * r.z_minus_conj * inv;
  r.a_plus[1] = -rg2 * eps * inv;
  r.a_minus[2] = -rg3 * r.z_minus_conj * inv;
  r.a_plus[2] = -rg3 * eps * inv;
}

}  // namespace detail

/// Closed-form response for the phi = pi, gamma_f = gamma1 loop.
inline FreqResponse eval_response(double omega, const ValidatedModel& m) {
  if (!m.params.default_loop()) {
    fail(ErrorCode::InvalidArgument, "eval_response needs phi = pi and gamma_f = gamma1; use eval_response_general");
  }
  const auto& p = m.params;
  const double loss = m.loss_rate();
  FreqResponse r;
  r.omega = omega;
  r.s_plus = eval_s(omega, m);
  r.s_minus_conj = detail::eval_s_minus_conj(omega, m);
  r.z_plus = cplx(loss, omega) + p.gamma1 * r.s_plus;
  r.z_minus_conj = cplx(loss, omega) + p.gamma1 * r.s_minus_conj;
  r.delta = r.z_plus * r.z_minus_conj - p.eps_abs * p.eps_abs;
  detail::check_delta(r, m);
  const double rg1 = std::sqrt(p.gamma1);
  detail::fill_coefficients(r, rg1 * r.s_plus, rg1 * r.s_minus_conj, m);
  return r;
}

/// Response for an arbitrary loop phase phi and return coupling gamma_f.
///
///   Z(w)   = i w + (g2+g3)/2 + (g1+gf)/2 + sqrt(g1 gf) e^{i phi} e^{i w0 tau} e^{-i w tau}
///   b^1 coupling: -(sqrt(g1) + sqrt(gf) e^{i phi} e^{i w0 tau} e^{-i w tau})
inline FreqResponse eval_response_general(double omega, const ValidatedModel& m) {
  const auto& p = m.params;
  const double gf = p.gamma_f_value();
  const double base = m.loss_rate() + 0.5 * (p.gamma1 + gf);
  const double cross = std::sqrt(p.gamma1 * gf);
  const cplx loop_unit = p.loop_phase() * m.phase.unit();
  const cplx lag = std::polar(1.0, -omega * m.tau);

  FreqResponse r;
  r.omega = omega;
  r.s_plus = eval_s(omega, m);
  r.s_minus_conj = detail::eval_s_minus_conj(omega, m);
  r.z_plus = cplx(base, omega) + cross * loop_unit * lag;
  r.z_minus_conj = cplx(base, omega) + cross * std::conj(loop_unit) * lag;
  r.delta = r.z_plus * r.z_minus_conj - p.eps_abs * p.eps_abs;
  detail::check_delta(r, m);
  const double rg1 = std::sqrt(p.gamma1);
  const double rgf = std::sqrt(gf);
  detail::fill_coefficients(r, rg1 + rgf * loop_unit * lag, rg1 + rgf * std::conj(loop_unit) * lag, m);
  return r;
}

/// Picks the closed-form path whenever the loop is in its default
/// configuration.
inline FreqResponse evaluate_response(double omega, const ValidatedModel& m) {
  return m.params.default_loop() ? eval_response(omega, m) : eval_response_general(omega, m);
}

inline PortFunctions eval_ports(double omega, const ValidatedModel& m) {
  const auto& p = m.params;
  PortFunctions f;
  f.y2 = cplx(std::sqrt(p.gamma2), 0.0);
  if (p.default_loop()) {
    f.x1 = -loop_delay_factor(omega, m);
    f.y1 = std::sqrt(p.gamma1) * eval_s(omega, m);
  } else {
    f.x1 = p.loop_phase() * loop_delay_factor(omega, m);
    f.y1 = std::sqrt(p.gamma1) * f.x1 + std::sqrt(p.gamma_f_value());
  }
  return f;
}

}  // namespace dposim
