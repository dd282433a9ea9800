#pragma once

// Below-threshold degenerate parametric oscillator in a cavity with three
// Markovian ports (rates g1, g2, g3, total kappa = g1 + g2 + g3), written in
// the standard closed form. Used as the no-feedback reference.

#include <cmath>

namespace dposim::textbook {

/// Squeezed and anti-squeezed quadrature spectra at an output of rate g_out.
struct QuadratureSpectra {
  double squeezed = 1.0;
  double anti_squeezed = 1.0;
};

inline QuadratureSpectra markovian_dpo(double omega, double eps_abs, double kappa, double g_out) {
  const double h = 0.5 * kappa;
  const double w2 = omega * omega;
  QuadratureSpectra q;
  q.squeezed = 1.0 - 2.0 * g_out * eps_abs / ((h + eps_abs) * (h + eps_abs) + w2);
  q.anti_squeezed = 1.0 + 2.0 * g_out * eps_abs / ((h - eps_abs) * (h - eps_abs) + w2);
  return q;
}

/// Spectrum at quadrature angle offset d from the squeezed one.
inline double markovian_dpo_at(double omega, double eps_abs, double kappa, double g_out, double d) {
  const QuadratureSpectra q = markovian_dpo(omega, eps_abs, kappa, g_out);
  const double c = std::cos(d), s = std::sin(d);
  return q.squeezed * c * c + q.anti_squeezed * s * s;
}

}  // namespace dposim::textbook
