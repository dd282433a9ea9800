#pragma once

// Principal branch W0 of the Lambert W function on the complex plane.
//
// Halley iteration on w e^w - z from a piecewise starting guess: branch-point
// series near -1/e, log(1+z) in the middle, the two-term asymptotic expansion
// for large |z|. On the cut z < -1/e the value is taken from the upper side
// (Im w > 0), matching the usual counter-clockwise continuity convention.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "dposim/error.hpp"

namespace dposim {

namespace detail {

inline std::complex<double> lambert_w0_guess(std::complex<double> z) {
  using C = std::complex<double>;
  constexpr double e = std::numbers::e;
  const C d = e * z + 1.0;
  if (std::abs(d) < 2.0) {
    C p;
    if (z.imag() == 0.0 && d.real() < 0.0) {
      p = C(0.0, std::sqrt(-2.0 * d.real()));  // upper side of the cut
    } else {
      p = std::sqrt(2.0 * d);
    }
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
  }
  if (std::abs(z) <= 3.0) return std::log(1.0 + z);
  C l1 = std::log(z);
  if (z.imag() == 0.0 && z.real() < 0.0) l1 = C(std::log(-z.real()), std::numbers::pi);
  const C l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace detail

inline std::complex<double> lambert_w0(std::complex<double> z) {
  using C = std::complex<double>;
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    fail(ErrorCode::NonConvergence, "lambert_w0: non-finite argument");
  }
  if (z == C(0.0, 0.0)) return C(0.0, 0.0);

  C w = detail::lambert_w0_guess(z);
  constexpr int kMaxIter = 100;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  bool converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    const C ew = std::exp(w);
    const C f = w * ew - z;
    if (f == C(0.0, 0.0)) {
      converged = true;
      break;
    }
    const C wp1 = w + 1.0;
    if (std::abs(wp1) < 1e-300) {
      converged = true;  // sitting on the branch point
      break;
    }
    const C dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    if (!std::isfinite(dw.real()) || !std::isfinite(dw.imag())) break;
    w -= dw;
    if (std::abs(dw) <= 4.0 * kEps * (1.0 + std::abs(w))) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    // accept if the defining equation is already met
    const double res = std::abs(w * std::exp(w) - z);
    if (!(res <= 1e-12 * std::max(1.0, std::abs(z)))) {
      fail(ErrorCode::NonConvergence, "lambert_w0: Halley iteration did not converge");
    }
  }
  return w;
}

/// W0(z) given only log z; for arguments whose magnitude overflows a double.
/// Solves w + log w = log z by Newton from the asymptotic guess.
inline std::complex<double> lambert_w0_from_log(std::complex<double> log_z) {
  using C = std::complex<double>;
  if (log_z.real() < 30.0) return lambert_w0(std::exp(log_z));
  C w = log_z - std::log(log_z);
  for (int it = 0; it < 60; ++it) {
    const C g = w + std::log(w) - log_z;
    const C dw = g / (1.0 + 1.0 / w);
    w -= dw;
    if (std::abs(dw) <= 1e-15 * std::abs(w)) return w;
  }
  fail(ErrorCode::NonConvergence, "lambert_w0_from_log did not converge");
}

/// True when w lies in the range of the principal branch: |Im w| < pi and
/// Re w > -Im w cot(Im w) (Re w >= -1 on the real axis).
inline bool on_principal_branch(std::complex<double> w) {
  const double y = w.imag();
  if (std::abs(y) >= std::numbers::pi) return false;
  if (y == 0.0) return w.real() >= -1.0 - 1e-8;
  return w.real() > -y / std::tan(y) - 1e-8 * (1.0 + std::abs(w.real()));
}

}  // namespace dposim
