#pragma once

// Asymptotic stability of the delayed first-moment system
//
//   v'(t) = A v(t) + K v(t - tau),  A = [[-G, eps], [eps*, -G]],
//   K = diag(kappa, kappa*),  kappa = -sqrt(g1 gf) e^{i phi} e^{i w0 tau}
//
// (kappa = g1 e^{i w0 tau} for the default phi = pi, gf = g1 loop).
//
// Three routes:
//  * closed form via W0 when kappa is real (w0 tau = 0 or pi mod 2 pi);
//  * delay-independent test (Hurwitz matrix + auxiliary equation scan);
//  * Newton iteration on det[s - A - K e^{-s tau}] from a seed grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "dposim/error.hpp"
#include "dposim/lambert_w.hpp"
#include "dposim/model.hpp"
#include "dposim/parallel.hpp"
#include "dposim/scenario.hpp"

namespace dposim {

/// |tau Re s1| below this counts as marginal.
inline constexpr double kMarginalTolerance = 1e-4;

/// Delayed-coupling coefficient kappa (see file comment).
inline cplx loop_coupling(const ValidatedModel& m) {
  const auto& p = m.params;
  if (p.default_loop()) return p.gamma1 * m.phase.unit();
  return -std::sqrt(p.gamma1 * p.gamma_f_value()) * p.loop_phase() * m.phase.unit();
}

/// The real delayed gain beta when kappa is real; GenericPhase otherwise.
inline double real_loop_gain(const ValidatedModel& m) {
  if (m.derived.interference == Interference::Generic) {
    fail(ErrorCode::GenericPhase, "closed-form stability needs omega0*tau = 0 or pi (mod 2 pi); use the root oracle");
  }
  const cplx k = loop_coupling(m);
  if (k.imag() != 0.0) fail(ErrorCode::GenericPhase, "loop phase phi leaves the delayed gain complex; use the root oracle");
  return k.real();
}

struct CharRoots {
  cplx s1;  // from alpha1 = |eps| - G
  cplx s2;  // from alpha2 = -|eps| - G
};

namespace detail {

// s = W0(tau beta e^{-tau alpha}) / tau + alpha, with the log form when the
// argument would overflow.
inline cplx lambert_root(double alpha, double beta, double tau) {
  const double expo = -tau * alpha;
  const double mag = tau * std::abs(beta);
  if (mag == 0.0) return {alpha, 0.0};
  cplx w;
  if (expo + std::log(mag) > 600.0) {
    const cplx log_z(std::log(mag) + expo, beta < 0.0 ? kPi : 0.0);
    w = lambert_w0_from_log(log_z);
  } else {
    w = lambert_w0(cplx(tau * beta * std::exp(expo), 0.0));
  }
  return w / tau + alpha;
}

}  // namespace detail

/// Both characteristic roots on the principal branch. beta = +g1 for
/// destructive (w0 tau = 2 n pi), -g1 for constructive.
inline CharRoots char_roots_lambert(const ValidatedModel& m) {
  const double beta = real_loop_gain(m);
  if (!(m.tau > 0.0)) fail(ErrorCode::ZeroDelay, "closed-form roots need tau > 0");
  const double G = m.derived.G;
  const double eps = m.params.eps_abs;
  return {detail::lambert_root(eps - G, beta, m.tau), detail::lambert_root(-eps - G, beta, m.tau)};
}

/// tau * Re s1 in terms of x = g1 tau and alpha_tilde:
///   Re W0(+-x e^{-x (a - 1)}) + x (a - 1)
/// ('+' destructive, '-' constructive). Same sign and zero set as S1_W.
inline double s1w_dimensionless(double gamma1_tau, double alpha_tilde, Interference interference) {
  if (interference == Interference::Generic) fail(ErrorCode::GenericPhase, "S1_W is defined for constructive/destructive only");
  if (!(gamma1_tau > 0.0)) fail(ErrorCode::InvalidArgument, "gamma1_tau must be > 0");
  const double sign = interference == Interference::Destructive ? 1.0 : -1.0;
  const double u = gamma1_tau * (alpha_tilde - 1.0);
  // u as alpha * tau with beta * tau = sign * x
  return detail::lambert_root(u, sign * gamma1_tau, 1.0).real();
}

// ---------------------------------------------------------------------------
// Delay-independent criterion

inline std::vector<double> default_t_grid() {
  std::vector<double> t;
  t.reserve(2002);
  t.push_back(0.0);
  for (int k = 0; k <= 2000; ++k) t.push_back(std::pow(10.0, -3.0 + 6.0 * k / 2000.0));
  return t;
}

struct RouthHurwitzResult {
  bool delay_independent_stable = false;  // (g2+g3)/2 > |eps|
  bool condition1 = false;                // A + K Hurwitz
  std::array<double, 2> eigenvalues{};    // of A + K (real for real K)
  bool condition2 = false;                // no imaginary-axis roots on the T grid
  std::optional<double> crossing_T;       // first T where condition 2 failed
  bool procedure_stable = false;          // condition1 && condition2
  bool consistent = false;                // procedure agrees with the shortcut
  std::size_t t_points = 0;
};

namespace detail {

// Auxiliary factor  s + a - beta ((1 - T s)/(1 + T s))^2 = 0  at s = i y.
// Multiplying by (1 + i T y)^2 and splitting:
//   Pr(y) = (a - beta) - ((a - beta) T^2 + 2 T) y^2
//   Pi(y) = y (1 + 2 T (a + beta) - T^2 y^2)
// A common real root is y = 0 iff a = beta; otherwise y^2 = Y(T) from Pr and
// h(T) = 1 + 2 T (a + beta) - T^2 Y(T) must vanish.
inline std::optional<double> aux_imaginary_crossing(double a, double beta, const std::vector<double>& t_grid) {
  if (a == beta) return 0.0;
  const double d = a - beta;
  bool have_prev = false;
  double prev_h = 0.0;
  for (double T : t_grid) {
    if (!(T > 0.0)) continue;
    const double denom = d * T * T + 2.0 * T;
    const double y2 = d / denom;
    if (!(y2 > 0.0) || !std::isfinite(y2)) {
      have_prev = false;
      continue;
    }
    const double h = 1.0 + 2.0 * T * (a + beta) - T * T * y2;
    if (h == 0.0) return T;
    if (have_prev && ((h > 0.0) != (prev_h > 0.0))) return T;
    prev_h = h;
    have_prev = true;
  }
  return std::nullopt;
}

}  // namespace detail

inline RouthHurwitzResult routh_hurwitz_delay_independent(const ValidatedModel& m,
                                                          const std::vector<double>& t_grid = default_t_grid()) {
  const double beta = real_loop_gain(m);
  const double G = m.derived.G;
  const double eps = m.params.eps_abs;
  RouthHurwitzResult r;
  r.t_points = t_grid.size();
  r.eigenvalues = {-G + eps + beta, -G - eps + beta};
  r.condition1 = r.eigenvalues[0] < 0.0 && r.eigenvalues[1] < 0.0;
  r.condition2 = true;
  for (double a : {G - eps, G + eps}) {
    if (auto t = detail::aux_imaginary_crossing(a, beta, t_grid)) {
      r.condition2 = false;
      if (!r.crossing_T || *t < *r.crossing_T) r.crossing_T = t;
    }
  }
  r.procedure_stable = r.condition1 && r.condition2;
  r.delay_independent_stable = m.loss_rate() > eps;
  r.consistent = r.procedure_stable == r.delay_independent_stable;
  return r;
}

// ---------------------------------------------------------------------------
// Newton root oracle

struct RootOracleOptions {
  int re_points = 15;
  int im_points = 15;
  std::optional<double> re_min;
  std::optional<double> re_max;
  std::optional<double> im_half_width;
  double tolerance = 1e-10;
  int max_iterations = 200;
};

struct RootOracleResult {
  cplx dominant;
  std::vector<cplx> roots;  // deduplicated, sorted by decreasing real part
};

/// det[s - A - K e^{-s tau}] and its derivative.
struct CharacteristicFunction {
  double G = 0.0;
  double eps2 = 0.0;
  cplx kappa;
  double tau = 0.0;

  explicit CharacteristicFunction(const ValidatedModel& m)
      : G(m.derived.G), eps2(m.params.eps_abs * m.params.eps_abs), kappa(loop_coupling(m)), tau(m.tau) {}

  cplx value(cplx s) const {
    const cplx e = std::exp(-s * tau);
    return (s + G - kappa * e) * (s + G - std::conj(kappa) * e) - eps2;
  }

  cplx derivative(cplx s) const {
    const cplx e = std::exp(-s * tau);
    const cplx a = s + G - kappa * e;
    const cplx b = s + G - std::conj(kappa) * e;
    const cplx da = 1.0 + tau * kappa * e;
    const cplx db = 1.0 + tau * std::conj(kappa) * e;
    return da * b + a * db;
  }
};

/// Newton from a seed grid. Default box: Re in [-5 r, 2 r], Im in
/// [-max(3 pi / tau, 2 r), +...] with r = max(G, |eps| + |kappa|), which
/// contains every root with Re s >= -r.
inline RootOracleResult char_root_oracle(const ValidatedModel& m, const RootOracleOptions& opt = {}) {
  const CharacteristicFunction f(m);
  const double r = std::max({m.derived.G, m.params.eps_abs + std::abs(f.kappa), 1e-3});
  const double re_lo = opt.re_min.value_or(-5.0 * r);
  const double re_hi = opt.re_max.value_or(2.0 * r);
  double im_hw = 2.0 * r;
  if (m.tau > 0.0) im_hw = std::max(im_hw, 3.0 * kPi / m.tau);
  if (opt.im_half_width) im_hw = *opt.im_half_width;

  std::vector<cplx> found;
  const int nre = std::max(1, opt.re_points);
  const int nim = std::max(1, opt.im_points);
  for (int i = 0; i < nre; ++i) {
    for (int j = 0; j < nim; ++j) {
      const double re = nre == 1 ? re_lo : re_lo + (re_hi - re_lo) * i / (nre - 1);
      const double im = nim == 1 ? 0.0 : -im_hw + 2.0 * im_hw * j / (nim - 1);
      cplx s(re, im);
      bool ok = false;
      for (int it = 0; it < opt.max_iterations; ++it) {
        const cplx fv = f.value(s);
        const cplx d = f.derivative(s);
        if (d == cplx(0.0, 0.0)) break;
        const cplx step = fv / d;
        s -= step;
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()) || std::abs(s) > 1e8 * (1.0 + r)) break;
        const double scale = std::max({1.0, std::norm(s), r * r});
        if (std::abs(step) <= 1e-13 * (1.0 + std::abs(s)) && std::abs(f.value(s)) <= opt.tolerance * scale) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        const double scale = std::max({1.0, std::norm(s), r * r});
        ok = std::isfinite(s.real()) && std::isfinite(s.imag()) && std::abs(f.value(s)) <= opt.tolerance * scale;
      }
      if (ok) found.push_back(s);
    }
  }
  if (found.empty()) fail(ErrorCode::NoRootFound, "no Newton seed converged; widen the seed box");

  std::sort(found.begin(), found.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  RootOracleResult out;
  for (const cplx& s : found) {
    bool dup = false;
    for (const cplx& t : out.roots) {
      if (std::abs(s - t) <= 1e-6 * std::max(1.0, std::abs(s))) {
        dup = true;
        break;
      }
    }
    if (!dup) out.roots.push_back(s);
  }
  std::sort(out.roots.begin(), out.roots.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  out.dominant = out.roots.front();
  return out;
}

// ---------------------------------------------------------------------------
// Verdict and maps

struct StabilityVerdict {
  double s1w = 0.0;  // Re s1, ns^-1
  double s2w = 0.0;  // Re s2, ns^-1
  bool stable = false;
  bool marginal = false;
  Interference interference = Interference::Generic;
  std::optional<bool> delay_independent_stable;
  std::optional<RouthHurwitzResult> routh_hurwitz;
  std::optional<cplx> dominant_root;
  std::string method;
};

/// Eigenvalues of the 2x2 matrix A + K (tau = 0 or no feedback).
inline std::array<cplx, 2> undelayed_eigenvalues(const ValidatedModel& m) {
  const cplx k = (m.params.gamma1 == 0.0) ? cplx(0.0, 0.0) : loop_coupling(m);
  const double G = m.derived.G;
  const cplx a11 = -G + k;
  const cplx a22 = -G + std::conj(k);
  const double e2 = m.params.eps_abs * m.params.eps_abs;
  const cplx tr = a11 + a22;
  const cplx det = a11 * a22 - e2;
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  cplx l1 = 0.5 * (tr + disc);
  cplx l2 = 0.5 * (tr - disc);
  if (l2.real() > l1.real()) std::swap(l1, l2);
  return {l1, l2};
}

inline StabilityVerdict assess_stability(const ValidatedModel& m, bool with_oracle) {
  StabilityVerdict v;
  v.interference = m.derived.interference;
  const bool no_delay_term = m.params.gamma1 == 0.0 || m.tau == 0.0;
  if (no_delay_term) {
    const auto ev = undelayed_eigenvalues(m);
    v.s1w = ev[0].real();
    v.s2w = ev[1].real();
    v.method = "analytic-eigenvalues";
    v.marginal = std::abs(v.s1w) <= kMarginalTolerance * std::max(1.0, m.derived.G);
  } else if (v.interference != Interference::Generic && loop_coupling(m).imag() == 0.0) {
    const CharRoots roots = char_roots_lambert(m);
    v.s1w = roots.s1.real();
    v.s2w = roots.s2.real();
    v.method = "lambert-w";
    v.marginal = std::abs(m.tau * v.s1w) <= kMarginalTolerance;
    const RouthHurwitzResult rh = routh_hurwitz_delay_independent(m);
    v.delay_independent_stable = rh.delay_independent_stable;
    v.routh_hurwitz = rh;
  } else if (!with_oracle) {
    fail(ErrorCode::GenericPhase, "omega0*tau is neither 0 nor pi (mod 2 pi); rerun with --with-oracle");
  }
  if (with_oracle || v.method.empty()) {
    const RootOracleResult o = char_root_oracle(m);
    v.dominant_root = o.dominant;
    if (v.method.empty()) {
      v.s1w = o.dominant.real();
      v.s2w = o.roots.size() > 1 ? o.roots[1].real() : o.dominant.real();
      v.method = "newton-oracle";
      v.marginal = std::abs(m.tau * v.s1w) <= kMarginalTolerance;
    }
  }
  v.stable = v.s1w < 0.0;
  return v;
}

struct BoundaryPoint {
  double gamma1_tau = 0.0;
  double alpha_tilde = 0.0;
};

struct StabilityMap {
  std::vector<double> gamma1_tau;
  std::vector<double> alpha_tilde;
  std::vector<double> s1w;  // dimensionless tau*S1_W, index [ix * alpha.size() + ia]
  std::vector<BoundaryPoint> boundary;
  Interference interference = Interference::Constructive;

  double at(std::size_t ix, std::size_t ia) const { return s1w[ix * alpha_tilde.size() + ia]; }
};

inline std::vector<double> map_axis(double lo, double hi, std::int64_t n) {
  if (n < 1) fail(ErrorCode::EmptyGrid, "map axis needs at least one point");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    g[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return g;
}

/// Zero crossings of S1_W along alpha for each gamma1_tau column, located by
/// linear interpolation between sign changes.
inline std::vector<BoundaryPoint> extract_boundary(const StabilityMap& map) {
  std::vector<BoundaryPoint> out;
  const std::size_t na = map.alpha_tilde.size();
  for (std::size_t ix = 0; ix < map.gamma1_tau.size(); ++ix) {
    for (std::size_t ia = 0; ia + 1 < na; ++ia) {
      const double f0 = map.at(ix, ia);
      const double f1 = map.at(ix, ia + 1);
      const double a0 = map.alpha_tilde[ia];
      const double a1 = map.alpha_tilde[ia + 1];
      if (f0 == 0.0) {
        out.push_back({map.gamma1_tau[ix], a0});
      } else if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
        out.push_back({map.gamma1_tau[ix], a0 + (a1 - a0) * f0 / (f0 - f1)});
      }
    }
    if (na > 0 && map.at(ix, na - 1) == 0.0 && na > 1) out.push_back({map.gamma1_tau[ix], map.alpha_tilde[na - 1]});
  }
  return out;
}

inline StabilityMap stability_map(const MapSpec& spec, Interference interference) {
  if (interference == Interference::Generic) fail(ErrorCode::GenericPhase, "stability maps exist for constructive/destructive only");
  StabilityMap map;
  map.interference = interference;
  map.gamma1_tau = map_axis(spec.gamma1_tau_min, spec.gamma1_tau_max, spec.gamma1_tau_points);
  map.alpha_tilde = map_axis(spec.alpha_min, spec.alpha_max, spec.alpha_points);
  for (double x : map.gamma1_tau) {
    if (!(x > 0.0)) fail(ErrorCode::InvalidArgument, "gamma1_tau axis must be > 0");
  }
  const std::size_t na = map.alpha_tilde.size();
  map.s1w.resize(map.gamma1_tau.size() * na);
  parallel_for(map.s1w.size(), [&](std::size_t k) {
    map.s1w[k] = s1w_dimensionless(map.gamma1_tau[k / na], map.alpha_tilde[k % na], interference);
  });
  map.boundary = extract_boundary(map);
  return map;
}

/// Lowest alpha_tilde where S1_W changes sign at fixed gamma1_tau, by
/// bisection inside [lo, hi] (which must bracket a sign change).
inline double boundary_alpha(double gamma1_tau, Interference interference, double lo, double hi) {
  double flo = s1w_dimensionless(gamma1_tau, lo, interference);
  const double fhi = s1w_dimensionless(gamma1_tau, hi, interference);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) fail(ErrorCode::InvalidArgument, "boundary_alpha: interval does not bracket a sign change");
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = s1w_dimensionless(gamma1_tau, mid, interference);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dposim
