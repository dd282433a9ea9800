#pragma once

// Mean-field time-domain integrator for v' = A v(t) + K v(t - tau),
// v = (<c>, <c^+>). Method of steps with classical RK4; delayed values come
// from cubic Hermite interpolation of the stored (v, v') samples.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "dposim/error.hpp"
#include "dposim/model.hpp"
#include "dposim/stability.hpp"

namespace dposim {

using State = std::array<cplx, 2>;

enum class DdeClass { Decaying, Growing, Marginal };

inline std::string to_string(DdeClass c) {
  switch (c) {
    case DdeClass::Decaying: return "decaying";
    case DdeClass::Growing: return "growing";
    case DdeClass::Marginal: return "marginal";
  }
  return "?";
}

struct DdeTrace {
  std::vector<double> t;
  std::vector<State> v;
  std::vector<double> norm;
  double tau = 0.0;
  double dt = 0.0;
  double G = 0.0;
  bool overflow = false;  // stopped early at |v| > 1e12
};

struct DdeClassification {
  DdeClass cls = DdeClass::Decaying;
  double rate = 0.0;  // fitted d log|v| / dt
};

inline constexpr double kOverflowNorm = 1e12;

inline double state_norm(const State& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

namespace detail {

struct DdeRhs {
  double G;
  cplx eps;
  cplx kappa;

  State operator()(const State& v, const State& d) const {
    return {-G * v[0] + eps * v[1] + kappa * d[0], std::conj(eps) * v[0] - G * v[1] + std::conj(kappa) * d[1]};
  }
};

inline State axpy(const State& a, cplx s, const State& b) { return {a[0] + s * b[0], a[1] + s * b[1]}; }

}  // namespace detail

/// Largest rate entering the step-size bound.
inline double dde_rate_scale(const ValidatedModel& m) {
  return std::max({m.derived.G, m.params.eps_abs, m.params.gamma1, std::abs(loop_coupling(m))});
}

inline double default_dde_dt(const ValidatedModel& m) {
  double dt = 1.0 / (50.0 * std::max(dde_rate_scale(m), 1e-12));
  if (m.tau > 0.0) {
    dt = std::min(dt, m.tau / 50.0);
    // land on the history grid exactly
    dt = m.tau / std::ceil(m.tau / dt);
  }
  return dt;
}

inline double default_dde_t_end(const ValidatedModel& m) {
  const double G = std::max(m.derived.G, 1e-6);
  return std::max(20.0 * m.tau, 20.0 / G);
}

/// Integrates from the constant history v(t) = v0 on [-tau, 0].
inline DdeTrace integrate(const ValidatedModel& m, const State& v0, double t_end, double dt) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) fail(ErrorCode::InvalidArgument, "t_end must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::InvalidArgument, "dt must be > 0");
  const double rate = dde_rate_scale(m);
  if (rate > 0.0 && dt > 1.0 / (50.0 * rate) * (1.0 + 1e-12)) {
    fail(ErrorCode::StepTooLarge, "dt exceeds 1/(50 max rate)");
  }
  if (m.tau > 0.0 && dt > m.tau / 50.0 * (1.0 + 1e-12)) fail(ErrorCode::StepTooLarge, "dt exceeds tau/50");

  const double tau = m.tau;
  const detail::DdeRhs rhs{m.derived.G, m.params.epsilon(), (m.params.gamma1 == 0.0) ? cplx{} : loop_coupling(m)};
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));

  DdeTrace tr;
  tr.tau = tau;
  tr.dt = dt;
  tr.G = m.derived.G;
  tr.t.reserve(steps + 1);
  tr.v.reserve(steps + 1);
  tr.norm.reserve(steps + 1);
  std::vector<State> deriv;
  deriv.reserve(steps + 1);

  // delayed value at time s (s <= current time); history constant before 0
  auto delayed = [&](double s) -> State {
    if (s <= 0.0) return v0;
    const double pos = s / dt;
    auto k = static_cast<std::size_t>(std::floor(pos));
    if (k >= tr.v.size() - 1) k = tr.v.size() - 2;
    const double h = dt;
    const double u = (s - tr.t[k]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    State out;
    for (int c = 0; c < 2; ++c) {
      out[c] = h00 * tr.v[k][c] + h10 * h * deriv[k][c] + h01 * tr.v[k + 1][c] + h11 * h * deriv[k + 1][c];
    }
    return out;
  };
  auto delayed_or_now = [&](double s, const State& now) -> State { return tau == 0.0 ? now : delayed(s); };

  tr.t.push_back(0.0);
  tr.v.push_back(v0);
  tr.norm.push_back(state_norm(v0));
  deriv.push_back(rhs(v0, delayed_or_now(-tau, v0)));

  State v = v0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    // With dt <= tau all delayed arguments lie at or before t, inside stored data.
    const State k1 = rhs(v, delayed_or_now(t - tau, v));
    const State v2 = detail::axpy(v, 0.5 * dt, k1);
    const State k2 = rhs(v2, delayed_or_now(t + 0.5 * dt - tau, v2));
    const State v3 = detail::axpy(v, 0.5 * dt, k2);
    const State k3 = rhs(v3, delayed_or_now(t + 0.5 * dt - tau, v3));
    const State v4 = detail::axpy(v, dt, k3);
    const State k4 = rhs(v4, delayed_or_now(t + dt - tau, v4));
    for (int c = 0; c < 2; ++c) v[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);

    const double tn = static_cast<double>(n + 1) * dt;
    const double nv = state_norm(v);
    if (!std::isfinite(nv) || nv > kOverflowNorm) {
      tr.overflow = true;
      break;
    }
    tr.t.push_back(tn);
    tr.v.push_back(v);
    tr.norm.push_back(nv);
    deriv.push_back(rhs(v, delayed_or_now(tn - tau, v)));
  }
  return tr;
}

inline DdeTrace integrate(const ValidatedModel& m, const State& v0) {
  return integrate(m, v0, default_dde_t_end(m), default_dde_dt(m));
}

/// Least-squares slope of log|v| over the final half of the trace.
inline DdeClassification classify(const DdeTrace& tr) {
  DdeClassification out;
  if (tr.overflow) {
    out.cls = DdeClass::Growing;
    out.rate = std::numeric_limits<double>::infinity();
    if (tr.t.size() >= 4) {
      const std::size_t n = tr.t.size();
      const std::size_t a = n / 2;
      out.rate = (std::log(tr.norm[n - 1]) - std::log(std::max(tr.norm[a], 1e-300))) / (tr.t[n - 1] - tr.t[a]);
    }
    return out;
  }
  bool any = false;
  for (double x : tr.norm) any = any || x > 0.0;
  if (!any) fail(ErrorCode::DegenerateTrace, "trace norm is identically zero");
  const std::size_t n = tr.t.size();
  if (n < 4) fail(ErrorCode::DegenerateTrace, "trace too short to fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    if (!(tr.norm[i] > 0.0)) continue;
    const double x = tr.t[i];
    const double y = std::log(tr.norm[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) {
    // decayed below the smallest double; clearly decaying
    out.cls = DdeClass::Decaying;
    out.rate = -std::numeric_limits<double>::infinity();
    return out;
  }
  const double c = static_cast<double>(cnt);
  out.rate = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  const double tol = 1e-3 * std::max(tr.G, 1e-12);
  if (std::abs(out.rate) < tol) {
    out.cls = DdeClass::Marginal;
  } else {
    out.cls = out.rate < 0.0 ? DdeClass::Decaying : DdeClass::Growing;
  }
  return out;
}

/// max |v(t) - v0| over [0, 10 tau].
inline double pyragas_invariance_check(const ValidatedModel& m, const State& v0) {
  if (!(m.tau > 0.0)) fail(ErrorCode::ZeroDelay, "Pyragas check needs tau > 0");
  const DdeTrace tr = integrate(m, v0, 10.0 * m.tau, default_dde_dt(m));
  double drift = 0.0;
  for (const State& v : tr.v) drift = std::max(drift, state_norm({v[0] - v0[0], v[1] - v0[1]}));
  if (tr.overflow) drift = std::numeric_limits<double>::infinity();
  return drift;
}

/// Pyragas configuration: phi = pi, gf = g1, g2 = g3 = 0, eps = 0.
inline ModelParams pyragas_params(double gamma1, double scale_S, int delta) {
  ModelParams p;
  p.gamma1 = gamma1;
  p.gamma2 = 0.0;
  p.gamma3 = 0.0;
  p.gamma_f = gamma1;
  p.phi = kPi;
  p.eps_abs = 0.0;
  p.delay = DelaySpec::scaled(scale_S, delta);
  return p;
}

}  // namespace dposim
