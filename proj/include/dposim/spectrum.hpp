#pragma once

// Output-field scattering coefficients, second-moment correlations and the
// squeezing spectrum at the two detectable outputs (1: waveguide / feedback
// port, 2: mirror M2).

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dposim/error.hpp"
#include "dposim/freq_response.hpp"
#include "dposim/model.hpp"
#include "dposim/parallel.hpp"
#include "dposim/scenario.hpp"

namespace dposim {

/// S^-_{ij}, S^+_{ij} at a single detuning for output i.
struct ScatteringCoeffs {
  std::array<cplx, 3> minus{};
  std::array<cplx, 3> plus{};
};

struct ScatteringRow {
  int port = 1;
  double omega = 0.0;
  std::array<cplx, 3> s_minus{};
  std::array<cplx, 3> s_plus{};
  double n = 0.0;  // N_i(omega)
  cplx m;          // M_i(omega)
  double bogoliubov_residual = 0.0;  // sum_j |S^-|^2 - |S^+|^2 - 1
};

inline void check_port(int port) {
  if (port != 1 && port != 2) fail(ErrorCode::InvalidArgument, "output port must be 1 or 2");
}

/// S^-_{ij} = Y_i A^-_j + X_i delta_ij,  S^+_{ij} = Y_i A^+_j.
inline ScatteringCoeffs scattering_coeffs(int port, const FreqResponse& r, const PortFunctions& f) {
  ScatteringCoeffs c;
  const cplx y = f.y(port);
  for (std::size_t j = 0; j < 3; ++j) {
    c.minus[j] = y * r.a_minus[j];
    c.plus[j] = y * r.a_plus[j];
  }
  c.minus[static_cast<std::size_t>(port - 1)] += f.x(port);
  return c;
}

inline ScatteringCoeffs scattering_coeffs(int port, double omega, const ValidatedModel& m) {
  check_port(port);
  return scattering_coeffs(port, evaluate_response(omega, m), eval_ports(omega, m));
}

inline double bogoliubov_residual(const ScatteringCoeffs& c) {
  double sum = 0.0;
  for (std::size_t j = 0; j < 3; ++j) sum += std::norm(c.minus[j]) - std::norm(c.plus[j]);
  return sum - 1.0;
}

namespace detail {

inline double noise_sum(const ScatteringCoeffs& c) {
  double n = 0.0;
  for (const auto& s : c.minus) n += std::norm(s);
  return n;
}

inline cplx anomalous_sum(const ScatteringCoeffs& at_omega, const ScatteringCoeffs& at_minus_omega) {
  cplx m{};
  for (std::size_t j = 0; j < 3; ++j) m += at_omega.minus[j] * at_minus_omega.plus[j];
  return m;
}

}  // namespace detail

/// Full row at omega; needs the response at -omega as well for M_i.
inline ScatteringRow scattering_row(int port, double omega, const ValidatedModel& m) {
  check_port(port);
  const ScatteringCoeffs here = scattering_coeffs(port, omega, m);
  const ScatteringCoeffs mirror = scattering_coeffs(port, -omega, m);
  ScatteringRow row;
  row.port = port;
  row.omega = omega;
  row.s_minus = here.minus;
  row.s_plus = here.plus;
  row.n = detail::noise_sum(here);
  row.m = detail::anomalous_sum(here, mirror);
  row.bogoliubov_residual = bogoliubov_residual(here);
  return row;
}

/// Second moments entering the squeezing spectrum at one detuning.
struct OutputMoments {
  double n_plus = 0.0;   // N_i(omega)
  double n_minus = 0.0;  // N_i(-omega)
  cplx m;                // M_i(omega)
};

inline OutputMoments output_moments(int port, double omega, const ValidatedModel& m) {
  check_port(port);
  const ScatteringCoeffs here = scattering_coeffs(port, omega, m);
  const ScatteringCoeffs mirror = scattering_coeffs(port, -omega, m);
  return {detail::noise_sum(here), detail::noise_sum(mirror), detail::anomalous_sum(here, mirror)};
}

/// P_i(omega, theta) = 2 Re[e^{-2 i theta} M_i(omega)] + N_i(omega) + N_i(-omega) - 1.
inline double spectrum_from_moments(const OutputMoments& mo, double theta) {
  return 2.0 * std::real(std::polar(1.0, -2.0 * theta) * mo.m) + mo.n_plus + mo.n_minus - 1.0;
}

/// P_i as sum_j |e^{-i theta} S^-_ij(omega) + e^{i theta} S^+_ij(-omega)^*|^2.
/// Equal to the moment form by the Bogoliubov identity at -omega, but free of
/// the N ~ 1/Delta^2 cancellation near threshold.
inline double quadrature_spectrum(const ScatteringCoeffs& here, const ScatteringCoeffs& mirror, double theta) {
  const cplx a = std::polar(1.0, -theta);
  double p = 0.0;
  for (std::size_t j = 0; j < 3; ++j) p += std::norm(a * here.minus[j] + std::conj(a * mirror.plus[j]));
  return p;
}

inline double squeezing_spectrum(int port, double omega, double theta, const ValidatedModel& m) {
  check_port(port);
  return quadrature_spectrum(scattering_coeffs(port, omega, m), scattering_coeffs(port, -omega, m), theta);
}

struct OptimalTheta {
  double theta = 0.0;  // in [0, pi)
  double p_min = 0.0;
};

/// Minimum over theta: attained at 2 theta = arg M + pi. theta = 0 when M = 0.
inline OptimalTheta optimal_theta_from_moments(const OutputMoments& mo) {
  OptimalTheta out;
  const double mag = std::abs(mo.m);
  out.p_min = mo.n_plus + mo.n_minus - 1.0 - 2.0 * mag;
  if (mag == 0.0) return out;
  double th = 0.5 * (std::arg(mo.m) + kPi);
  th = std::fmod(th, kPi);
  if (th < 0.0) th += kPi;
  out.theta = th;
  return out;
}

inline OptimalTheta optimal_theta(int port, double omega, const ValidatedModel& m) {
  check_port(port);
  const ScatteringCoeffs here = scattering_coeffs(port, omega, m);
  const ScatteringCoeffs mirror = scattering_coeffs(port, -omega, m);
  OptimalTheta out = optimal_theta_from_moments(
      {detail::noise_sum(here), detail::noise_sum(mirror), detail::anomalous_sum(here, mirror)});
  out.p_min = quadrature_spectrum(here, mirror, out.theta);
  return out;
}

enum class RowStatus { Ok, Singular };

struct SpectrumRow {
  double omega = 0.0;
  RowStatus status = RowStatus::Ok;
  std::array<double, 2> p{};
  std::array<double, 2> n{};
  std::array<cplx, 2> m{};
  std::array<double, 2> theta{};  // quadrature angle used per output
};

struct SpectrumTable {
  std::string fingerprint;
  ThetaSpec theta;
  std::vector<SpectrumRow> rows;

  std::size_t singular_count() const {
    std::size_t k = 0;
    for (const auto& r : rows) k += (r.status == RowStatus::Singular) ? 1 : 0;
    return k;
  }
};

/// n points from lo to hi inclusive; symmetric grids hit 0 exactly at the
/// centre.
inline std::vector<double> linspace(double lo, double hi, std::int64_t n) {
  if (n < 1) fail(ErrorCode::EmptyGrid, "grid needs at least one point");
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double denom = static_cast<double>(n - 1);
  if (lo == -hi) {
    for (std::int64_t k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = hi * static_cast<double>(2 * k - (n - 1)) / denom;
  } else {
    for (std::int64_t k = 0; k < n; ++k) {
      g[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) / denom;
    }
  }
  return g;
}

inline constexpr std::int64_t kDefaultGridPoints = 2001;

/// 6 max(G, pi/tau); covers the side peaks spaced by O(pi/tau).
inline double default_half_width(const ValidatedModel& m) {
  double w = m.derived.G;
  if (m.tau > 0.0) w = std::max(w, kPi / m.tau);
  if (w <= 0.0) w = std::max(1.0, m.params.eps_abs);
  return 6.0 * w;
}

inline std::vector<double> default_grid(const ValidatedModel& m) {
  const double hw = default_half_width(m);
  return linspace(-hw, hw, kDefaultGridPoints);
}

inline SpectrumRow spectrum_row(double omega, const ValidatedModel& m, const ThetaSpec& theta) {
  SpectrumRow row;
  row.omega = omega;
  try {
    for (int port = 1; port <= 2; ++port) {
      const auto k = static_cast<std::size_t>(port - 1);
      const ScatteringCoeffs here = scattering_coeffs(port, omega, m);
      const ScatteringCoeffs mirror = scattering_coeffs(port, -omega, m);
      row.n[k] = detail::noise_sum(here);
      row.m[k] = detail::anomalous_sum(here, mirror);
      if (theta.mode == ThetaMode::Optimal) {
        row.theta[k] = optimal_theta_from_moments({row.n[k], detail::noise_sum(mirror), row.m[k]}).theta;
      } else {
        row.theta[k] = resolve_theta(theta, m.params.eps_phase);
      }
      row.p[k] = quadrature_spectrum(here, mirror, row.theta[k]);
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularDelta) throw;
    row = SpectrumRow{};
    row.omega = omega;
    row.status = RowStatus::Singular;
  }
  return row;
}

/// Evaluates both outputs on a strictly increasing grid. Points where det M
/// vanishes are kept as Singular rows.
inline SpectrumTable spectrum_table(const ValidatedModel& m, const std::vector<double>& grid, const ThetaSpec& theta) {
  if (grid.empty()) fail(ErrorCode::EmptyGrid, "spectrum grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) fail(ErrorCode::InvalidArgument, "grid values must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) fail(ErrorCode::InvalidArgument, "grid must be strictly increasing");
  }
  SpectrumTable table;
  table.fingerprint = model_fingerprint(m.params);
  table.theta = theta;
  table.rows.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { table.rows[i] = spectrum_row(grid[i], m, theta); });
  return table;
}

/// Same rates with the feedback channel replaced by a Markovian reservoir
/// (gamma_f = 0): the no-feedback reference spectrum.
inline ModelParams markovian_reference(const ModelParams& p) {
  ModelParams q = p;
  q.gamma_f = 0.0;
  return q;
}

}  // namespace dposim
