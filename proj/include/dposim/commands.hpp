#pragma once

// Subcommand bodies shared by the dposim tool and the tests. Each returns the
// files it would write plus its stdout text; nothing here touches the
// filesystem.

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dposim/dde.hpp"
#include "dposim/error.hpp"
#include "dposim/format.hpp"
#include "dposim/scenario.hpp"
#include "dposim/spectrum.hpp"
#include "dposim/stability.hpp"
#include "dposim/verify.hpp"

namespace dposim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitIo = 4;

inline int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::SingularDelta:
    case ErrorCode::NonConvergence:
    case ErrorCode::NoRootFound:
    case ErrorCode::NonFiniteState:
    case ErrorCode::DegenerateTrace: return kExitDegenerate;
    case ErrorCode::IoError: return kExitIo;
    default: return kExitValidation;
  }
}

struct OutputFile {
  std::string path;  // empty: stdout
  std::string content;
};

struct CommandOutput {
  std::vector<OutputFile> files;
  std::string text;  // human-readable stdout
  int exit_code = kExitOk;
};

// ---------------------------------------------------------------------------
// CSV

/// Comment header: schema version, kind, then the full manifest.
inline std::string csv_header(const RunManifest& m, const std::string& kind) {
  std::ostringstream os;
  os << "# dposim csv_schema_version = " << kCsvSchemaVersion << "\n";
  os << "# kind = " << kind << "\n";
  os << "# fingerprint = " << model_fingerprint(m.model) << "\n";
  std::istringstream manifest(serialize_manifest(m));
  for (std::string line; std::getline(manifest, line);) os << (line.empty() ? "#" : "# " + line) << "\n";
  return os.str();
}

inline std::string spectrum_csv(const RunManifest& m, const SpectrumTable& t, const SpectrumTable* markov) {
  std::ostringstream os;
  os << csv_header(m, "spectrum");
  os << "omega,P1,P2,N1,N2,ReM1,ImM1,ReM2,ImM2";
  if (markov) os << ",P1_markov,P2_markov";
  os << ",status\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const SpectrumRow& r = t.rows[i];
    const bool ok = r.status == RowStatus::Ok;
    auto num = [&](double v) { return ok ? format_number(v) : std::string("nan"); };
    os << format_number(r.omega) << ',' << num(r.p[0]) << ',' << num(r.p[1]) << ',' << num(r.n[0]) << ',' << num(r.n[1])
       << ',' << num(r.m[0].real()) << ',' << num(r.m[0].imag()) << ',' << num(r.m[1].real()) << ','
       << num(r.m[1].imag());
    if (markov) {
      const SpectrumRow& q = markov->rows[i];
      const bool qok = q.status == RowStatus::Ok;
      os << ',' << (qok ? format_number(q.p[0]) : "nan") << ',' << (qok ? format_number(q.p[1]) : "nan");
    }
    os << ',' << (ok ? "ok" : "singular") << '\n';
  }
  return os.str();
}

/// "dir/name.csv" -> "dir/name<suffix>.csv"; no extension -> append.
inline std::string with_suffix(const std::string& path, const std::string& suffix) {
  if (path.empty()) return path;
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

// ---------------------------------------------------------------------------
// spectrum

inline std::vector<double> manifest_grid(const RunManifest& r, const ValidatedModel& m) {
  const double hw = default_half_width(m);
  const double lo = r.grid.omega_min.value_or(-hw);
  const double hi = r.grid.omega_max.value_or(hw);
  const std::int64_t n = r.grid.points.value_or(kDefaultGridPoints);
  if (n < 1) fail(ErrorCode::EmptyGrid, "omega_points must be >= 1");
  if (n > 1 && !(hi > lo)) fail(ErrorCode::InvalidArgument, "omega_max must exceed omega_min");
  return linspace(lo, hi, n);
}

inline CommandOutput cmd_spectrum(const RunManifest& manifest) {
  std::vector<RunManifest> runs;
  if (manifest.sweep_delta) {
    if (!manifest.model.delay.is_scaled()) fail(ErrorCode::MalformedDelaySpec, "sweep_delta needs a scaled delay (scale_S)");
    for (int d : {0, 1}) {
      RunManifest r = manifest;
      r.sweep_delta = false;
      r.model.delay = manifest.model.delay.with_delta(d);
      if (!manifest.output.empty()) r.output = with_suffix(manifest.output, "_delta" + std::to_string(d));
      runs.push_back(r);
    }
  } else {
    runs.push_back(manifest);
  }
  CommandOutput out;
  std::ostringstream text;
  for (RunManifest& r : runs) {
    resolve(r);
    const ValidatedModel m = validate(r.model);
    const auto grid = manifest_grid(r, m);
    const SpectrumTable t = spectrum_table(m, grid, r.model.theta);
    if (t.singular_count() == t.rows.size()) {
      fail(ErrorCode::SingularDelta, "det M vanishes at every grid point");
    }
    std::optional<SpectrumTable> markov;
    if (r.compare_markovian) markov = spectrum_table(validate(markovian_reference(r.model)), grid, r.model.theta);
    out.files.push_back({r.output, spectrum_csv(r, t, markov ? &*markov : nullptr)});
    text << "spectrum " << to_string(m.derived.interference) << " fingerprint=" << t.fingerprint << " points=" << t.rows.size()
         << " singular=" << t.singular_count();
    if (!r.output.empty()) text << " -> " << r.output;
    text << "\n";
  }
  out.text = text.str();
  return out;
}

// ---------------------------------------------------------------------------
// stability

inline CommandOutput cmd_stability(const RunManifest& manifest) {
  RunManifest r = manifest;
  resolve(r);
  const ValidatedModel m = validate(r.model);
  const StabilityVerdict v = assess_stability(m, r.with_oracle);
  std::ostringstream os;
  os << "interference        " << to_string(v.interference) << "\n";
  os << "G                   " << format_number(m.derived.G) << "\n";
  if (m.derived.alpha_tilde) os << "alpha_tilde         " << format_number(*m.derived.alpha_tilde) << "\n";
  os << "gamma1*tau          " << format_number(m.derived.gamma1_tau) << " (" << to_string(m.derived.regime) << ")\n";
  os << "method              " << v.method << "\n";
  os << "S1_W                " << format_number(v.s1w) << "\n";
  os << "S2_W                " << format_number(v.s2w) << "\n";
  const std::string verdict = v.marginal ? "marginal" : (v.stable ? "stable" : "unstable");
  os << "verdict             " << verdict << "\n";
  if (v.delay_independent_stable) {
    os << "delay-independent   " << (*v.delay_independent_stable ? "yes" : "no");
    if (v.routh_hurwitz && !v.routh_hurwitz->consistent) os << " (procedure disagrees)";
    os << "\n";
  }
  if (v.dominant_root) {
    os << "oracle root         " << format_number(v.dominant_root->real()) << " " << (v.dominant_root->imag() < 0 ? "-" : "+")
       << " " << format_number(std::abs(v.dominant_root->imag())) << "i\n";
  }
  os << "RESULT verdict=" << verdict << " s1w=" << format_number(v.s1w) << " s2w=" << format_number(v.s2w);
  if (v.delay_independent_stable) os << " delay_independent=" << (*v.delay_independent_stable ? "true" : "false");
  if (v.dominant_root) {
    os << " oracle_re=" << format_number(v.dominant_root->real()) << " oracle_im=" << format_number(v.dominant_root->imag());
  }
  os << " method=" << v.method << "\n";
  CommandOutput out;
  out.text = os.str();
  if (!r.output.empty()) out.files.push_back({r.output, out.text});
  return out;
}

// ---------------------------------------------------------------------------
// stability-map

inline CommandOutput cmd_stability_map(const RunManifest& manifest) {
  RunManifest r = manifest;
  resolve(r);
  const StabilityMap map = stability_map(r.map, r.map.interference);
  std::ostringstream mp;
  mp << csv_header(r, "stability-map");
  mp << "gamma1_tau,alpha_tilde,tau_S1W,stable\n";
  for (std::size_t i = 0; i < map.gamma1_tau.size(); ++i) {
    for (std::size_t j = 0; j < map.alpha_tilde.size(); ++j) {
      const double v = map.at(i, j);
      mp << format_number(map.gamma1_tau[i]) << ',' << format_number(map.alpha_tilde[j]) << ',' << format_number(v) << ','
         << (v < 0.0 ? 1 : 0) << '\n';
    }
  }
  std::ostringstream bd;
  bd << csv_header(r, "stability-boundary");
  bd << "gamma1_tau,alpha_tilde\n";
  for (const BoundaryPoint& b : map.boundary) bd << format_number(b.gamma1_tau) << ',' << format_number(b.alpha_tilde) << '\n';

  CommandOutput out;
  out.files.push_back({r.output, mp.str()});
  out.files.push_back({r.output.empty() ? std::string() : with_suffix(r.output, "_boundary"), bd.str()});
  std::ostringstream text;
  text << "stability-map " << to_string(map.interference) << " cells=" << map.s1w.size() << " boundary_points=" << map.boundary.size()
       << "\n";
  out.text = text.str();
  return out;
}

// ---------------------------------------------------------------------------
// dde

inline CommandOutput cmd_dde(const RunManifest& manifest) {
  RunManifest r = manifest;
  resolve(r);
  const ValidatedModel m = validate(r.model);
  const State v0{cplx(r.dde.v0_re, r.dde.v0_im), cplx(r.dde.v0_re, -r.dde.v0_im)};
  const DdeTrace tr = integrate(m, v0, r.dde.t_end.value_or(default_dde_t_end(m)), r.dde.dt.value_or(default_dde_dt(m)));
  const DdeClassification c = classify(tr);
  std::ostringstream os;
  os << csv_header(r, "dde-trace");
  os << "t,re_v1,im_v1,norm\n";
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    os << format_number(tr.t[i]) << ',' << format_number(tr.v[i][0].real()) << ',' << format_number(tr.v[i][0].imag()) << ','
       << format_number(tr.norm[i]) << '\n';
  }
  CommandOutput out;
  out.files.push_back({r.output, os.str()});
  std::ostringstream text;
  text << "RESULT class=" << to_string(c.cls) << " rate=" << format_number(c.rate) << " steps=" << (tr.t.size() - 1)
       << " dt=" << format_number(tr.dt) << (tr.overflow ? " overflow=true" : "") << "\n";
  out.text = text.str();
  return out;
}

// ---------------------------------------------------------------------------
// verify

inline std::string verify_table(const std::vector<verify::CheckResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    std::string name = r.name;
    if (name.size() < 34) name.resize(34, ' ');
    os << (r.pass ? "PASS " : "FAIL ") << name << " " << r.detail << "\n";
  }
  return os.str();
}

inline CommandOutput cmd_verify() {
  const auto results = verify::run_all();
  CommandOutput out;
  out.text = verify_table(results);
  for (const auto& r : results) {
    if (!r.pass) out.exit_code = kExitCheckFailed;
  }
  return out;
}

inline CommandOutput run_command(const RunManifest& m) {
  if (m.command == "spectrum") return cmd_spectrum(m);
  if (m.command == "stability") return cmd_stability(m);
  if (m.command == "stability-map") return cmd_stability_map(m);
  if (m.command == "dde") return cmd_dde(m);
  if (m.command == "verify") return cmd_verify();
  fail(ErrorCode::InvalidArgument, "unknown command '" + m.command + "'");
}

}  // namespace dposim
