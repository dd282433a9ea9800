#pragma once

// Scenario / run-manifest persistence.
//
// Format (schema_version 1): line-oriented "key = value" pairs grouped into
// [sections]. Blank lines and lines starting with '#' are ignored. Unknown
// sections or keys are rejected. See docs/scenario_format.md for the full key
// list.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dposim/error.hpp"
#include "dposim/format.hpp"
#include "dposim/model.hpp"

namespace dposim {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr int kCsvSchemaVersion = 1;
inline constexpr double kDefaultEta = 1e-6;

enum class PumpKind { Absolute, Excess, AtThreshold };

/// How |eps| is specified. Excess fixes |eps| - (g2+g3)/2; AtThreshold sets
/// |eps| = (1 - eta) (g2+g3)/2.
struct PumpSpec {
  PumpKind kind = PumpKind::Absolute;
  double value = 0.0;
  bool operator==(const PumpSpec&) const = default;
};

struct GridSpec {
  std::optional<double> omega_min;
  std::optional<double> omega_max;
  std::optional<std::int64_t> points;
  bool operator==(const GridSpec&) const = default;
};

struct MapSpec {
  double gamma1_tau_min = 0.05;
  double gamma1_tau_max = 5.0;
  std::int64_t gamma1_tau_points = 100;
  double alpha_min = -1.0;
  double alpha_max = 4.0;
  std::int64_t alpha_points = 101;
  Interference interference = Interference::Constructive;
  bool operator==(const MapSpec&) const = default;
};

struct DdeSpec {
  std::optional<double> t_end;
  std::optional<double> dt;
  double v0_re = 1.0;
  double v0_im = 0.0;
  bool operator==(const DdeSpec&) const = default;
};

struct RunManifest {
  ModelParams model;  // eps_abs kept in sync with `pump` by resolve()
  PumpSpec pump;
  double eta = kDefaultEta;
  GridSpec grid;
  MapSpec map;
  DdeSpec dde;
  std::string command;
  std::string output;
  bool compare_markovian = false;
  bool with_oracle = false;
  bool sweep_delta = false;
  bool deterministic = true;

  bool operator==(const RunManifest&) const = default;
};

inline double resolve_pump(const PumpSpec& pump, const ModelParams& m, double eta) {
  const double loss = 0.5 * (m.gamma2 + m.gamma3);
  switch (pump.kind) {
    case PumpKind::Excess: return pump.value + loss;
    case PumpKind::AtThreshold: return (1.0 - eta) * loss;
    default: return pump.value;
  }
}

/// Recomputes model.eps_abs from the pump spec.
inline void resolve(RunManifest& m) { m.model.eps_abs = resolve_pump(m.pump, m.model, m.eta); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline void put(std::ostringstream& os, std::string_view key, const std::string& value) {
  os << key << " = " << value << '\n';
}

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

inline std::string theta_mode_text(ThetaMode m) {
  switch (m) {
    case ThetaMode::Fixed: return "fixed";
    case ThetaMode::Optimal: return "optimal";
    default: return "paper";
  }
}

inline std::string scaled_text(std::int64_t s_micro) {
  // exact decimal of s_micro / 1e6
  std::string out = std::to_string(s_micro / kMicro);
  std::int64_t frac = s_micro % kMicro;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 6 - digits.size(), '0');
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

}  // namespace detail

/// Canonical text of every ModelParams field (resolved |eps|); used for the
/// table fingerprint.
inline std::string canonical_model_text(const ModelParams& p) {
  std::ostringstream os;
  os << "omega0=" << format_exact(p.omega0) << ";eps_abs=" << format_exact(p.eps_abs)
     << ";beta=" << format_exact(p.eps_phase) << ";gamma1=" << format_exact(p.gamma1)
     << ";gamma2=" << format_exact(p.gamma2) << ";gamma3=" << format_exact(p.gamma3);
  if (p.gamma_f) os << ";gamma_f=" << format_exact(*p.gamma_f);
  if (p.phi) os << ";phi=" << format_exact(*p.phi);
  if (p.delay.is_scaled()) {
    os << ";S_micro=" << p.delay.scaled_part().s_micro << ";delta=" << p.delay.scaled_part().delta;
  } else {
    os << ";tau=" << format_exact(p.delay.raw_part().tau);
  }
  os << ";theta=" << detail::theta_mode_text(p.theta.mode);
  if (p.theta.mode == ThetaMode::Fixed) os << ":" << format_exact(p.theta.value);
  return os.str();
}

inline std::string model_fingerprint(const ModelParams& p) { return hex64(fnv1a(canonical_model_text(p))); }

inline std::string serialize_manifest(const RunManifest& m) {
  using detail::put;
  std::ostringstream os;
  os << "schema_version = " << kScenarioSchemaVersion << "\n\n[model]\n";
  const auto& p = m.model;
  put(os, "omega0", format_exact(p.omega0));
  switch (m.pump.kind) {
    case PumpKind::Absolute: put(os, "epsilon_abs", format_exact(m.pump.value)); break;
    case PumpKind::Excess: put(os, "epsilon_excess", format_exact(m.pump.value)); break;
    case PumpKind::AtThreshold: put(os, "epsilon_at_threshold", "true"); break;
  }
  put(os, "beta", format_exact(p.eps_phase));
  put(os, "gamma1", format_exact(p.gamma1));
  put(os, "gamma2", format_exact(p.gamma2));
  put(os, "gamma3", format_exact(p.gamma3));
  if (p.gamma_f) put(os, "gamma_f", format_exact(*p.gamma_f));
  if (p.phi) put(os, "phi", format_exact(*p.phi));

  os << "\n[delay]\n";
  if (p.delay.is_scaled()) {
    put(os, "scale_S", detail::scaled_text(p.delay.scaled_part().s_micro));
    put(os, "delta", std::to_string(p.delay.scaled_part().delta));
  } else {
    put(os, "tau", format_exact(p.delay.raw_part().tau));
  }

  os << "\n[theta]\n";
  put(os, "mode", detail::theta_mode_text(p.theta.mode));
  if (p.theta.mode == ThetaMode::Fixed) put(os, "value", format_exact(p.theta.value));

  os << "\n[grid]\n";
  if (m.grid.omega_min) put(os, "omega_min", format_exact(*m.grid.omega_min));
  if (m.grid.omega_max) put(os, "omega_max", format_exact(*m.grid.omega_max));
  if (m.grid.points) put(os, "omega_points", std::to_string(*m.grid.points));

  os << "\n[map]\n";
  put(os, "gamma1_tau_min", format_exact(m.map.gamma1_tau_min));
  put(os, "gamma1_tau_max", format_exact(m.map.gamma1_tau_max));
  put(os, "gamma1_tau_points", std::to_string(m.map.gamma1_tau_points));
  put(os, "alpha_min", format_exact(m.map.alpha_min));
  put(os, "alpha_max", format_exact(m.map.alpha_max));
  put(os, "alpha_points", std::to_string(m.map.alpha_points));
  put(os, "interference", to_string(m.map.interference));

  os << "\n[dde]\n";
  if (m.dde.t_end) put(os, "t_end", format_exact(*m.dde.t_end));
  if (m.dde.dt) put(os, "dt", format_exact(*m.dde.dt));
  put(os, "v0_re", format_exact(m.dde.v0_re));
  put(os, "v0_im", format_exact(m.dde.v0_im));

  os << "\n[run]\n";
  put(os, "eta", format_exact(m.eta));
  if (!m.command.empty()) put(os, "command", m.command);
  if (!m.output.empty()) put(os, "output", m.output);
  put(os, "compare_markovian", detail::bool_text(m.compare_markovian));
  put(os, "with_oracle", detail::bool_text(m.with_oracle));
  put(os, "sweep_delta", detail::bool_text(m.sweep_delta));
  put(os, "deterministic", detail::bool_text(m.deterministic));
  return os.str();
}

/// Parses manifest text. `origin` names the source in error messages.
inline RunManifest parse_manifest(std::string_view text, const std::string& origin = "<text>") {
  struct Entry {
    std::string value;
    int line;
    int column;
  };
  std::map<std::string, Entry> entries;  // "section.key"
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  auto where = [&](int line, int col) { return origin + ":" + std::to_string(line) + ":" + std::to_string(col); };

  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const int col = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::ParseError, where(line_no, col) + ": unterminated section header");
      section = std::string(detail::trim(line.substr(1, line.size() - 2)));
      static const char* known[] = {"model", "delay", "theta", "grid", "map", "dde", "run"};
      bool ok = false;
      for (auto* k : known) ok = ok || section == k;
      if (!ok) fail(ErrorCode::UnknownKey, where(line_no, col) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::ParseError, where(line_no, col) + ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) fail(ErrorCode::ParseError, where(line_no, col) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    const int value_col = col + static_cast<int>(eq) + 1;
    if (!entries.emplace(full, Entry{value, line_no, value_col}).second) {
      fail(ErrorCode::ParseError, where(line_no, col) + ": duplicate key '" + full + "'");
    }
  }

  static const char* allowed[] = {
      "schema_version", "model.omega0", "model.epsilon_abs", "model.epsilon_excess", "model.epsilon_at_threshold",
      "model.beta", "model.gamma1", "model.gamma2", "model.gamma3", "model.gamma_f", "model.phi", "delay.tau",
      "delay.scale_S", "delay.delta", "theta.mode", "theta.value", "grid.omega_min", "grid.omega_max",
      "grid.omega_points", "map.gamma1_tau_min", "map.gamma1_tau_max", "map.gamma1_tau_points", "map.alpha_min",
      "map.alpha_max", "map.alpha_points", "map.interference", "dde.t_end", "dde.dt", "dde.v0_re", "dde.v0_im",
      "run.eta", "run.command", "run.output", "run.compare_markovian", "run.with_oracle", "run.sweep_delta",
      "run.deterministic"};
  for (const auto& [k, e] : entries) {
    bool ok = false;
    for (auto* a : allowed) ok = ok || k == a;
    if (!ok) fail(ErrorCode::UnknownKey, where(e.line, 1) + ": unknown key '" + k + "'");
  }

  auto find = [&](const char* k) -> const Entry* {
    auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };
  auto get_double = [&](const char* k) -> std::optional<double> {
    const Entry* e = find(k);
    if (!e) return std::nullopt;
    double v = 0.0;
    if (!parse_double(e->value, v)) fail(ErrorCode::ParseError, where(e->line, e->column) + ": '" + k + "' expects a number");
    return v;
  };
  auto get_int = [&](const char* k) -> std::optional<std::int64_t> {
    const Entry* e = find(k);
    if (!e) return std::nullopt;
    std::int64_t v = 0;
    if (!parse_int(e->value, v)) fail(ErrorCode::ParseError, where(e->line, e->column) + ": '" + k + "' expects an integer");
    return v;
  };
  auto get_bool = [&](const char* k) -> std::optional<bool> {
    const Entry* e = find(k);
    if (!e) return std::nullopt;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail(ErrorCode::ParseError, where(e->line, e->column) + ": '" + k + "' expects true/false");
  };

  const auto version = get_int("schema_version");
  if (!version) fail(ErrorCode::VersionMismatch, origin + ": missing schema_version (expected " + std::to_string(kScenarioSchemaVersion) + ")");
  if (*version != kScenarioSchemaVersion) {
    fail(ErrorCode::VersionMismatch, origin + ": schema_version " + std::to_string(*version) + " is not supported; this build reads version " +
                                         std::to_string(kScenarioSchemaVersion) +
                                         ". Re-save the scenario with a matching dposim release (dposim ... --save-manifest) to migrate.");
  }

  RunManifest m;
  auto& p = m.model;
  if (auto v = get_double("model.omega0")) p.omega0 = *v;
  if (auto v = get_double("model.beta")) p.eps_phase = *v;
  if (auto v = get_double("model.gamma1")) p.gamma1 = *v;
  if (auto v = get_double("model.gamma2")) p.gamma2 = *v;
  if (auto v = get_double("model.gamma3")) p.gamma3 = *v;
  if (auto v = get_double("model.gamma_f")) p.gamma_f = *v;
  if (auto v = get_double("model.phi")) p.phi = *v;

  const auto eps_abs = get_double("model.epsilon_abs");
  const auto eps_excess = get_double("model.epsilon_excess");
  const auto eps_thr = get_bool("model.epsilon_at_threshold");
  const int pump_keys = (eps_abs ? 1 : 0) + (eps_excess ? 1 : 0) + (eps_thr.value_or(false) ? 1 : 0);
  if (pump_keys > 1) fail(ErrorCode::ParseError, origin + ": give only one of epsilon_abs, epsilon_excess, epsilon_at_threshold");
  if (eps_excess) m.pump = {PumpKind::Excess, *eps_excess};
  else if (eps_thr.value_or(false)) m.pump = {PumpKind::AtThreshold, 0.0};
  else if (eps_abs) m.pump = {PumpKind::Absolute, *eps_abs};

  const auto tau = get_double("delay.tau");
  const Entry* scale = find("delay.scale_S");
  const auto delta = get_int("delay.delta");
  if (tau && (scale || delta)) fail(ErrorCode::ConflictingDelaySpec, origin + ": [delay] has both tau and scale_S/delta");
  if (scale) {
    double s = 0.0;
    if (!parse_double(scale->value, s)) fail(ErrorCode::ParseError, where(scale->line, scale->column) + ": 'delay.scale_S' expects a number");
    p.delay = DelaySpec::scaled(s, static_cast<int>(delta.value_or(0)));
    if (delta && *delta != 0 && *delta != 1) fail(ErrorCode::MalformedDelaySpec, origin + ": delta must be 0 or 1");
  } else if (delta) {
    fail(ErrorCode::MalformedDelaySpec, origin + ": delta given without scale_S");
  } else if (tau) {
    p.delay = DelaySpec::raw(*tau);
  }

  if (const Entry* e = find("theta.mode")) {
    if (e->value == "paper") p.theta.mode = ThetaMode::Paper;
    else if (e->value == "fixed") p.theta.mode = ThetaMode::Fixed;
    else if (e->value == "optimal") p.theta.mode = ThetaMode::Optimal;
    else fail(ErrorCode::ParseError, where(e->line, e->column) + ": theta.mode must be paper, fixed or optimal");
  }
  if (auto v = get_double("theta.value")) {
    if (p.theta.mode != ThetaMode::Fixed) fail(ErrorCode::ParseError, origin + ": theta.value requires mode = fixed");
    p.theta.value = *v;
  } else if (p.theta.mode == ThetaMode::Fixed) {
    fail(ErrorCode::ParseError, origin + ": theta mode fixed requires theta.value");
  }

  m.grid.omega_min = get_double("grid.omega_min");
  m.grid.omega_max = get_double("grid.omega_max");
  m.grid.points = get_int("grid.omega_points");

  if (auto v = get_double("map.gamma1_tau_min")) m.map.gamma1_tau_min = *v;
  if (auto v = get_double("map.gamma1_tau_max")) m.map.gamma1_tau_max = *v;
  if (auto v = get_int("map.gamma1_tau_points")) m.map.gamma1_tau_points = *v;
  if (auto v = get_double("map.alpha_min")) m.map.alpha_min = *v;
  if (auto v = get_double("map.alpha_max")) m.map.alpha_max = *v;
  if (auto v = get_int("map.alpha_points")) m.map.alpha_points = *v;
  if (const Entry* e = find("map.interference")) {
    if (e->value == "constructive") m.map.interference = Interference::Constructive;
    else if (e->value == "destructive") m.map.interference = Interference::Destructive;
    else fail(ErrorCode::ParseError, where(e->line, e->column) + ": map.interference must be constructive or destructive");
  }

  m.dde.t_end = get_double("dde.t_end");
  m.dde.dt = get_double("dde.dt");
  if (auto v = get_double("dde.v0_re")) m.dde.v0_re = *v;
  if (auto v = get_double("dde.v0_im")) m.dde.v0_im = *v;

  if (auto v = get_double("run.eta")) m.eta = *v;
  if (const Entry* e = find("run.command")) m.command = e->value;
  if (const Entry* e = find("run.output")) m.output = e->value;
  if (auto v = get_bool("run.compare_markovian")) m.compare_markovian = *v;
  if (auto v = get_bool("run.with_oracle")) m.with_oracle = *v;
  if (auto v = get_bool("run.sweep_delta")) m.sweep_delta = *v;
  if (auto v = get_bool("run.deterministic")) m.deterministic = *v;

  if (!(m.eta >= 0.0 && m.eta < 1.0)) fail(ErrorCode::InvalidArgument, origin + ": eta must lie in [0, 1)");
  resolve(m);
  return m;
}

inline std::string read_text_file(const std::string& path) {
  if (path.empty()) fail(ErrorCode::IoError, "empty path");
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  if (path.empty()) fail(ErrorCode::IoError, "empty path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

/// Loads a scenario file, resolves |eps| and validates the model. Callers that
/// apply overrides must call resolve() and validate() again afterwards.
inline RunManifest load_scenario(const std::string& path) {
  RunManifest m = parse_manifest(read_text_file(path), path);
  validate(m.model);
  return m;
}

inline void save_manifest(const RunManifest& m, const std::string& path) { write_text_file(path, serialize_manifest(m)); }

inline RunManifest load_manifest(const std::string& path) { return load_scenario(path); }

}  // namespace dposim
