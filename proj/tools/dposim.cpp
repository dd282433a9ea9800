// dposim: spectra, stability maps and DDE runs for the delayed-feedback DPO.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dposim/dposim.hpp"

namespace {

using namespace dposim;

struct Overrides {
  std::string preset;
  std::string config;
  std::string save_manifest;
  bool fig3 = false, fig4 = false, fig5 = false;

  std::optional<double> gamma1, gamma2, gamma3, gamma_f, phi, eps_abs, eps_excess, beta, omega0, tau, scale_s;
  std::optional<int> delta;
  std::optional<double> theta;
  bool theta_opt = false;
  bool at_threshold = false;
  std::optional<double> eta;
  std::optional<double> omega_min, omega_max;
  std::optional<std::int64_t> omega_points;
  std::optional<std::string> output;
  bool compare_markovian = false, with_oracle = false, sweep_delta = false;

  std::optional<double> x_min, x_max, alpha_min, alpha_max;
  std::optional<std::int64_t> x_points, alpha_points;
  std::optional<std::string> interference;

  std::optional<double> t_end, dt, v0_re, v0_im;
};

void add_model_options(CLI::App* c, Overrides& o) {
  c->add_option("--preset", o.preset, "fig3 | fig4 | fig5-g05 | fig5-g3 | fig5-g9 | fig2a-map | fig2b-map");
  c->add_flag("--fig3-preset", o.fig3, "same as --preset fig3");
  c->add_flag("--fig4-preset", o.fig4, "same as --preset fig4");
  c->add_flag("--fig5-preset", o.fig5, "same as --preset fig5-g05 (combine with --gamma2)");
  c->add_option("--config", o.config, "scenario file");
  c->add_option("--save-manifest", o.save_manifest, "write the resolved manifest to FILE");
  c->add_option("--gamma1", o.gamma1, "feedback-port coupling (ns^-1)");
  c->add_option("--gamma2", o.gamma2, "mirror M2 loss (ns^-1)");
  c->add_option("--gamma3", o.gamma3, "feedback-imperfection loss (ns^-1)");
  c->add_option("--gamma-f", o.gamma_f, "return coupling (default gamma1)");
  c->add_option("--phi", o.phi, "loop phase (default pi)");
  c->add_option("--epsilon-abs", o.eps_abs, "pump |eps| (ns^-1)");
  c->add_option("--epsilon-excess", o.eps_excess, "pump as |eps| - (gamma2+gamma3)/2");
  c->add_flag("--at-threshold", o.at_threshold, "|eps| = (1 - eta)(gamma2+gamma3)/2");
  c->add_option("--beta", o.beta, "pump phase");
  c->add_option("--omega0", o.omega0, "carrier frequency (ns^-1)");
  c->add_option("--tau", o.tau, "raw delay (ns)");
  c->add_option("--scale-S", o.scale_s, "delay scale: tau = (S + delta 1e-6) pi ns");
  c->add_option("--delta", o.delta, "0 destructive, 1 constructive (with --scale-S)");
  c->add_option("--theta", o.theta, "fixed quadrature angle");
  c->add_flag("--theta-opt", o.theta_opt, "optimal quadrature per frequency");
  c->add_option("--eta", o.eta, "threshold proximity");
  c->add_option("--output", o.output, "output file (default stdout)");
}

void add_grid_options(CLI::App* c, Overrides& o) {
  c->add_option("--omega-min", o.omega_min, "lowest detuning (default -half width)");
  c->add_option("--omega-max", o.omega_max, "highest detuning (default +half width)");
  c->add_option("--omega-points", o.omega_points, "grid size (default 2001)");
  c->add_flag("--compare-markovian", o.compare_markovian, "add the gamma_f = 0 reference columns");
  c->add_flag("--sweep-delta", o.sweep_delta, "run delta = 0 and 1");
}

void add_map_options(CLI::App* c, Overrides& o) {
  c->add_option("--x-min", o.x_min, "gamma1*tau axis");
  c->add_option("--x-max", o.x_max);
  c->add_option("--x-points", o.x_points);
  c->add_option("--alpha-min", o.alpha_min, "alpha_tilde axis");
  c->add_option("--alpha-max", o.alpha_max);
  c->add_option("--alpha-points", o.alpha_points);
  c->add_option("--interference", o.interference, "constructive | destructive");
}

void add_dde_options(CLI::App* c, Overrides& o) {
  c->add_option("--t-end", o.t_end, "end time (default max(20 tau, 20/G))");
  c->add_option("--dt", o.dt, "step (default: tau/N below min(tau/50, 1/(50 rate)))");
  c->add_option("--v0-re", o.v0_re, "initial v1, real part");
  c->add_option("--v0-im", o.v0_im, "initial v1, imaginary part");
}

RunManifest build_manifest(const Overrides& o, const std::string& command) {
  std::string name = o.preset;
  int aliases = (o.fig3 ? 1 : 0) + (o.fig4 ? 1 : 0) + (o.fig5 ? 1 : 0) + (name.empty() ? 0 : 1);
  if (aliases > 1) fail(ErrorCode::InvalidArgument, "give at most one preset");
  if (o.fig3) name = "fig3";
  if (o.fig4) name = "fig4";
  if (o.fig5) name = "fig5-g05";
  if (!name.empty() && !o.config.empty()) fail(ErrorCode::InvalidArgument, "--preset and --config are exclusive");

  RunManifest m;
  if (!name.empty()) m = preset(name);
  if (!o.config.empty()) m = parse_manifest(read_text_file(o.config), o.config);
  m.command = command;

  auto& p = m.model;
  if (o.gamma1) p.gamma1 = *o.gamma1;
  if (o.gamma2) p.gamma2 = *o.gamma2;
  if (o.gamma3) p.gamma3 = *o.gamma3;
  if (o.gamma_f) p.gamma_f = *o.gamma_f;
  if (o.phi) p.phi = *o.phi;
  if (o.beta) p.eps_phase = *o.beta;
  if (o.omega0) p.omega0 = *o.omega0;

  const int pumps = (o.eps_abs ? 1 : 0) + (o.eps_excess ? 1 : 0) + (o.at_threshold ? 1 : 0);
  if (pumps > 1) fail(ErrorCode::InvalidArgument, "give only one of --epsilon-abs, --epsilon-excess, --at-threshold");
  if (o.eps_abs) m.pump = {PumpKind::Absolute, *o.eps_abs};
  if (o.eps_excess) m.pump = {PumpKind::Excess, *o.eps_excess};
  if (o.at_threshold) m.pump = {PumpKind::AtThreshold, 0.0};
  if (o.eta) m.eta = *o.eta;
  if (!(m.eta >= 0.0 && m.eta < 1.0)) fail(ErrorCode::InvalidArgument, "eta must lie in [0, 1)");

  if (o.tau && (o.scale_s || o.delta)) fail(ErrorCode::ConflictingDelaySpec, "--tau conflicts with --scale-S/--delta");
  if (o.tau) p.delay = DelaySpec::raw(*o.tau);
  if (o.scale_s) {
    p.delay = DelaySpec::scaled(*o.scale_s, o.delta.value_or(p.delay.is_scaled() ? p.delay.scaled_part().delta : 0));
  } else if (o.delta) {
    if (!p.delay.is_scaled()) fail(ErrorCode::MalformedDelaySpec, "--delta needs a scaled delay (--scale-S)");
    if (*o.delta != 0 && *o.delta != 1) fail(ErrorCode::MalformedDelaySpec, "delta must be 0 or 1");
    p.delay = p.delay.with_delta(*o.delta);
  }

  if (o.theta && o.theta_opt) fail(ErrorCode::InvalidArgument, "--theta and --theta-opt are exclusive");
  if (o.theta) p.theta = {ThetaMode::Fixed, *o.theta};
  if (o.theta_opt) p.theta = {ThetaMode::Optimal, 0.0};

  if (o.omega_min) m.grid.omega_min = o.omega_min;
  if (o.omega_max) m.grid.omega_max = o.omega_max;
  if (o.omega_points) m.grid.points = o.omega_points;
  if (o.output) m.output = *o.output;
  if (o.compare_markovian) m.compare_markovian = true;
  if (o.with_oracle) m.with_oracle = true;
  if (o.sweep_delta) m.sweep_delta = true;

  if (o.x_min) m.map.gamma1_tau_min = *o.x_min;
  if (o.x_max) m.map.gamma1_tau_max = *o.x_max;
  if (o.x_points) m.map.gamma1_tau_points = *o.x_points;
  if (o.alpha_min) m.map.alpha_min = *o.alpha_min;
  if (o.alpha_max) m.map.alpha_max = *o.alpha_max;
  if (o.alpha_points) m.map.alpha_points = *o.alpha_points;
  if (o.interference) {
    if (*o.interference == "constructive") m.map.interference = Interference::Constructive;
    else if (*o.interference == "destructive") m.map.interference = Interference::Destructive;
    else fail(ErrorCode::InvalidArgument, "--interference must be constructive or destructive");
  }

  if (o.t_end) m.dde.t_end = o.t_end;
  if (o.dt) m.dde.dt = o.dt;
  if (o.v0_re) m.dde.v0_re = *o.v0_re;
  if (o.v0_im) m.dde.v0_im = *o.v0_im;

  resolve(m);
  validate(m.model);
  return m;
}

int emit(const CommandOutput& out) {
  for (const OutputFile& f : out.files) {
    if (f.path.empty()) {
      std::cout << f.content;
    } else {
      write_text_file(f.path, f.content);
    }
  }
  // keep stdout clean for CSV when a file goes there
  bool csv_on_stdout = false;
  for (const OutputFile& f : out.files) csv_on_stdout = csv_on_stdout || f.path.empty();
  (csv_on_stdout ? std::cerr : std::cout) << out.text;
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Squeezing spectra and stability of a degenerate parametric oscillator with coherent delayed feedback"};
  app.require_subcommand(1);

  Overrides o;
  auto* spectrum = app.add_subcommand("spectrum", "squeezing spectra P1, P2 on an omega grid");
  add_model_options(spectrum, o);
  add_grid_options(spectrum, o);

  auto* stability = app.add_subcommand("stability", "S1_W, S2_W and the delay-independent criterion");
  add_model_options(stability, o);
  stability->add_flag("--with-oracle", o.with_oracle, "also locate the dominant root numerically");

  auto* map = app.add_subcommand("stability-map", "tau*S1_W over (gamma1*tau, alpha_tilde) plus the boundary");
  add_model_options(map, o);
  add_map_options(map, o);

  auto* dde = app.add_subcommand("dde", "integrate the mean-field delay equation");
  add_model_options(dde, o);
  add_dde_options(dde, o);

  app.add_subcommand("verify", "run the cross-oracle self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "verify") return emit(cmd_verify());
    const RunManifest m = build_manifest(o, command);
    if (!o.save_manifest.empty()) save_manifest(m, o.save_manifest);
    return emit(run_command(m));
  } catch (const Error& e) {
    std::cerr << "dposim: " << e.what() << "\n";
    if (e.code() == ErrorCode::GenericPhase) std::cerr << "hint: rerun with --with-oracle, which handles any phase\n";
    return exit_code_for(e.code());
  }
}
