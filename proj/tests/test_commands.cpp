#include <gtest/gtest.h>

#include <sstream>

#include "dposim/commands.hpp"
#include "dposim/presets.hpp"

using namespace dposim;

namespace {

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.front() != '#') out.push_back(line);
  }
  return out;
}

RunManifest small_spectrum(const char* name) {
  RunManifest r = preset(name);
  r.grid.omega_min = -3.0;
  r.grid.omega_max = 3.0;
  r.grid.points = 61;
  return r;
}

// S+ built with Z Z* + |eps|^2 in place of Z Z* - |eps|^2.
ScatteringCoeffs flipped_delta(int port, double omega, const ValidatedModel& m) {
  FreqResponse r = evaluate_response(omega, m);
  const double e2 = m.params.eps_abs * m.params.eps_abs;
  const cplx scale = r.delta / (r.delta + 2.0 * e2);
  for (auto& a : r.a_plus) a *= scale;
  return scattering_coeffs(port, r, eval_ports(omega, m));
}

}  // namespace

TEST(Commands, SpectrumIsDeterministic) {
  const RunManifest r = small_spectrum("fig5-g3");
  const CommandOutput a = cmd_spectrum(r);
  const CommandOutput b = cmd_spectrum(r);
  ASSERT_EQ(a.files.size(), 1u);
  EXPECT_EQ(a.files[0].content, b.files[0].content);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(data_lines(a.files[0].content).size(), 62u);
  EXPECT_EQ(data_lines(a.files[0].content)[0], "omega,P1,P2,N1,N2,ReM1,ImM1,ReM2,ImM2,status");
}

TEST(Commands, CsvHeaderEmbedsManifest) {
  const RunManifest r = small_spectrum("fig5-g05");
  const std::string csv = cmd_spectrum(r).files[0].content;
  std::string manifest;
  std::istringstream in(csv);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("# dposim", 0) == 0 || line.rfind("# kind", 0) == 0 || line.rfind("# fingerprint", 0) == 0) continue;
    if (line == "#") manifest += "\n";
    else if (line.rfind("# ", 0) == 0) manifest += line.substr(2) + "\n";
  }
  EXPECT_EQ(parse_manifest(manifest), r);
  EXPECT_NE(csv.find("# fingerprint = " + model_fingerprint(r.model)), std::string::npos);
}

TEST(Commands, SweepDeltaWritesBothFiles) {
  RunManifest r = small_spectrum("fig3");
  r.output = "out/fig3.csv";
  const CommandOutput o = cmd_spectrum(r);
  ASSERT_EQ(o.files.size(), 2u);
  EXPECT_EQ(o.files[0].path, "out/fig3_delta0.csv");
  EXPECT_EQ(o.files[1].path, "out/fig3_delta1.csv");
  EXPECT_NE(o.files[0].content, o.files[1].content);
  EXPECT_EQ(data_lines(o.files[0].content)[0], "omega,P1,P2,N1,N2,ReM1,ImM1,ReM2,ImM2,P1_markov,P2_markov,status");
}

TEST(Commands, NoPumpIsFlat) {
  RunManifest r = small_spectrum("fig5-g3");
  r.pump = {PumpKind::Absolute, 0.0};
  const auto lines = data_lines(cmd_spectrum(r).files[0].content);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string cell;
    std::getline(row, cell, ',');
    std::getline(row, cell, ',');
    EXPECT_NEAR(std::stod(cell), 1.0, 1e-12);
    std::getline(row, cell, ',');
    EXPECT_NEAR(std::stod(cell), 1.0, 1e-12);
  }
}

TEST(Commands, AllSingularFails) {
  RunManifest r;
  r.command = "spectrum";
  r.model.gamma2 = 2.0;
  r.model.delay = DelaySpec::raw(0.0);
  r.pump = {PumpKind::Absolute, 1.0};
  r.grid.omega_min = 0.0;
  r.grid.omega_max = 0.0;
  r.grid.points = 1;
  try {
    cmd_spectrum(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularDelta);
    EXPECT_EQ(exit_code_for(e.code()), kExitDegenerate);
  }
}

TEST(Commands, StabilityReportsVerdict) {
  RunManifest r = preset("fig5-g3");
  r.command = "stability";
  r.output.clear();
  r.with_oracle = true;
  const CommandOutput o = run_command(r);
  EXPECT_NE(o.text.find("RESULT verdict=stable"), std::string::npos) << o.text;
  EXPECT_NE(o.text.find("oracle_re="), std::string::npos);
  EXPECT_TRUE(o.files.empty());
}

TEST(Commands, SingleCellMap) {
  RunManifest r = preset("fig2a-map");
  r.map.gamma1_tau_points = 1;
  r.map.alpha_points = 1;
  r.map.gamma1_tau_min = r.map.gamma1_tau_max = 2.0;
  r.map.alpha_min = r.map.alpha_max = 0.5;
  const CommandOutput o = cmd_stability_map(r);
  ASSERT_EQ(o.files.size(), 2u);
  const auto lines = data_lines(o.files[0].content);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1].substr(0, 6), "2,0.5,");
  EXPECT_EQ(o.files[1].path, with_suffix(r.output, "_boundary"));
}

TEST(Commands, MapEmptyGrid) {
  RunManifest r = preset("fig2b-map");
  r.map.alpha_points = 0;
  try {
    cmd_stability_map(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
}

TEST(Commands, DdeReportsClass) {
  RunManifest r = preset("fig5-g3");
  r.command = "dde";
  const CommandOutput o = run_command(r);
  EXPECT_NE(o.text.find("RESULT class=decaying"), std::string::npos) << o.text;
  EXPECT_EQ(data_lines(o.files[0].content)[0], "t,re_v1,im_v1,norm");
}

TEST(Commands, UnknownCommand) {
  RunManifest r = preset("fig3");
  r.command = "plot";
  EXPECT_THROW(run_command(r), Error);
}

TEST(Commands, WithSuffix) {
  EXPECT_EQ(with_suffix("a/b.csv", "_x"), "a/b_x.csv");
  EXPECT_EQ(with_suffix("a.d/b", "_x"), "a.d/b_x");
  EXPECT_EQ(with_suffix("b", "_x"), "b_x");
  EXPECT_EQ(with_suffix("", "_x"), "");
}

TEST(Commands, ExitCodes) {
  EXPECT_EQ(exit_code_for(ErrorCode::NegativeRate), kExitValidation);
  EXPECT_EQ(exit_code_for(ErrorCode::ConflictingDelaySpec), kExitValidation);
  EXPECT_EQ(exit_code_for(ErrorCode::GenericPhase), kExitValidation);
  EXPECT_EQ(exit_code_for(ErrorCode::UnknownKey), kExitValidation);
  EXPECT_EQ(exit_code_for(ErrorCode::NoRootFound), kExitDegenerate);
  EXPECT_EQ(exit_code_for(ErrorCode::DegenerateTrace), kExitDegenerate);
  EXPECT_EQ(exit_code_for(ErrorCode::IoError), kExitIo);
}

TEST(Mutation, FlippedDeltaBreaksBogoliubov) {
  EXPECT_TRUE(verify::check_bogoliubov(200).pass);
  const verify::CheckResult r = verify::check_bogoliubov(200, flipped_delta);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.measured, 1e-3);
}

TEST(Mutation, SwappedBetaBreaksSignAgreement) {
  const verify::SignGridOptions opt{8, 8, false};
  auto swapped = [](Interference c, double g1) { return c == Interference::Destructive ? -g1 : g1; };
  EXPECT_TRUE(verify::check_sign_agreement(Interference::Destructive, opt).pass);
  EXPECT_FALSE(verify::check_sign_agreement(Interference::Destructive, opt, swapped).pass);
  EXPECT_FALSE(verify::check_sign_agreement(Interference::Constructive, opt, swapped).pass);
}

TEST(Verify, TableFormat) {
  const std::string t = verify_table({{"a", true, 0, 0, "ok"}, {"b", false, 1, 0, "bad"}});
  EXPECT_EQ(t.substr(0, 5), "PASS ");
  EXPECT_NE(t.find("\nFAIL b"), std::string::npos);
}
