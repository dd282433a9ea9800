#pragma once

// Named scenarios for the published figures. Each has a checked-in copy under
// scenarios/<name>.scn.

#include <array>
#include <string>
#include <string_view>

#include "dposim/error.hpp"
#include "dposim/scenario.hpp"

namespace dposim {

inline constexpr std::array<std::string_view, 7> kPresetNames = {"fig3",     "fig4",      "fig5-g05", "fig5-g3",
                                                                  "fig5-g9", "fig2a-map", "fig2b-map"};

namespace detail {

// S = 0.5, g1 = g2 = 2, g3 = 0, |eps| = (1 - eta) g2 / 2, both delta values
inline RunManifest long_delay_threshold(const char* output) {
  RunManifest m;
  m.model.gamma1 = 2.0;
  m.model.gamma2 = 2.0;
  m.model.gamma3 = 0.0;
  m.model.delay = DelaySpec::scaled_micro(500'000, 0);
  m.pump = {PumpKind::AtThreshold, 0.0};
  m.command = "spectrum";
  m.output = output;
  m.compare_markovian = true;
  m.sweep_delta = true;
  return m;
}

// S = 0.1, delta = 1, g1 = 2.75, |eps| - g2/2 = 5
inline RunManifest short_delay_point_p(double gamma2, const char* output) {
  RunManifest m;
  m.model.gamma1 = 2.75;
  m.model.gamma2 = gamma2;
  m.model.gamma3 = 0.0;
  m.model.delay = DelaySpec::scaled_micro(100'000, 1);
  m.pump = {PumpKind::Excess, 5.0};
  m.command = "spectrum";
  m.output = output;
  return m;
}

inline RunManifest map_preset(Interference interference, const char* output) {
  RunManifest m;
  m.model.gamma1 = 1.0;
  m.model.delay = DelaySpec::scaled_micro(500'000, interference == Interference::Constructive ? 1 : 0);
  m.command = "stability-map";
  m.output = output;
  m.map.interference = interference;
  return m;
}

}  // namespace detail

/// Unresolved preset (pump spec kept symbolic); `resolve` fills eps_abs.
inline RunManifest preset(std::string_view name) {
  RunManifest m;
  if (name == "fig3") {
    m = detail::long_delay_threshold("fig3.csv");
  } else if (name == "fig4") {
    m = detail::long_delay_threshold("fig4.csv");
  } else if (name == "fig5-g05") {
    m = detail::short_delay_point_p(0.5, "fig5-g05.csv");
  } else if (name == "fig5-g3") {
    m = detail::short_delay_point_p(3.0, "fig5-g3.csv");
  } else if (name == "fig5-g9") {
    m = detail::short_delay_point_p(9.0, "fig5-g9.csv");
  } else if (name == "fig2a-map") {
    m = detail::map_preset(Interference::Constructive, "fig2a-map.csv");
  } else if (name == "fig2b-map") {
    m = detail::map_preset(Interference::Destructive, "fig2b-map.csv");
  } else {
    fail(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
  }
  resolve(m);
  return m;
}

}  // namespace dposim
