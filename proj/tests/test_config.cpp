#include <cmath>
#include <string>

#include "doctest.h"
#include "resodrive/config.hpp"
#include "resodrive/errors.hpp"

#include "support/test_support.hpp"

using namespace resodrive;

namespace {

config::RunConfig parse_cfg(const std::string& text) {
  return config::parse(text, "<test>");
}

bool throws_with_pointer(const std::string& text, const std::string& needle) {
  try {
    (void)parse_cfg(text);
    return false;
  } catch (const InputError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
}

}  // namespace

TEST_CASE("empty config parses to defaults") {
  auto cfg = parse_cfg("{}");
  CHECK(!cfg.has_geometry);
  CHECK(!cfg.has_circuit);
  CHECK(!cfg.has_sweep);
  CHECK(!cfg.has_montecarlo);
  CHECK(!cfg.has_trap);
  CHECK(cfg.output_dir == ".");
  // Defaults carried by the structs.
  CHECK(cfg.resonator.coil_diameter == testsupport::rel(0.042, 1e-12));
  CHECK(cfg.trap_geometry.panels_per_electrode == 192);
  CHECK(cfg.drive.v_pp == testsupport::rel(400.0, 1e-12));
}

TEST_CASE("a trap section supplies the default drive frequency") {
  auto cfg = parse_cfg(R"({"trap": {}})");
  CHECK(cfg.has_trap);
  CHECK(cfg.drive.omega == testsupport::rel(2.0 * M_PI * 30e6, 1e-12));
}

TEST_CASE("full config round trip") {
  const std::string text = R"({
    "geometry": {
      "coil_diameter": 0.05,
      "turns": 6,
      "wires": {"length": 0.2, "radius": 0.001},
      "material": {"resistivity": 2.0e-8}
    },
    "circuit": {
      "stage": "biastee",
      "overrides": {"k_f": 0.08, "C": 5.0e-12},
      "resistance_eval_frequency_hz": 4.0e7,
      "trap_lead_length": 0.12
    },
    "sweep": {"scale": "dec", "points": 50, "f_start_hz": 1.0e6, "f_stop_hz": 1.0e8},
    "montecarlo": {
      "relative_bound": 0.05,
      "distribution": "normal",
      "samples": 64,
      "seed": 9,
      "components": ["L1", "C1"]
    },
    "trap": {
      "geometry": {"rod_radius": 2.5e-4, "panels_per_electrode": 96},
      "drive": {
        "scheme": "single_phase",
        "v_pp": 250.0,
        "frequency_hz": 2.5e7,
        "endcap_dc": 1.5,
        "electrode_dc_bias": [0.1, -0.1, 0.2, -0.2],
        "endcap_rf_amplitude": [0.5, 0.25]
      },
      "ion": {"mass_u": 40.0, "charge_e": 2.0}
    },
    "output_dir": "out"
  })";
  auto cfg = parse_cfg(text);
  CHECK(cfg.has_geometry);
  CHECK(cfg.resonator.coil_diameter == testsupport::rel(0.05, 1e-12));
  CHECK(cfg.resonator.turns == 6);
  CHECK(cfg.resonator.pitch == testsupport::rel(0.010, 1e-12));  // untouched default
  CHECK(cfg.wires.length == testsupport::rel(0.2, 1e-12));
  CHECK(cfg.wires.radius == testsupport::rel(0.001, 1e-12));
  CHECK(cfg.material.resistivity == testsupport::rel(2.0e-8, 1e-12));

  CHECK(cfg.has_circuit);
  CHECK(cfg.stage == geometry::CircuitStage::WithBiasTee);
  CHECK(cfg.overrides.at("k_f") == testsupport::rel(0.08, 1e-12));
  CHECK(cfg.overrides.at("C") == testsupport::rel(5.0e-12, 1e-12));
  CHECK(cfg.resistance_eval_frequency == testsupport::rel(4.0e7, 1e-12));
  CHECK(cfg.trap_lead_length == testsupport::rel(0.12, 1e-12));

  CHECK(cfg.has_sweep);
  CHECK(cfg.sweep.scale == netlist::SweepScale::Decade);
  CHECK(cfg.sweep.points == 50);
  CHECK(cfg.sweep.f_start == testsupport::rel(1e6, 1e-12));
  CHECK(cfg.sweep.f_stop == testsupport::rel(1e8, 1e-12));

  CHECK(cfg.has_montecarlo);
  CHECK(cfg.mc.relative_bound == testsupport::rel(0.05, 1e-12));
  CHECK(cfg.mc.distribution == montecarlo::Distribution::NormalTruncated);
  CHECK(cfg.mc.samples == 64);
  CHECK(cfg.mc.seed == 9);
  REQUIRE(cfg.mc.included_components.size() == 2);
  CHECK(cfg.mc.included_components[0] == "L1");

  CHECK(cfg.has_trap);
  CHECK(cfg.trap_geometry.rod_radius == testsupport::rel(2.5e-4, 1e-12));
  CHECK(cfg.trap_geometry.panels_per_electrode == 96);
  CHECK(cfg.drive.scheme == trap::DriveScheme::SinglePhase);
  CHECK(cfg.drive.v_pp == testsupport::rel(250.0, 1e-12));
  CHECK(cfg.drive.omega == testsupport::rel(2.0 * M_PI * 2.5e7, 1e-12));
  CHECK(cfg.drive.endcap_dc == testsupport::rel(1.5, 1e-12));
  CHECK(cfg.drive.electrode_dc_bias[2] == testsupport::rel(0.2, 1e-12));
  CHECK(cfg.drive.endcap_rf.real() == testsupport::rel(0.5, 1e-12));
  CHECK(cfg.drive.endcap_rf.imag() == testsupport::rel(0.25, 1e-12));
  CHECK(cfg.ion.mass == testsupport::rel(40.0 * 1.66053906660e-27, 1e-12));
  CHECK(cfg.ion.charge == testsupport::rel(2.0 * 1.602176634e-19, 1e-12));

  CHECK(cfg.output_dir == "out");

  // circuit_options() hands the parsed settings to derive_circuit.
  auto opts = cfg.circuit_options();
  CHECK(opts.stage == geometry::CircuitStage::WithBiasTee);
  CHECK(opts.overrides.at("k_f") == testsupport::rel(0.08, 1e-12));
  CHECK(opts.sweep.points == 50);
  CHECK(opts.resistance_eval_frequency == testsupport::rel(4.0e7, 1e-12));
  CHECK(opts.trap_lead_length == testsupport::rel(0.12, 1e-12));
}

TEST_CASE("endcap rf amplitude accepts a plain number") {
  auto cfg = parse_cfg(
      R"({"trap": {"drive": {"endcap_rf_amplitude": 0.75}}})");
  CHECK(cfg.drive.endcap_rf.real() == testsupport::rel(0.75, 1e-12));
  CHECK(cfg.drive.endcap_rf.imag() == 0.0);
}

TEST_CASE("unknown keys are rejected with their JSON pointer") {
  CHECK(throws_with_pointer(R"({"geometrie": {}})", "/geometrie"));
  CHECK(throws_with_pointer(R"({"geometry": {"coil_diam": 0.04}})",
                            "/geometry/coil_diam"));
  CHECK(throws_with_pointer(
      R"({"trap": {"drive": {"freq": 3.0e7}}})", "/trap/drive/freq"));
  CHECK(throws_with_pointer(
      R"({"sweep": {"scale": "lin", "points": 11, "f_start_hz": 1, "f_stop_hz": 2, "step": 3}})",
      "/sweep/step"));
}

TEST_CASE("type and range violations carry pointers") {
  CHECK(throws_with_pointer(R"({"geometry": {"coil_diameter": "wide"}})",
                            "/geometry/coil_diameter"));
  CHECK(throws_with_pointer(R"({"geometry": {"turns": 2.5}})",
                            "/geometry/turns"));
  CHECK(throws_with_pointer(R"({"sweep": {"scale": "log", "points": 11,
      "f_start_hz": 1.0e6, "f_stop_hz": 2.0e6}})", "/sweep/scale"));
  CHECK(throws_with_pointer(R"({"sweep": {"scale": "lin", "points": 1,
      "f_start_hz": 1.0e6, "f_stop_hz": 2.0e6}})", "/sweep/points"));
  CHECK(throws_with_pointer(R"({"sweep": {"scale": "lin", "points": 11,
      "f_start_hz": 2.0e6, "f_stop_hz": 1.0e6}})", "/sweep"));
  CHECK(throws_with_pointer(R"({"montecarlo": {"relative_bound": 1.0}})",
                            "/montecarlo/relative_bound"));
  CHECK(throws_with_pointer(R"({"montecarlo": {"distribution": "poisson"}})",
                            "/montecarlo/distribution"));
  CHECK(throws_with_pointer(R"({"montecarlo": {"samples": 0}})",
                            "/montecarlo/samples"));
  CHECK(throws_with_pointer(R"({"circuit": {"stage": "bare2"}})",
                            "/circuit/stage"));
  CHECK(throws_with_pointer(
      R"({"trap": {"drive": {"electrode_dc_bias": [1, 2, 3]}}})",
      "/trap/drive/electrode_dc_bias"));
  CHECK(throws_with_pointer(R"({"trap": {"ion": {"mass_u": -1}}})",
                            "/trap/ion/mass_u"));
}

TEST_CASE("malformed JSON names the origin") {
  try {
    (void)config::parse("{ not json", "badfile.json");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("badfile.json") != std::string::npos);
  }
}

TEST_CASE("load reads the bundled design config") {
  auto cfg = config::load(testsupport::corpus_path("design_config.json"));
  CHECK(cfg.has_geometry);
  CHECK(cfg.has_circuit);
  CHECK(cfg.overrides.at("k_f") == testsupport::rel(0.07, 1e-12));
  CHECK(cfg.has_sweep);
  CHECK(cfg.sweep.points == 4001);
  CHECK(cfg.has_montecarlo);
  CHECK(cfg.mc.samples == 1000);
  CHECK(cfg.mc.seed == 1);
  CHECK(cfg.mc.relative_bound == testsupport::rel(0.10, 1e-12));
  CHECK(cfg.has_trap);
  CHECK(cfg.trap_geometry.panels_per_electrode == 192);
  CHECK(cfg.ion.mass == testsupport::rel(171.0 * 1.66053906660e-27, 1e-12));
}

TEST_CASE("load of a missing file is an InputError") {
  CHECK_THROWS_AS((void)config::load("/nonexistent/path.json"), InputError);
}
