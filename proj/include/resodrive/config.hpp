#pragma once

#include <string>

#include "resodrive/geometry.hpp"
#include "resodrive/montecarlo.hpp"
#include "resodrive/netlist.hpp"
#include "resodrive/trap/fields.hpp"

// Run configuration: one JSON document with sections
//   geometry   - resonator coils, interconnect wires, conductor material
//   circuit    - derivation stage, value overrides, lead dimensions
//   sweep      - AC sweep grid
//   montecarlo - perturbation settings
//   trap       - electrode geometry, drive, ion
// plus a top-level "output_dir".  Every key is validated; unknown keys are
// rejected with their JSON-pointer location.  All lengths are meters, all
// frequencies Hz (keys say so), voltages volts; ion mass and charge are given
// in atomic mass units and elementary charges.

namespace resodrive::config {

struct RunConfig {
  bool has_geometry = false;
  geometry::ResonatorGeometry resonator;
  geometry::WireRun wires;
  geometry::Material material;

  bool has_circuit = false;
  geometry::CircuitStage stage = geometry::CircuitStage::FullSystem;
  std::map<std::string, double> overrides;
  double resistance_eval_frequency = 30e6;
  double trap_lead_length = 0.10;
  double trap_lead_radius = 0.0005;

  bool has_sweep = false;
  netlist::SweepSpec sweep{netlist::SweepScale::Linear, 601, 30e6, 60e6};

  bool has_montecarlo = false;
  montecarlo::PerturbationSpec mc;

  bool has_trap = false;
  trap::TrapGeometry trap_geometry;
  trap::DriveConfig drive;
  trap::IonSpec ion;

  std::string output_dir = ".";

  geometry::CircuitOptions circuit_options() const;
};

// Parses and validates a config document.  `origin` names the source in
// diagnostics (file path or "<inline>").  Throws InputError with the JSON
// pointer of the offending key on schema violations.
RunConfig parse(const std::string& text, const std::string& origin);

// Reads the file and parses it; InputError when unreadable.
RunConfig load(const std::string& path);

}  // namespace resodrive::config
