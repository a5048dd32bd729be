#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "resodrive/constants.hpp"
#include "resodrive/netlist.hpp"

// Closed-form electrical parameters of a shielded two-coil resonator, its
// interconnects, and the electrode feed network, assembled into a simulation
// netlist with per-value provenance.

namespace resodrive::geometry {

struct Material {
  double resistivity = constants::copper_resistivity;  // [Ohm m]
  double permeability = constants::mu0;                // [H/m]
};

// Self-inductance of a straight round wire, length >> radius.
double straight_wire_inductance(double length, double wire_radius);

// Capacitance between two parallel wires (center separation d).
double parallel_wire_capacitance(double length, double separation,
                                 double wire_radius);

// Capacitance of a wire at height h over a ground plane.
double wire_over_ground_capacitance(double length, double height,
                                    double wire_radius);

// Stray capacitance across a single-layer air coil (empirical fit; height
// and diameter in meters, result in farads).
double coil_self_capacitance(double coil_height, double coil_diameter);

// Capacitance from a coil to the surrounding cylindrical shield (empirical
// fit; meters in, farads out).
double coil_shield_capacitance(double coil_height, double coil_diameter,
                               double shield_diameter);

// Inductance of a single-layer solenoid inside a closed shield; the winding
// is taken at the effective diameter (coil diameter minus one conductor
// thickness).
double shielded_coil_inductance(double effective_diameter, double coil_height,
                                double pitch, double shield_diameter);

// Mutual inductance of two coaxial circular loops (radii a, b, axial
// separation x) via complete elliptic integrals.
double loop_mutual_inductance(double radius_a, double radius_b,
                              double separation);

// Self-inductance of a thin circular wire loop.
double circular_loop_self_inductance(double loop_radius, double wire_radius);

// Capacitance between two facing coil-end rings, approximated as a
// parallel-plate annulus of width equal to the conductor thickness.
double ring_coupling_capacitance(double coil_diameter, double wire_thickness,
                                 double gap);

double skin_depth(double frequency, const Material& mat);

struct AcResistance {
  double ohms = 0.0;
  // True when the skin depth is small against the conductor radius and the
  // thin-shell expression applies; false means the DC value was used.
  bool skin_limited = true;
};
AcResistance ac_resistance(double length, double wire_radius, double frequency,
                           const Material& mat);

// Complete elliptic integrals of modulus k, AGM iteration, 1e-12 relative.
double complete_elliptic_k(double k);
double complete_elliptic_e(double k);

struct ResonatorGeometry {
  double coil_diameter = 0.042;    // D_c, winding center-to-center [m]
  double wire_thickness = 0.005;   // conductor diameter [m]
  double pitch = 0.010;            // axial advance per turn [m]
  int turns = 8;
  double coil_height = 0.0;        // 0 -> turns * pitch [m]
  double shield_diameter = 0.103;  // shield inner diameter [m]
  double shield_length = 0.20;     // [m]
  double coil_separation = 0.03;   // gap between the two coils [m]

  double height() const {
    return coil_height > 0.0 ? coil_height : turns * pitch;
  }
};

struct WireRun {
  double length = 0.15;     // each interconnect wire [m]
  double radius = 0.0005;   // [m]
  double separation = 0.02; // between the two wires [m]
  double height = 0.08;     // above the ground plane [m]
};

// Unrolled conductor length of the helical winding.
double helix_wire_length(const ResonatorGeometry& g);

enum class CircuitStage { BareResonator, WithBiasTee, FullSystem };

struct ProvenanceEntry {
  std::string symbol;
  double value = 0.0;
  std::string unit;
  enum class Origin { Formula, MeasuredDefault, Override } origin =
      Origin::Formula;
  std::string detail;
};

// The coil-to-coil coupling coefficient is not well defined by a single
// closed form; both normalizations of the coaxial-loop mutual are reported
// next to the value actually stamped.
struct CouplingReport {
  double mutual_single_loop = 0.0;   // M of equivalent single-turn loops [H]
  double k_loop_normalized = 0.0;    // M / L(single loop)
  double k_helix_normalized = 0.0;   // M / L(full winding)
  double k_used = 0.0;
};

struct DerivedCircuit {
  netlist::Netlist netlist;
  std::vector<ProvenanceEntry> provenance;
  CouplingReport coupling;
  // Value of a provenance symbol; throws InputError for unknown symbols.
  double value(std::string_view symbol) const;
};

struct CircuitOptions {
  CircuitStage stage = CircuitStage::FullSystem;
  // Symbol -> value replacements; see kOverridableSymbols.  "k_f" (feed
  // coupling) has no formula or measured default and must be provided.
  std::map<std::string, double> overrides;
  netlist::SweepSpec sweep{netlist::SweepScale::Linear, 601, 30e6, 60e6};
  // Frequency at which skin-effect resistances are evaluated.
  double resistance_eval_frequency = 30e6;
  // In-vacuum electrode lead dimensions (for L_t, R_t).
  double trap_lead_length = 0.10;
  double trap_lead_radius = 0.0005;
};

extern const std::vector<std::string> kOverridableSymbols;

DerivedCircuit derive_circuit(const ResonatorGeometry& geom,
                              const WireRun& wires, const Material& mat,
                              const CircuitOptions& options);

}  // namespace resodrive::geometry
