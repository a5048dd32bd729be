#include "resodrive/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

namespace resodrive::geometry {

namespace {

using constants::eps0;
using constants::mu0;
using constants::pi;

void require(bool cond, const std::string& msg) {
  if (!cond) throw DomainViolation(msg);
}

}  // namespace

double straight_wire_inductance(double length, double wire_radius) {
  require(length > 0.0 && wire_radius > 0.0,
          "wire length and radius must be positive");
  double ratio = 2.0 * length / wire_radius;
  require(std::log(ratio) > 1.0,
          "straight-wire inductance needs length >> radius (2*len/r > e)");
  return mu0 / (2.0 * pi) * length * (std::log(ratio) - 1.0);
}

double parallel_wire_capacitance(double length, double separation,
                                 double wire_radius) {
  require(length > 0.0 && wire_radius > 0.0,
          "wire length and radius must be positive");
  require(separation > 2.0 * wire_radius,
          "parallel wires must be separated by more than one diameter");
  return pi * eps0 * length / std::acosh(separation / (2.0 * wire_radius));
}

double wire_over_ground_capacitance(double length, double height,
                                    double wire_radius) {
  require(length > 0.0 && wire_radius > 0.0,
          "wire length and radius must be positive");
  require(height > wire_radius, "wire height must exceed the wire radius");
  return 2.0 * pi * eps0 * length / std::acosh(height / wire_radius);
}

double coil_self_capacitance(double coil_height, double coil_diameter) {
  require(coil_height > 0.0 && coil_diameter > 0.0,
          "coil height and diameter must be positive");
  double pf = 11.26 * coil_height + 8.0 * coil_diameter +
              27.0 * std::sqrt(coil_diameter * coil_diameter * coil_diameter /
                               coil_height);
  return pf * 1e-12;
}

double coil_shield_capacitance(double coil_height, double coil_diameter,
                               double shield_diameter) {
  require(coil_height > 0.0 && coil_diameter > 0.0,
          "coil height and diameter must be positive");
  require(shield_diameter > coil_diameter,
          "shield diameter must exceed the coil diameter");
  return 29.53 * coil_height / std::log(shield_diameter / coil_diameter) *
         1e-12;
}

double shielded_coil_inductance(double effective_diameter, double coil_height,
                                double pitch, double shield_diameter) {
  require(effective_diameter > 0.0 && coil_height > 0.0 && pitch > 0.0,
          "coil dimensions must be positive");
  require(shield_diameter > effective_diameter,
          "shield diameter must exceed the effective coil diameter");
  double d2 = effective_diameter * effective_diameter;
  double shield_factor =
      1.0 - (d2 / (shield_diameter * shield_diameter));
  return 0.984e-6 * d2 * coil_height / (pitch * pitch) * shield_factor;
}

double complete_elliptic_k(double k) {
  require(k >= 0.0 && k < 1.0, "elliptic modulus must lie in [0, 1)");
  double a = 1.0;
  double b = std::sqrt(1.0 - k * k);
  while (std::abs(a - b) > 1e-12 * a) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return pi / (2.0 * a);
}

double complete_elliptic_e(double k) {
  require(k >= 0.0 && k < 1.0, "elliptic modulus must lie in [0, 1)");
  double a = 1.0;
  double b = std::sqrt(1.0 - k * k);
  double c = k;
  double sum = 0.5 * c * c;
  double pow2 = 0.5;
  while (std::abs(c) > 1e-15) {
    c = 0.5 * (a - b);
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    pow2 *= 2.0;
    sum += pow2 * c * c;
  }
  double kk = pi / (2.0 * a);
  return kk * (1.0 - sum);
}

double loop_mutual_inductance(double radius_a, double radius_b,
                              double separation) {
  require(radius_a > 0.0 && radius_b > 0.0, "loop radii must be positive");
  require(separation >= 0.0, "loop separation must be non-negative");
  require(separation > 0.0 || radius_a != radius_b,
          "coincident identical loops have no finite mutual inductance");
  double denom = (radius_a + radius_b) * (radius_a + radius_b) +
                 separation * separation;
  double kappa = std::sqrt(4.0 * radius_a * radius_b / denom);
  double K = complete_elliptic_k(kappa);
  double E = complete_elliptic_e(kappa);
  return mu0 * std::sqrt(radius_a * radius_b) *
         ((2.0 / kappa - kappa) * K - (2.0 / kappa) * E);
}

double circular_loop_self_inductance(double loop_radius, double wire_radius) {
  require(loop_radius > 0.0 && wire_radius > 0.0, "radii must be positive");
  require(loop_radius > 4.0 * wire_radius,
          "loop radius must be large against the wire radius");
  return mu0 * loop_radius * (std::log(8.0 * loop_radius / wire_radius) - 2.0);
}

double ring_coupling_capacitance(double coil_diameter, double wire_thickness,
                                 double gap) {
  require(coil_diameter > 0.0 && wire_thickness > 0.0,
          "coil diameter and wire thickness must be positive");
  require(gap > 0.0, "ring gap must be positive");
  return eps0 * pi * coil_diameter * wire_thickness / gap;
}

double skin_depth(double frequency, const Material& mat) {
  require(frequency > 0.0, "frequency must be positive");
  require(mat.resistivity > 0.0 && mat.permeability > 0.0,
          "material constants must be positive");
  return std::sqrt(mat.resistivity / (pi * frequency * mat.permeability));
}

AcResistance ac_resistance(double length, double wire_radius, double frequency,
                           const Material& mat) {
  require(length > 0.0 && wire_radius > 0.0,
          "wire length and radius must be positive");
  double delta = skin_depth(frequency, mat);
  AcResistance r;
  if (delta < wire_radius / 3.0) {
    // Current confined to a thin shell of thickness delta.
    r.ohms = mat.resistivity * length / (2.0 * pi * wire_radius * delta);
    r.skin_limited = true;
  } else {
    r.ohms = mat.resistivity * length / (pi * wire_radius * wire_radius);
    r.skin_limited = false;
  }
  return r;
}

double helix_wire_length(const ResonatorGeometry& g) {
  require(g.turns > 0, "coil needs at least one turn");
  double per_turn = std::sqrt(pi * g.coil_diameter * pi * g.coil_diameter +
                              g.pitch * g.pitch);
  return g.turns * per_turn;
}

const std::vector<std::string> kOverridableSymbols = {
    "L",    "C",    "R",    "C_c",  "k",    "k_f",  "L_f",  "R_s",
    "V0",   "L_w",  "R_w",  "C_ww", "C_wg", "C_b",  "R_b",  "R_f",
    "C_f",  "C_con_g", "C_t", "C_tc", "L_t", "R_t"};

double DerivedCircuit::value(std::string_view symbol) const {
  for (const auto& p : provenance)
    if (p.symbol == symbol) return p.value;
  throw InputError("no derived value named '" + std::string(symbol) + "'");
}

namespace {

class ValueTable {
 public:
  ValueTable(const std::map<std::string, double>& overrides)
      : overrides_(overrides) {
    for (const auto& [key, _] : overrides_) {
      if (std::find(kOverridableSymbols.begin(), kOverridableSymbols.end(),
                    key) == kOverridableSymbols.end()) {
        std::string valid;
        for (const auto& s : kOverridableSymbols) {
          if (!valid.empty()) valid += ", ";
          valid += s;
        }
        throw InputError("unknown override '" + key +
                         "'; valid symbols: " + valid);
      }
    }
  }

  // Registers a value computed from geometry unless overridden.
  double formula(const std::string& sym, double v, const std::string& unit,
                 const std::string& detail) {
    return add(sym, v, unit, ProvenanceEntry::Origin::Formula, detail);
  }

  // Registers a bench-measured default unless overridden.
  double measured(const std::string& sym, double v, const std::string& unit,
                  const std::string& detail) {
    return add(sym, v, unit, ProvenanceEntry::Origin::MeasuredDefault, detail);
  }

  double required(const std::string& sym, const std::string& unit,
                  const std::string& why) {
    auto it = overrides_.find(sym);
    if (it == overrides_.end())
      throw InputError("override '" + sym + "' is required: " + why);
    entries_.push_back({sym, it->second, unit,
                        ProvenanceEntry::Origin::Override, "user override"});
    return it->second;
  }

  std::vector<ProvenanceEntry> take() { return std::move(entries_); }

 private:
  double add(const std::string& sym, double v, const std::string& unit,
             ProvenanceEntry::Origin origin, const std::string& detail) {
    auto it = overrides_.find(sym);
    if (it != overrides_.end()) {
      entries_.push_back({sym, it->second, unit,
                          ProvenanceEntry::Origin::Override, "user override"});
      return it->second;
    }
    entries_.push_back({sym, v, unit, origin, detail});
    return v;
  }

  const std::map<std::string, double>& overrides_;
  std::vector<ProvenanceEntry> entries_;
};

}  // namespace

DerivedCircuit derive_circuit(const ResonatorGeometry& geom,
                              const WireRun& wires, const Material& mat,
                              const CircuitOptions& options) {
  ValueTable t(options.overrides);
  const double f_eval = options.resistance_eval_frequency;
  const double b = geom.height();

  // Resonator arms.
  const double c_coil = coil_self_capacitance(b, geom.coil_diameter);
  const double c_shield = coil_shield_capacitance(b, geom.coil_diameter,
                                                  geom.shield_diameter);
  const double c_arm = t.formula(
      "C", c_coil + c_shield, "F",
      "coil stray " + format_fixed(c_coil * 1e12, 4) + " pF + shield " +
          format_fixed(c_shield * 1e12, 4) + " pF");
  const double eff_d = geom.coil_diameter - geom.wire_thickness;
  const double l_arm =
      t.formula("L",
                shielded_coil_inductance(eff_d, b, geom.pitch,
                                         geom.shield_diameter),
                "H", "shielded single-layer solenoid");
  const double helix_len = helix_wire_length(geom);
  auto r_coil =
      ac_resistance(helix_len, geom.wire_thickness / 2.0, f_eval, mat);
  const double r_arm = t.formula(
      "R", r_coil.ohms, "Ohm",
      std::string("skin-effect resistance of the unrolled winding") +
          (r_coil.skin_limited ? "" : " (DC regime fallback)"));
  const double c_c = t.formula(
      "C_c",
      ring_coupling_capacitance(geom.coil_diameter, geom.wire_thickness,
                                geom.coil_separation),
      "F", "facing end-ring plate capacitance");

  // Coil-to-coil coupling: no closed form pins this down, so the value is a
  // documented default with both loop normalizations reported alongside.
  CouplingReport coupling;
  const double loop_r = geom.coil_diameter / 2.0;
  coupling.mutual_single_loop =
      loop_mutual_inductance(loop_r, loop_r, geom.coil_separation);
  coupling.k_loop_normalized =
      coupling.mutual_single_loop /
      circular_loop_self_inductance(loop_r, geom.wire_thickness / 2.0);
  coupling.k_helix_normalized = coupling.mutual_single_loop / l_arm;
  const double k_used =
      t.measured("k", 0.03, "1",
                 "bench-fitted coupling; single-loop normalizations give " +
                     format_fixed(coupling.k_loop_normalized, 3) + " and " +
                     format_fixed(coupling.k_helix_normalized, 3));
  coupling.k_used = k_used;

  // Feed.
  const double l_f = t.measured("L_f", 500e-9, "H", "feed loop inductance");
  const double k_f = t.required(
      "k_f", "1",
      "feed-loop coupling depends on the adjustable loop position; set it "
      "explicitly (it is tuned for impedance match, not derived)");
  const double r_s = t.measured("R_s", 50.0, "Ohm", "source impedance");
  const double v0 = t.measured("V0", 1.0, "V", "drive amplitude");

  // Interconnect wires.
  const double l_w = t.formula("L_w",
                               straight_wire_inductance(wires.length,
                                                        wires.radius),
                               "H", "straight round wire");
  auto r_wire = ac_resistance(wires.length, wires.radius, f_eval, mat);
  const double r_w = t.formula(
      "R_w", r_wire.ohms, "Ohm",
      std::string("skin-effect wire resistance") +
          (r_wire.skin_limited ? "" : " (DC regime fallback)"));
  const double c_ww = t.formula(
      "C_ww",
      parallel_wire_capacitance(wires.length, wires.separation, wires.radius),
      "F", "parallel-wire capacitance");
  const double c_wg = t.formula(
      "C_wg",
      wire_over_ground_capacitance(wires.length, wires.height, wires.radius),
      "F", "wire-over-ground capacitance");

  // Bias tees (bench-measured parts).
  const double c_b = t.measured("C_b", 3.3e-9, "F", "DC-block capacitor");
  const double r_b = t.measured("R_b", 10e6, "Ohm", "bias isolation resistor");
  const double r_f = t.measured("R_f", 560e3, "Ohm", "bias filter resistor");
  const double c_f = t.measured("C_f", 220e-12, "F", "bias filter capacitor");
  const double c_con_g =
      t.measured("C_con_g", 1e-12, "F", "connector-to-ground parasitic");

  // Trap side.
  const double c_t = t.measured("C_t", 1.2e-12, "F",
                                "neighbouring-electrode capacitance");
  const double c_tc = t.measured("C_tc", 1.9e-12, "F",
                                 "electrode-to-mount capacitance");
  const double l_t =
      t.formula("L_t",
                straight_wire_inductance(options.trap_lead_length,
                                         options.trap_lead_radius),
                "H", "in-vacuum electrode lead");
  auto r_lead = ac_resistance(options.trap_lead_length,
                              options.trap_lead_radius, f_eval, mat);
  const double r_t = t.formula(
      "R_t", r_lead.ohms, "Ohm",
      std::string("in-vacuum lead resistance") +
          (r_lead.skin_limited ? "" : " (DC regime fallback)"));

  // Netlist assembly.  Arm B's winding is reversed relative to arm A (its
  // dotted terminal faces the output) so that with k > 0 the out-of-phase
  // mode is the low-frequency one.
  using netlist::Netlist;
  Netlist n;
  n.title = "derived two-phase resonator";
  auto comp = [&n](netlist::ComponentKind kind, const std::string& name,
                   const std::string& a, const std::string& bnode, double v) {
    n.components.push_back({kind, name, a, bnode, v, 0});
  };
  const auto R = netlist::ComponentKind::Resistor;
  const auto L = netlist::ComponentKind::Inductor;
  const auto C = netlist::ComponentKind::Capacitor;

  n.sources.push_back({"Vs", "drv", "0", v0, 0.0, 0});
  comp(L, "Lf", "drv", "0", l_f);
  comp(L, "L1", "0", "a1", l_arm);
  comp(R, "R1", "a1", "N1", r_arm);
  comp(L, "L2", "a2", "0", l_arm);
  comp(R, "R2", "a2", "N2", r_arm);
  comp(C, "C1", "N1", "0", c_arm);
  comp(C, "C2", "N2", "0", c_arm);
  comp(C, "Cc", "N1", "N2", c_c);
  n.couplings.push_back({"K1", "L1", "L2", k_used, 0});
  n.couplings.push_back({"Kf", "Lf", "L1", k_f, 0});
  n.probes = {"N1", "N2"};

  if (options.stage != CircuitStage::BareResonator) {
    for (int p = 1; p <= 2; ++p) {
      std::string np = "N" + std::to_string(p);
      std::string up = "u" + std::to_string(p);
      std::string wp = "W" + std::to_string(p);
      comp(L, "Lw" + std::to_string(p), np, up, l_w);
      comp(R, "Rw" + std::to_string(p), up, wp, r_w);
      comp(C, "Cwg" + std::to_string(p), wp, "0", c_wg);
    }
    comp(C, "Cww", "W1", "W2", c_ww);
    for (int e = 1; e <= 4; ++e) {
      std::string se = std::to_string(e);
      // Electrodes 1 and 3 hang off phase 1; 2 and 4 off phase 2.
      std::string wp = (e % 2 == 1) ? "W1" : "W2";
      comp(C, "Cb" + se, wp, "t" + se, c_b);
      comp(C, "Ccon" + se, "t" + se, "0", c_con_g);
      comp(R, "Rb" + se, "t" + se, "d" + se, r_b);
      comp(C, "Cf" + se, "d" + se, "0", c_f);
      comp(R, "Rf" + se, "d" + se, "0", r_f);
    }
  }
  if (options.stage == CircuitStage::FullSystem) {
    for (int e = 1; e <= 4; ++e) {
      std::string se = std::to_string(e);
      comp(L, "Lt" + se, "t" + se, "m" + se, l_t);
      comp(R, "Rt" + se, "m" + se, "V" + se, r_t);
      comp(C, "Ctc" + se, "V" + se, "0", c_tc);
    }
    comp(C, "Ct12", "V1", "V2", c_t);
    comp(C, "Ct23", "V2", "V3", c_t);
    comp(C, "Ct34", "V3", "V4", c_t);
    comp(C, "Ct41", "V4", "V1", c_t);
    n.probes = {"N1", "N2", "V1", "V2", "V3", "V4"};
  }

  n.sweep = options.sweep;
  n.ports.push_back({"Vs", r_s, 0});

  DerivedCircuit out;
  out.netlist = std::move(n);
  out.provenance = t.take();
  out.coupling = coupling;

  auto diags = netlist::validate(out.netlist);
  for (const auto& d : diags) {
    if (d.severity == netlist::Diagnostic::Severity::Error)
      throw InputError("derived netlist failed validation: " + d.message);
  }
  return out;
}

}  // namespace resodrive::geometry
