#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Netlist dialect for linear AC circuits.
//
//   * comment lines start with '*'; '+' continues the previous line
//   * R/L/C:   Rname node_a node_b value
//   * V:       Vname node_plus node_minus AC amplitude [phase_deg]
//   * K:       Kname Lname1 Lname2 k          (mutual coupling, 0 < |k| < 1)
//   * .title any text
//   * .ac lin N f_start f_stop     N linearly spaced points, endpoints included
//   * .ac dec N f_start f_stop     N points per decade, log spaced, endpoints
//                                  included
//   * .port Vname Z0               declares a source as the reflection port
//   * .probe v(node) [v(node)...]  nodes whose voltage is reported by sweeps
//   * .end                         optional; parsing stops here
//
// Values accept engineering suffixes f p n u m k meg g (case-insensitive;
// 'm' is always milli, mega is spelled 'meg').  Node "0" or "gnd" (any case)
// is ground; other node names are case-sensitive.  Component names are
// case-insensitive for duplicate detection but preserved as written.
//
// Inductor orientation matters when mutual couplings are present: the first
// node of an L line is the dotted terminal, and a positive k means flux from
// current entering the two dotted terminals adds.

namespace resodrive::netlist {

enum class ComponentKind { Resistor, Inductor, Capacitor };

struct Component {
  ComponentKind kind;
  std::string name;
  std::string node_a;  // dotted terminal for inductors
  std::string node_b;
  double value = 0.0;
  int line = 0;
};

struct MutualCoupling {
  std::string name;
  std::string inductor_a;
  std::string inductor_b;
  double k = 0.0;
  int line = 0;
};

struct AcSource {
  std::string name;
  std::string node_plus;
  std::string node_minus;
  double amplitude = 0.0;  // peak volts
  double phase_deg = 0.0;
  int line = 0;
};

enum class SweepScale { Linear, Decade };

struct SweepSpec {
  SweepScale scale = SweepScale::Linear;
  int points = 0;  // total points (Linear) or points per decade (Decade)
  double f_start = 0.0;
  double f_stop = 0.0;
};

struct PortSpec {
  std::string source_name;
  double reference_impedance = 50.0;
  int line = 0;
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  int line = 0;  // 0 when not tied to a specific line
  std::string message;
};

struct Netlist {
  std::string title;
  std::vector<Component> components;
  std::vector<MutualCoupling> couplings;
  std::vector<AcSource> sources;
  std::optional<SweepSpec> sweep;
  std::vector<PortSpec> ports;
  std::vector<std::string> probes;  // node names

  const Component* find_component(std::string_view name) const;
  const AcSource* find_source(std::string_view name) const;
  // Sorted list of distinct non-ground node names.
  std::vector<std::string> node_names() const;
  bool has_node(std::string_view name) const;
};

struct ParseResult {
  std::optional<Netlist> netlist;  // engaged only when there are no errors
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return netlist.has_value(); }
};

// Parses and validates; on any error the netlist is absent and diagnostics
// say what failed and on which line.  Warnings may accompany a success.
ParseResult parse(std::string_view text);

// Structural checks (duplicate names, dangling references, connectivity).
// parse() already runs this; exposed for programmatically built netlists.
std::vector<Diagnostic> validate(const Netlist& n);

// Canonical text form; parse(serialize(n)) reproduces n exactly.
std::string serialize(const Netlist& n);

// Number with optional engineering suffix; nullopt if malformed.
std::optional<double> parse_value(std::string_view token);

// Frequency grid for a sweep: Linear -> `points` equally spaced values;
// Decade -> points-per-decade log-spaced, both endpoints always included.
std::vector<double> sweep_frequencies(const SweepSpec& s);

bool is_ground(std::string_view node);

}  // namespace resodrive::netlist
