#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include "resodrive/mna.hpp"
#include "resodrive/netlist.hpp"

// Reflection-based resonance characterization: locate |S11| dips on a sweep,
// refine them, and extract quality factors from the +/-45 degree phase width
// of the port input impedance.

namespace resodrive::analysis {

// Voltage reflection coefficient of impedance z against real reference z0.
// An open port (|z_in| > 1e12 ohm) maps to exactly 1.  A short at the
// reflection pole (z_in == -z0) has no finite reflection coefficient and
// raises DomainViolation.
std::complex<double> s11(std::complex<double> z_in, double z0);

struct Resonance {
  double frequency = 0.0;      // parabolic-refined dip location [Hz]
  double s11_magnitude = 0.0;  // refined dip depth
  double q_factor = 0.0;       // 0 until a refinement pass fills it in
  int grid_index = 0;          // discrete minimum on the originating sweep
  enum class Kind { Lower, Upper, Other } kind_hint = Kind::Lower;
};

// Local minima of |S11| below `threshold` on the given port, ordered by
// frequency.  The first dip is labelled Lower and the last Upper (a single
// dip is Lower); anything between is Other.  Minima at the sweep edges are
// not reported.  Requires at least 5 sweep points.
std::vector<Resonance> find_resonances(const mna::SweepResult& sweep,
                                       std::size_t port_index = 0,
                                       double threshold = 0.9);

struct QEstimate {
  double q = 0.0;
  double f_low = 0.0;   // impedance phase -45 degrees from resonance [Hz]
  double f_high = 0.0;  // +45 degrees side
  int points_in_band = 0;
  bool under_resolved = false;  // fewer than 5 grid points inside the band
};

// Q = f_res / (f_high - f_low), where f_low/f_high are where the port input
// impedance phase departs by 45 degrees from its value at the dip.  Sets
// `under_resolved` when the grid has 3 or 4 points inside the band; throws
// UnderResolvedError when it has fewer than 3 or a crossing falls outside
// the sweep.
QEstimate q_factor(const mna::SweepResult& sweep, std::size_t port_index,
                   const Resonance& res);

struct RefinedResonance {
  Resonance resonance;  // q_factor field populated
  QEstimate q;
};

// Re-sweeps a narrow window around a coarse dip with a dense linear grid,
// adapting the window until the +/-45 degree band holds enough points, then
// reports the refined dip and its Q.
RefinedResonance refine_resonance(const netlist::Netlist& n,
                                  const mna::SweepResult& coarse,
                                  std::size_t port_index, const Resonance& res,
                                  int points = 2001, double threshold = 0.9);

// arg(V(a)) - arg(V(b)) in degrees, wrapped to (-180, 180].  Both magnitudes
// must exceed 1e-15 V; otherwise DomainViolation (degenerate magnitude).
double phase_between(const mna::PhasorSolution& sol, std::string_view node_a,
                     std::string_view node_b);

struct PhasePair {
  std::string node_a;
  std::string node_b;
  double phase_deg = 0.0;        // arg V(a) - arg V(b), wrapped
  double amplitude_ratio = 0.0;  // |V(a)| / |V(b)|
};

struct PhaseReport {
  double frequency = 0.0;
  std::vector<PhasePair> pairs;  // all unordered probe pairs (a before b)
};

// Pairwise phase/amplitude relations between the listed nodes at one solved
// frequency.  Pairs where either magnitude is degenerate (<= 1e-15 V) are
// omitted rather than reported with meaningless angles.
PhaseReport phase_report(const mna::PhasorSolution& sol,
                         const std::vector<std::string>& nodes);

double wrap_degrees(double deg);

}  // namespace resodrive::analysis
