#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "resodrive/netlist.hpp"

// Frequency-domain nodal analysis with explicit branch currents for
// inductors and sources, so mutual couplings stamp exactly and port/source
// currents come out of the solve directly.
//
// Phasor convention: a source "AC a phi" is the phasor a*e^{j*phi} with
// physical value a*cos(2*pi*f*t + phi); all reported voltages/currents are
// peak phasors under the same convention.

namespace resodrive::mna {

using Complex = std::complex<double>;

// Resolved index structure for one netlist: node and branch numbering plus
// value stamps, built once and reused across frequencies.
class StampPlan {
 public:
  explicit StampPlan(const netlist::Netlist& n);

  int dimension() const { return dim_; }
  // Unknown ordering: node voltages, then inductor currents, then source
  // currents.  Names are "v(node)", "i(Lname)", "i(Vname)".
  const std::vector<std::string>& unknown_names() const { return names_; }

  // Index lookups; -1 for ground, throws std::out_of_range for unknowns.
  int node_index(std::string_view node) const;
  int inductor_current_index(std::string_view name) const;
  int source_current_index(std::string_view name) const;

  // Fills A (dim x dim) and b (dim) for frequency f [Hz].
  void fill(double f, Eigen::MatrixXcd& A, Eigen::VectorXcd& b) const;

  const netlist::Netlist& source_netlist() const { return netlist_; }

 private:
  friend struct PlanAccess;
  netlist::Netlist netlist_;
  int n_nodes_ = 0;
  int dim_ = 0;
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> node_index_;
  std::map<std::string, int, std::less<>> inductor_index_;  // lowercase name
  std::map<std::string, int, std::less<>> source_index_;    // lowercase name

  struct Two { int a, b; double v; };
  struct Branch { int a, b, cur; double v; };
  struct Mutual { int cur_a, cur_b; double m; };
  struct Source { int a, b, cur; Complex v; };
  std::vector<Two> resistors_;
  std::vector<Two> capacitors_;
  std::vector<Branch> inductors_;
  std::vector<Mutual> mutuals_;
  std::vector<Source> sources_;
};

// One frequency point.  Voltages/currents are addressed by name so callers
// never deal with raw indices; the unknown vector is shared with the plan.
struct PhasorSolution {
  double frequency = 0.0;
  std::shared_ptr<const StampPlan> plan;
  Eigen::VectorXcd x;
  // Largest KCL current mismatch at any node, relative to the largest branch
  // current magnitude at that node.
  double max_kcl_residual = 0.0;

  Complex node_voltage(std::string_view node) const;
  // Current through inductor `name`, flowing from its first (dotted) node to
  // its second.
  Complex inductor_current(std::string_view name) const;
  // Current delivered by source `name` out of its + terminal into the
  // circuit.
  Complex source_delivered_current(std::string_view name) const;
};

struct SweepResult {
  std::vector<double> frequencies;
  std::vector<PhasorSolution> points;
  // Input impedance seen by each declared port, per frequency:
  // port_impedance[p][i] for port p at frequencies[i].
  std::vector<std::vector<Complex>> port_impedance;
  const netlist::Netlist* source() const {
    return points.empty() ? nullptr : &points.front().plan->source_netlist();
  }
};

std::shared_ptr<const StampPlan> make_plan(const netlist::Netlist& n);

// Solves at one frequency (f > 0).  Throws SingularSystemError naming the
// most suspect unknowns when the matrix has no usable factorization.
PhasorSolution solve_at(const std::shared_ptr<const StampPlan>& plan, double f);
PhasorSolution solve_at(const netlist::Netlist& n, double f);

// Runs the netlist's own .ac sweep (throws InputError when absent), or an
// explicit grid.
SweepResult run_sweep(const netlist::Netlist& n);
SweepResult run_sweep(const netlist::Netlist& n, const netlist::SweepSpec& spec);
SweepResult run_sweep(const std::shared_ptr<const StampPlan>& plan,
                      const std::vector<double>& frequencies);

// Port input impedance for one solved point: source phasor over delivered
// current.
Complex port_input_impedance(const PhasorSolution& sol,
                             const netlist::PortSpec& port);

}  // namespace resodrive::mna
