#include "resodrive/mna.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "resodrive/constants.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

namespace resodrive::mna {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

constexpr Complex j{0.0, 1.0};

}  // namespace

StampPlan::StampPlan(const netlist::Netlist& n) : netlist_(n) {
  auto nodes = netlist_.node_names();  // sorted, ground excluded
  n_nodes_ = static_cast<int>(nodes.size());
  for (int i = 0; i < n_nodes_; ++i) {
    node_index_[nodes[i]] = i;
    names_.push_back("v(" + nodes[i] + ")");
  }
  int next = n_nodes_;
  for (const auto& c : netlist_.components) {
    if (c.kind != netlist::ComponentKind::Inductor) continue;
    inductor_index_[lower(c.name)] = next;
    names_.push_back("i(" + c.name + ")");
    ++next;
  }
  for (const auto& s : netlist_.sources) {
    source_index_[lower(s.name)] = next;
    names_.push_back("i(" + s.name + ")");
    ++next;
  }
  dim_ = next;

  auto idx = [this](const std::string& node) {
    return netlist::is_ground(node) ? -1 : node_index_.at(node);
  };
  for (const auto& c : netlist_.components) {
    switch (c.kind) {
      case netlist::ComponentKind::Resistor:
        resistors_.push_back({idx(c.node_a), idx(c.node_b), c.value});
        break;
      case netlist::ComponentKind::Capacitor:
        capacitors_.push_back({idx(c.node_a), idx(c.node_b), c.value});
        break;
      case netlist::ComponentKind::Inductor:
        inductors_.push_back({idx(c.node_a), idx(c.node_b),
                              inductor_index_.at(lower(c.name)), c.value});
        break;
    }
  }
  for (const auto& k : netlist_.couplings) {
    const auto* la = netlist_.find_component(k.inductor_a);
    const auto* lb = netlist_.find_component(k.inductor_b);
    double m = k.k * std::sqrt(la->value * lb->value);
    mutuals_.push_back({inductor_index_.at(lower(la->name)),
                        inductor_index_.at(lower(lb->name)), m});
  }
  for (const auto& s : netlist_.sources) {
    double ph = s.phase_deg * constants::pi / 180.0;
    Complex v = s.amplitude * Complex{std::cos(ph), std::sin(ph)};
    sources_.push_back({idx(s.node_plus), idx(s.node_minus),
                        source_index_.at(lower(s.name)), v});
  }
}

int StampPlan::node_index(std::string_view node) const {
  if (netlist::is_ground(node)) return -1;
  return node_index_.at(std::string(node));
}

int StampPlan::inductor_current_index(std::string_view name) const {
  return inductor_index_.at(lower(name));
}

int StampPlan::source_current_index(std::string_view name) const {
  return source_index_.at(lower(name));
}

void StampPlan::fill(double f, Eigen::MatrixXcd& A, Eigen::VectorXcd& b) const {
  const double w = constants::two_pi * f;
  A.setZero(dim_, dim_);
  b.setZero(dim_);

  auto stamp_admittance = [&A](int a, int bnode, Complex y) {
    if (a >= 0) A(a, a) += y;
    if (bnode >= 0) A(bnode, bnode) += y;
    if (a >= 0 && bnode >= 0) {
      A(a, bnode) -= y;
      A(bnode, a) -= y;
    }
  };

  for (const auto& r : resistors_) stamp_admittance(r.a, r.b, 1.0 / r.v);
  for (const auto& c : capacitors_) stamp_admittance(c.a, c.b, j * w * c.v);

  // Inductor branch current i flows node_a -> node_b; the branch equation is
  // V(a) - V(b) = jw * (L*i + sum_m M*i_other).
  for (const auto& l : inductors_) {
    if (l.a >= 0) {
      A(l.a, l.cur) += 1.0;
      A(l.cur, l.a) += 1.0;
    }
    if (l.b >= 0) {
      A(l.b, l.cur) -= 1.0;
      A(l.cur, l.b) -= 1.0;
    }
    A(l.cur, l.cur) -= j * w * l.v;
  }
  for (const auto& m : mutuals_) {
    A(m.cur_a, m.cur_b) -= j * w * m.m;
    A(m.cur_b, m.cur_a) -= j * w * m.m;
  }

  // Source branch current flows from + through the element to -, so it
  // leaves the + node.
  for (const auto& s : sources_) {
    if (s.a >= 0) {
      A(s.a, s.cur) += 1.0;
      A(s.cur, s.a) += 1.0;
    }
    if (s.b >= 0) {
      A(s.b, s.cur) -= 1.0;
      A(s.cur, s.b) -= 1.0;
    }
    b(s.cur) = s.v;
  }
}

// KCL residual: for each node accumulate signed branch currents and track
// the largest branch magnitude, then take the worst relative mismatch.
struct PlanAccess {
  static double kcl_residual(const StampPlan& plan, double f,
                             const Eigen::VectorXcd& x) {
    const double w = constants::two_pi * f;
    const int n = plan.n_nodes_;
    Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXd peak = Eigen::VectorXd::Zero(n);
    auto volt = [&](int i) { return i >= 0 ? x(i) : Complex{0.0, 0.0}; };
    auto add = [&](int node, Complex current) {
      if (node < 0) return;
      sum(node) += current;
      peak(node) = std::max(peak(node), std::abs(current));
    };
    for (const auto& r : plan.resistors_) {
      Complex i = (volt(r.a) - volt(r.b)) / r.v;
      add(r.a, i);
      add(r.b, -i);
    }
    for (const auto& c : plan.capacitors_) {
      Complex i = j * w * c.v * (volt(c.a) - volt(c.b));
      add(c.a, i);
      add(c.b, -i);
    }
    for (const auto& l : plan.inductors_) {
      add(l.a, x(l.cur));
      add(l.b, -x(l.cur));
    }
    for (const auto& s : plan.sources_) {
      add(s.a, x(s.cur));
      add(s.b, -x(s.cur));
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      if (peak(i) > 0.0) worst = std::max(worst, std::abs(sum(i)) / peak(i));
    }
    return worst;
  }
};

Complex PhasorSolution::node_voltage(std::string_view node) const {
  int i = plan->node_index(node);
  return i < 0 ? Complex{0.0, 0.0} : x(i);
}

Complex PhasorSolution::inductor_current(std::string_view name) const {
  return x(plan->inductor_current_index(name));
}

Complex PhasorSolution::source_delivered_current(std::string_view name) const {
  // The branch unknown flows from + into the source; delivered current into
  // the external circuit is its negative.
  return -x(plan->source_current_index(name));
}

std::shared_ptr<const StampPlan> make_plan(const netlist::Netlist& n) {
  return std::make_shared<StampPlan>(n);
}

namespace {

PhasorSolution solve_filled(const std::shared_ptr<const StampPlan>& plan,
                            double f, Eigen::MatrixXcd& A,
                            Eigen::VectorXcd& b) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const auto& diag = lu.matrixLU().diagonal();
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < diag.size(); ++i) {
    double m = std::abs(diag(i));
    dmax = std::max(dmax, m);
    dmin = std::min(dmin, m);
  }
  auto singular = [&](const std::string& why) -> SingularSystemError {
    std::vector<std::pair<double, int>> pivots;
    for (int i = 0; i < diag.size(); ++i) pivots.push_back({std::abs(diag(i)), i});
    std::sort(pivots.begin(), pivots.end());
    std::vector<std::string> suspects;
    std::string joined;
    for (size_t i = 0; i < pivots.size() && i < 3; ++i) {
      suspects.push_back(plan->unknown_names()[pivots[i].second]);
      if (i) joined += ", ";
      joined += suspects.back();
    }
    return SingularSystemError(
        "system matrix is singular at f = " + format_double(f) + " Hz (" +
            why + "); most suspect unknowns: " + joined,
        f, suspects);
  };
  if (!(dmin > 0.0) || dmin < dmax * 1e-300) throw singular("zero pivot");

  Eigen::VectorXcd x = lu.solve(b);
  if (!x.allFinite()) throw singular("non-finite solution");
  const double bnorm = b.norm();
  // Iterative refinement until the residual is negligible against the source
  // vector or has reached the floating-point floor eps*(|A||x|+|b|).
  for (int pass = 0; pass < 3; ++pass) {
    Eigen::VectorXcd r = b - A * x;
    double scale = bnorm + A.norm() * x.norm();
    if (r.norm() <= 1e-12 * bnorm || r.norm() <= 4e-16 * scale) break;
    x += lu.solve(r);
    if (!x.allFinite()) throw singular("non-finite solution");
  }

  double rnorm = (b - A * x).norm();
  double scale = bnorm + A.norm() * x.norm();
  if (bnorm > 0.0 && rnorm > 1e-10 * bnorm && rnorm > 1e-12 * scale)
    throw singular("residual did not converge");

  PhasorSolution sol;
  sol.frequency = f;
  sol.plan = plan;
  sol.x = std::move(x);
  sol.max_kcl_residual = PlanAccess::kcl_residual(*plan, f, sol.x);
  return sol;
}

}  // namespace

PhasorSolution solve_at(const std::shared_ptr<const StampPlan>& plan,
                        double f) {
  if (!(f > 0.0))
    throw DomainViolation("analysis frequency must be positive, got " +
                          format_double(f));
  Eigen::MatrixXcd A;
  Eigen::VectorXcd b;
  plan->fill(f, A, b);
  return solve_filled(plan, f, A, b);
}

PhasorSolution solve_at(const netlist::Netlist& n, double f) {
  return solve_at(make_plan(n), f);
}

Complex port_input_impedance(const PhasorSolution& sol,
                             const netlist::PortSpec& port) {
  const auto* src = sol.plan->source_netlist().find_source(port.source_name);
  if (!src) throw InputError("port references unknown source '" +
                             port.source_name + "'");
  double ph = src->phase_deg * constants::pi / 180.0;
  Complex v = src->amplitude * Complex{std::cos(ph), std::sin(ph)};
  Complex i = sol.source_delivered_current(src->name);
  if (std::abs(i) == 0.0)
    return Complex{std::numeric_limits<double>::infinity(), 0.0};
  return v / i;
}

SweepResult run_sweep(const std::shared_ptr<const StampPlan>& plan,
                      const std::vector<double>& frequencies) {
  SweepResult out;
  out.frequencies = frequencies;
  out.points.reserve(frequencies.size());
  const auto& ports = plan->source_netlist().ports;
  out.port_impedance.assign(ports.size(), {});
  for (auto& v : out.port_impedance) v.reserve(frequencies.size());

  Eigen::MatrixXcd A;
  Eigen::VectorXcd b;
  for (double f : frequencies) {
    if (!(f > 0.0))
      throw DomainViolation("sweep frequency must be positive, got " +
                            format_double(f));
    plan->fill(f, A, b);
    PhasorSolution sol = solve_filled(plan, f, A, b);
    for (size_t p = 0; p < ports.size(); ++p)
      out.port_impedance[p].push_back(port_input_impedance(sol, ports[p]));
    out.points.push_back(std::move(sol));
  }
  return out;
}

SweepResult run_sweep(const netlist::Netlist& n,
                      const netlist::SweepSpec& spec) {
  return run_sweep(make_plan(n), netlist::sweep_frequencies(spec));
}

SweepResult run_sweep(const netlist::Netlist& n) {
  if (!n.sweep)
    throw InputError("netlist has no .ac directive; nothing to sweep");
  return run_sweep(n, *n.sweep);
}

}  // namespace resodrive::mna
