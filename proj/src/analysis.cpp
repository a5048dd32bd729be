#include "resodrive/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "resodrive/constants.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

namespace resodrive::analysis {

namespace {

using Complex = std::complex<double>;

// Parabola through three samples; returns (f_vertex, value_vertex), falling
// back to the middle sample when the fit is not convex or leaves the bracket.
std::pair<double, double> parabolic_min(double f1, double m1, double f2,
                                        double m2, double f3, double m3) {
  double denom = (f1 - f2) * (f1 - f3) * (f2 - f3);
  if (denom == 0.0) return {f2, m2};
  double a = (f3 * (m2 - m1) + f2 * (m1 - m3) + f1 * (m3 - m2)) / denom;
  double b =
      (f3 * f3 * (m1 - m2) + f2 * f2 * (m3 - m1) + f1 * f1 * (m2 - m3)) /
      denom;
  if (!(a > 0.0)) return {f2, m2};
  double fv = -b / (2.0 * a);
  if (!(fv > f1) || !(fv < f3)) return {f2, m2};
  double c = m2 - a * f2 * f2 - b * f2;
  double mv = a * fv * fv + b * fv + c;
  return {fv, std::max(mv, 0.0)};
}

std::vector<double> s11_magnitudes(const mna::SweepResult& sweep,
                                   std::size_t port_index) {
  const auto* nl = sweep.source();
  if (!nl || port_index >= nl->ports.size())
    throw InputError("sweep has no port with index " +
                     std::to_string(port_index));
  double z0 = nl->ports[port_index].reference_impedance;
  const auto& z = sweep.port_impedance[port_index];
  std::vector<double> mag(z.size());
  for (size_t i = 0; i < z.size(); ++i) mag[i] = std::abs(s11(z[i], z0));
  return mag;
}

// Phase of the port impedance, unwrapped so neighbouring samples never jump
// by more than pi.
std::vector<double> unwrapped_phase(const std::vector<Complex>& z) {
  std::vector<double> ph(z.size());
  if (z.empty()) return ph;
  double prev_raw = std::arg(z[0]);
  ph[0] = prev_raw;
  for (size_t i = 1; i < z.size(); ++i) {
    double raw = std::arg(z[i]);
    double d = raw - prev_raw;
    while (d > constants::pi) d -= 2.0 * constants::pi;
    while (d < -constants::pi) d += 2.0 * constants::pi;
    ph[i] = ph[i - 1] + d;
    prev_raw = raw;
  }
  return ph;
}

}  // namespace

std::complex<double> s11(std::complex<double> z_in, double z0) {
  if (!(z0 > 0.0) || !std::isfinite(z0))
    throw InputError("reference impedance must be positive and finite");
  // An effectively open port reflects everything.
  if (!std::isfinite(std::abs(z_in)) || std::abs(z_in) > 1e12)
    return {1.0, 0.0};
  if (z_in == std::complex<double>(-z0, 0.0))
    throw DomainViolation(
        "input impedance equals the negated reference impedance; the "
        "reflection coefficient has a pole there");
  return (z_in - z0) / (z_in + z0);
}

std::vector<Resonance> find_resonances(const mna::SweepResult& sweep,
                                       std::size_t port_index,
                                       double threshold) {
  auto mag = s11_magnitudes(sweep, port_index);
  const auto& f = sweep.frequencies;
  if (f.size() < 5)
    throw InputError("resonance search needs a sweep with at least 5 points");
  std::vector<Resonance> out;
  for (size_t i = 1; i + 1 < mag.size(); ++i) {
    if (!(mag[i] < threshold)) continue;
    if (!(mag[i] <= mag[i - 1] && mag[i] < mag[i + 1])) continue;
    // Skip plateau repeats: only the first sample of a flat run reports.
    if (i >= 2 && mag[i] == mag[i - 1] && mag[i - 1] == mag[i - 2]) continue;
    auto [fv, mv] = parabolic_min(f[i - 1], mag[i - 1], f[i], mag[i],
                                  f[i + 1], mag[i + 1]);
    Resonance r;
    r.frequency = fv;
    r.s11_magnitude = mv;
    r.grid_index = static_cast<int>(i);
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.frequency < b.frequency;
  });
  for (size_t i = 0; i < out.size(); ++i) {
    if (i == 0)
      out[i].kind_hint = Resonance::Kind::Lower;
    else if (i + 1 == out.size())
      out[i].kind_hint = Resonance::Kind::Upper;
    else
      out[i].kind_hint = Resonance::Kind::Other;
  }
  return out;
}

QEstimate q_factor(const mna::SweepResult& sweep, std::size_t port_index,
                   const Resonance& res) {
  const auto* nl = sweep.source();
  if (!nl || port_index >= nl->ports.size())
    throw InputError("sweep has no port with index " +
                     std::to_string(port_index));
  const auto& z = sweep.port_impedance[port_index];
  const auto& f = sweep.frequencies;
  const int i0 = res.grid_index;
  if (i0 <= 0 || i0 + 1 >= static_cast<int>(z.size()))
    throw UnderResolvedError("resonance sits at the edge of the sweep");

  auto ph = unwrapped_phase(z);
  const double limit = 45.0 * constants::pi / 180.0;
  const double ph0 = ph[i0];

  auto cross = [&](int dir) -> double {
    int i = i0;
    while (true) {
      int nxt = i + dir;
      if (nxt < 0 || nxt >= static_cast<int>(ph.size()))
        throw UnderResolvedError(
            "45-degree impedance-phase point lies outside the sweep around " +
            format_double(res.frequency) + " Hz");
      if (std::abs(ph[nxt] - ph0) >= limit) {
        double d1 = std::abs(ph[i] - ph0);
        double d2 = std::abs(ph[nxt] - ph0);
        double t = (limit - d1) / (d2 - d1);
        return f[i] + (f[nxt] - f[i]) * t;
      }
      i = nxt;
    }
  };

  QEstimate q;
  q.f_low = cross(-1);
  q.f_high = cross(+1);
  q.points_in_band = 0;
  for (double fi : f)
    if (fi > q.f_low && fi < q.f_high) ++q.points_in_band;
  if (q.points_in_band < 3)
    throw UnderResolvedError(
        "only " + std::to_string(q.points_in_band) +
        " sweep points inside the impedance-phase band; sweep is too coarse "
        "for a Q estimate");
  q.under_resolved = q.points_in_band < 5;
  q.q = res.frequency / (q.f_high - q.f_low);
  return q;
}

RefinedResonance refine_resonance(const netlist::Netlist& n,
                                  const mna::SweepResult& coarse,
                                  std::size_t port_index, const Resonance& res,
                                  int points, double threshold) {
  const auto& f = coarse.frequencies;
  int i0 = res.grid_index;
  double step = (i0 + 1 < static_cast<int>(f.size())) ? f[i0 + 1] - f[i0]
                                                      : f[i0] - f[i0 - 1];
  double half_span = 8.0 * step;

  auto plan = mna::make_plan(n);
  for (int attempt = 0; attempt < 8; ++attempt) {
    netlist::SweepSpec local;
    local.scale = netlist::SweepScale::Linear;
    local.points = points;
    local.f_start = std::max(res.frequency - half_span, res.frequency * 0.01);
    local.f_stop = res.frequency + half_span;
    auto sweep = mna::run_sweep(plan, netlist::sweep_frequencies(local));
    auto dips = find_resonances(sweep, port_index, threshold);
    if (dips.empty()) {
      // Window may have missed the dip; widen and retry.
      half_span *= 4.0;
      continue;
    }
    auto best = std::min_element(
        dips.begin(), dips.end(), [&](const auto& a, const auto& b) {
          return std::abs(a.frequency - res.frequency) <
                 std::abs(b.frequency - res.frequency);
        });
    Resonance refined = *best;
    refined.kind_hint = res.kind_hint;
    try {
      QEstimate q = q_factor(sweep, port_index, refined);
      if (q.under_resolved && attempt + 1 < 8) {
        half_span /= 4.0;  // densify: band holds 3-4 points, aim for more
        continue;
      }
      refined.q_factor = q.q;
      return {refined, q};
    } catch (const UnderResolvedError&) {
      // Either the band extends beyond this window (widen) or the window is
      // far wider than the band (grid too coarse inside: narrow).  Probe the
      // band edges to decide.
      auto ph = unwrapped_phase(sweep.port_impedance[port_index]);
      double swing =
          std::abs(ph.back() - ph[refined.grid_index]) +
          std::abs(ph.front() - ph[refined.grid_index]);
      if (swing < constants::pi / 2.0)
        half_span *= 4.0;
      else
        half_span /= 16.0;
    }
  }
  throw UnderResolvedError(
      "could not resolve the resonance near " + format_double(res.frequency) +
      " Hz after repeated local sweeps");
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

double phase_between(const mna::PhasorSolution& sol, std::string_view node_a,
                     std::string_view node_b) {
  auto va = sol.node_voltage(node_a);
  auto vb = sol.node_voltage(node_b);
  if (std::abs(va) <= 1e-15 || std::abs(vb) <= 1e-15)
    throw DomainViolation("phase between " + std::string(node_a) + " and " +
                          std::string(node_b) +
                          " is undefined: a voltage magnitude is below 1e-15 "
                          "V (degenerate magnitude)");
  double deg = (std::arg(va) - std::arg(vb)) * 180.0 / constants::pi;
  return wrap_degrees(deg);
}

PhaseReport phase_report(const mna::PhasorSolution& sol,
                         const std::vector<std::string>& nodes) {
  PhaseReport report;
  report.frequency = sol.frequency;
  for (size_t i = 0; i < nodes.size(); ++i) {
    for (size_t j = i + 1; j < nodes.size(); ++j) {
      auto va = sol.node_voltage(nodes[i]);
      auto vb = sol.node_voltage(nodes[j]);
      if (std::abs(va) <= 1e-15 || std::abs(vb) <= 1e-15) continue;
      PhasePair p;
      p.node_a = nodes[i];
      p.node_b = nodes[j];
      p.phase_deg =
          wrap_degrees((std::arg(va) - std::arg(vb)) * 180.0 / constants::pi);
      p.amplitude_ratio = std::abs(va) / std::abs(vb);
      report.pairs.push_back(std::move(p));
    }
  }
  return report;
}

}  // namespace resodrive::analysis
