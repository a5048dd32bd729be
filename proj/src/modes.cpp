#include "resodrive/modes.hpp"

#include <cmath>

#include "resodrive/constants.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

namespace resodrive::modes {

namespace {

void check(const CoupledParams& p) {
  if (!(p.inductance > 0.0))
    throw DomainViolation("arm inductance must be positive");
  if (!(p.capacitance > 0.0))
    throw DomainViolation("arm capacitance must be positive");
  if (!(std::abs(p.mutual) < p.inductance))
    throw DomainViolation("|M| must be smaller than L, got M = " +
                          format_double(p.mutual));
  if (p.coupling_cap < 0.0)
    throw DomainViolation("coupling capacitance must be non-negative");
  if (!(p.resistance > 0.0))
    throw DomainViolation("arm resistance must be positive");
}

}  // namespace

ModePair mode_pair(const CoupledParams& p) {
  check(p);
  const double lm = p.inductance - p.mutual;
  const double lp = p.inductance + p.mutual;
  const double ca = 2.0 * p.coupling_cap + p.capacitance;
  ModePair m;
  m.omega_sym = 1.0 / std::sqrt(lm * p.capacitance);
  m.omega_antisym = 1.0 / std::sqrt(lp * ca);
  m.q_sym = std::sqrt(lm / p.capacitance) / p.resistance;
  m.q_antisym = std::sqrt(lp / ca) / p.resistance;
  m.gamma_sym = m.omega_sym / m.q_sym;
  m.gamma_antisym = m.omega_antisym / m.q_antisym;
  return m;
}

DrivenResponse driven_response(const CoupledParams& p, double omega) {
  check(p);
  if (!(omega > 0.0))
    throw DomainViolation("drive angular frequency must be positive");
  ModePair m = mode_pair(p);
  const std::complex<double> jw{0.0, omega};

  // Anti-phase forcing strength, written with C_c in the numerator so the
  // expression stays finite as C_c -> 0 (the mode then simply never couples
  // to the drive).
  const double f_anti =
      p.drive_amplitude * p.coupling_cap /
      ((p.inductance + p.mutual) *
       (2.0 * p.coupling_cap + p.capacitance));
  const double f_sym = p.drive_amplitude / (p.inductance - p.mutual);

  auto lorentzian = [&](double w0, double gamma, double f) {
    return jw * f /
           (std::complex<double>{w0 * w0 - omega * omega, gamma * omega});
  };

  DrivenResponse r;
  r.i_antisym = lorentzian(m.omega_antisym, m.gamma_antisym, f_anti);
  r.i_sym = lorentzian(m.omega_sym, m.gamma_sym, f_sym);
  return r;
}

std::vector<SplitPoint> mode_split(const CoupledParams& p,
                                   const std::vector<double>& k_values) {
  std::vector<SplitPoint> out;
  out.reserve(k_values.size());
  for (double k : k_values) {
    CoupledParams q = p;
    q.mutual = k * p.inductance;
    ModePair m = mode_pair(q);
    out.push_back({k, m.omega_antisym / constants::two_pi,
                   m.omega_sym / constants::two_pi});
  }
  return out;
}

}  // namespace resodrive::modes
