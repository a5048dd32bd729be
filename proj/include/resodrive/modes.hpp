#pragma once

#include <complex>
#include <vector>

// Closed-form normal modes of two identical LCR arms coupled inductively
// (mutual M = k*L) and capacitively (C_c between the arm outputs).  The
// out-of-phase ("asymmetric") mode drives the outputs in anti-phase and sits
// below the in-phase ("symmetric") mode whenever C_c > 0.

namespace resodrive::modes {

struct CoupledParams {
  double inductance = 0.0;        // L per arm [H]
  double capacitance = 0.0;       // C per arm to ground [F]
  double mutual = 0.0;            // M between the arms [H]
  double coupling_cap = 0.0;      // C_c bridging the outputs [F]
  double resistance = 0.0;        // R per arm [Ohm]
  double drive_amplitude = 1.0;   // V0 [V]
};

struct ModePair {
  double omega_antisym = 0.0;  // out-of-phase angular frequency [rad/s]
  double omega_sym = 0.0;      // in-phase angular frequency [rad/s]
  double q_antisym = 0.0;
  double q_sym = 0.0;
  double gamma_antisym = 0.0;  // omega / Q [rad/s]
  double gamma_sym = 0.0;
};

// Validates L > 0, C > 0, |M| < L, C_c >= 0, R > 0.
ModePair mode_pair(const CoupledParams& p);

struct DrivenResponse {
  // Anti-phase mode amplitude: the current through the bridging capacitor.
  std::complex<double> i_antisym;
  // In-phase mode amplitude: the sum of the two arm currents.
  std::complex<double> i_sym;
};

// Harmonically driven mode amplitudes at angular frequency omega:
// I_i = j*omega*F_i / (omega_i^2 - omega^2 + j*Gamma_i*omega).
DrivenResponse driven_response(const CoupledParams& p, double omega);

struct SplitPoint {
  double k = 0.0;
  double f_antisym = 0.0;  // [Hz]
  double f_sym = 0.0;      // [Hz]
};

// Mode frequencies as the inductive coupling coefficient varies.
std::vector<SplitPoint> mode_split(const CoupledParams& p,
                                   const std::vector<double>& k_values);

}  // namespace resodrive::modes
