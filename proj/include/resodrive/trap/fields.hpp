#pragma once

#include <array>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "resodrive/trap/bem.hpp"

// RF/DC drive superposition on the trap basis solutions: field phasors,
// ponderomotive (pseudo)potential, micromotion amplitude, secular
// frequencies, Mathieu stability parameters, and parametric-scan
// interpretation.
//
// Drive schemes (electrode numbering as in mesh.hpp):
//   single_phase: RF amplitude V_pp on the +x/-x rod pair, the +y/-y pair
//                 grounded;
//   two_phase:    +V_pp/2 on +x/-x and -V_pp/2 on +y/-y (antiphase about
//                 ground).
// End caps are RF-grounded in both schemes unless a pickup phasor is set.

namespace resodrive::trap {

enum class DriveScheme { SinglePhase, TwoPhase };

struct DriveConfig {
  DriveScheme scheme = DriveScheme::TwoPhase;
  double v_pp = 400.0;    // V, sets the RF phasor amplitudes per scheme
  double omega = 0.0;     // rad/s drive frequency (> 0)
  double endcap_dc = 2.0; // V, static potential on both end caps
  // Static compensation offsets on the four rods (+x, +y, -x, -y).
  std::array<double, 4> electrode_dc_bias{{0.0, 0.0, 0.0, 0.0}};
  // Optional RF pickup phasor on the end caps (V); models capacitive
  // leakage of the drive onto the end-cap electrodes.
  std::complex<double> endcap_rf{0.0, 0.0};
};

struct IonSpec {
  double mass = 171.0 * 1.66053906660e-27;  // kg (171 u)
  double charge = 1.602176634e-19;          // C (+e)
};

struct FieldSample {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::array<double, 6> basis_potentials{};          // V per unit electrode
  std::array<Eigen::Vector3d, 6> basis_fields{};     // V/m per unit electrode
  double pseudopotential_joule = 0.0;
  double pseudopotential_ev = 0.0;
  Eigen::Vector3d micromotion = Eigen::Vector3d::Zero();  // m, per component
};

struct SecularResult {
  // Angular secular frequencies (rad/s) assigned to the x, y, z axes by the
  // dominant component of the corresponding Hessian eigenvector.
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d minimum = Eigen::Vector3d::Zero();  // trap minimum (m)
  Eigen::Vector3d hessian_eigenvalues = Eigen::Vector3d::Zero();  // J/m^2
  int newton_iterations = 0;
};

struct MathieuResult {
  Eigen::Vector3d q = Eigen::Vector3d::Zero();  // q_x, q_y, q_z
  Eigen::Vector3d a = Eigen::Vector3d::Zero();  // a_x, a_y, a_z
  Eigen::Vector3d rf_curvature = Eigen::Vector3d::Zero();  // V/m^2
  Eigen::Vector3d dc_curvature = Eigen::Vector3d::Zero();  // V/m^2
  // |trace| of the fitted RF curvature tensor over its largest |eigenvalue|;
  // a harmonicity diagnostic that should stay well below 1%.
  double laplace_ratio = 0.0;
  // Stable iff |q_i| < 0.908 and a_i + q_i^2/2 > 0 on every axis
  // (first stability region, lowest-order secular criterion).
  bool stable = false;
};

enum class Modulation { RfAmplitude, EndcapVoltage };

// Complex RF field phasor (V/m) at a point outside the conductors.
// Throws DomainViolation when the point is inside or on an electrode,
// InputError for an invalid drive.
Eigen::Vector3cd rf_field(const BasisSolution& basis, const DriveConfig& drive,
                          const Eigen::Vector3d& point);

// Static potential (V) of the DC part of the drive (end caps + rod biases).
double dc_potential(const BasisSolution& basis, const DriveConfig& drive,
                    const Eigen::Vector3d& point);

// Static field (V/m) of the DC part of the drive.
Eigen::Vector3d dc_field(const BasisSolution& basis, const DriveConfig& drive,
                         const Eigen::Vector3d& point);

// Ponderomotive pseudopotential (J): q^2 |E_rf|^2 / (4 m Omega^2), with
// |E_rf|^2 the squared magnitude of the RF field phasor.
double pseudopotential(const BasisSolution& basis, const DriveConfig& drive,
                       const IonSpec& ion, const Eigen::Vector3d& point);

// Driven-oscillation amplitude (m) per Cartesian component:
// x_i = q |E_i| / (m Omega^2).
Eigen::Vector3d micromotion_amplitude(const BasisSolution& basis,
                                      const DriveConfig& drive,
                                      const IonSpec& ion,
                                      const Eigen::Vector3d& point);

// All per-point quantities in one evaluation.
FieldSample sample(const BasisSolution& basis, const DriveConfig& drive,
                   const IonSpec& ion, const Eigen::Vector3d& point);

// Locates the minimum of the total effective potential
// (pseudopotential + q * DC potential) by damped Newton iteration from the
// geometric center and converts the Hessian eigenvalues to secular
// frequencies omega_i = sqrt(lambda_i / m).  Central finite differences with
// step ion_rod_distance / 200.  Throws DomainViolation naming the unstable
// axes when the stationary point is a saddle.
SecularResult secular_frequencies(const BasisSolution& basis,
                                  const DriveConfig& drive,
                                  const IonSpec& ion);

// Fits quadratics to the RF and DC potentials over a ball of radius
// ion_rod_distance / 10 around the geometric trap center and converts the
// curvatures to Mathieu parameters:
//   q_i = 2 q Q_i / (m Omega^2),  a_i = 4 q A_i / (m Omega^2).
// Throws DomainViolation when the quadratic fit residual exceeds 1% of the
// sampled potential variation (quadrupole expansion invalid).
MathieuResult mathieu_parameters(const BasisSolution& basis,
                                 const DriveConfig& drive, const IonSpec& ion);

// Converts a parametric-excitation dip frequency (Hz) to the trap frequency
// it reveals: amplitude modulation excites at twice the secular frequency,
// end-cap (potential) modulation at the secular frequency itself.
double interpret_parametric_scan(Modulation modulation, double dip_frequency);

}  // namespace resodrive::trap
