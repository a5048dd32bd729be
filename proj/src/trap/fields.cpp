#include "resodrive/trap/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "resodrive/constants.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

namespace resodrive::trap {

namespace {

void validate_drive(const DriveConfig& drive) {
  if (!(drive.v_pp > 0.0) || !std::isfinite(drive.v_pp))
    throw InputError("drive peak-to-peak voltage must be positive, got " +
                     format_double(drive.v_pp));
  if (!(drive.omega > 0.0) || !std::isfinite(drive.omega))
    throw InputError("drive angular frequency must be positive, got " +
                     format_double(drive.omega));
}

void validate_ion(const IonSpec& ion) {
  if (!(ion.mass > 0.0) || !std::isfinite(ion.mass))
    throw InputError("ion mass must be positive, got " +
                     format_double(ion.mass));
  if (!(std::abs(ion.charge) > 0.0) || !std::isfinite(ion.charge))
    throw InputError("ion charge must be nonzero, got " +
                     format_double(ion.charge));
}

void require_outside(const BasisSolution& basis, const Eigen::Vector3d& point) {
  if (inside_conductor(basis.mesh->geometry, point))
    throw DomainViolation("field evaluation point (" +
                          format_double(point.x()) + ", " +
                          format_double(point.y()) + ", " +
                          format_double(point.z()) +
                          ") m lies inside a trap electrode");
}

// Per-electrode RF phasor weights (V).
std::array<std::complex<double>, 6> rf_weights(const DriveConfig& drive) {
  std::array<std::complex<double>, 6> w{};
  if (drive.scheme == DriveScheme::SinglePhase) {
    w[0] = drive.v_pp;
    w[2] = drive.v_pp;
  } else {
    w[0] = 0.5 * drive.v_pp;
    w[2] = 0.5 * drive.v_pp;
    w[1] = -0.5 * drive.v_pp;
    w[3] = -0.5 * drive.v_pp;
  }
  w[4] = drive.endcap_rf;
  w[5] = drive.endcap_rf;
  return w;
}

// Per-electrode static weights (V).
std::array<double, 6> dc_weights(const DriveConfig& drive) {
  std::array<double, 6> w{};
  for (int e = 0; e < 4; ++e) w[e] = drive.electrode_dc_bias[e];
  w[4] = drive.endcap_dc;
  w[5] = drive.endcap_dc;
  return w;
}

Eigen::Vector3cd rf_field_unchecked(const BasisSolution& basis,
                                    const DriveConfig& drive,
                                    const Eigen::Vector3d& point) {
  const auto fields = basis_field(basis, point);
  const auto w = rf_weights(drive);
  Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
  for (int k = 0; k < 6; ++k) e += w[k] * fields[k].cast<std::complex<double>>();
  return e;
}

double pseudopotential_unchecked(const BasisSolution& basis,
                                 const DriveConfig& drive, const IonSpec& ion,
                                 const Eigen::Vector3d& point) {
  const Eigen::Vector3cd e = rf_field_unchecked(basis, drive, point);
  const double q = ion.charge;
  return q * q * e.squaredNorm() /
         (4.0 * ion.mass * drive.omega * drive.omega);
}

double dc_potential_unchecked(const BasisSolution& basis,
                              const DriveConfig& drive,
                              const Eigen::Vector3d& point) {
  const auto phi = basis_potential(basis, point);
  const auto w = dc_weights(drive);
  double v = 0.0;
  for (int k = 0; k < 6; ++k) v += w[k] * phi[k];
  return v;
}

// Total effective potential governing the secular motion (J).
double effective_potential(const BasisSolution& basis, const DriveConfig& drive,
                           const IonSpec& ion, const Eigen::Vector3d& point) {
  return pseudopotential_unchecked(basis, drive, ion, point) +
         ion.charge * dc_potential_unchecked(basis, drive, point);
}

const char* axis_name(int i) { return i == 0 ? "x" : (i == 1 ? "y" : "z"); }

}  // namespace

Eigen::Vector3cd rf_field(const BasisSolution& basis, const DriveConfig& drive,
                          const Eigen::Vector3d& point) {
  validate_drive(drive);
  require_outside(basis, point);
  return rf_field_unchecked(basis, drive, point);
}

double dc_potential(const BasisSolution& basis, const DriveConfig& drive,
                    const Eigen::Vector3d& point) {
  require_outside(basis, point);
  return dc_potential_unchecked(basis, drive, point);
}

Eigen::Vector3d dc_field(const BasisSolution& basis, const DriveConfig& drive,
                         const Eigen::Vector3d& point) {
  require_outside(basis, point);
  const auto fields = basis_field(basis, point);
  const auto w = dc_weights(drive);
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  for (int k = 0; k < 6; ++k) e += w[k] * fields[k];
  return e;
}

double pseudopotential(const BasisSolution& basis, const DriveConfig& drive,
                       const IonSpec& ion, const Eigen::Vector3d& point) {
  validate_drive(drive);
  validate_ion(ion);
  require_outside(basis, point);
  return pseudopotential_unchecked(basis, drive, ion, point);
}

Eigen::Vector3d micromotion_amplitude(const BasisSolution& basis,
                                      const DriveConfig& drive,
                                      const IonSpec& ion,
                                      const Eigen::Vector3d& point) {
  validate_drive(drive);
  validate_ion(ion);
  require_outside(basis, point);
  const Eigen::Vector3cd e = rf_field_unchecked(basis, drive, point);
  const double scale =
      std::abs(ion.charge) / (ion.mass * drive.omega * drive.omega);
  return {scale * std::abs(e.x()), scale * std::abs(e.y()),
          scale * std::abs(e.z())};
}

FieldSample sample(const BasisSolution& basis, const DriveConfig& drive,
                   const IonSpec& ion, const Eigen::Vector3d& point) {
  validate_drive(drive);
  validate_ion(ion);
  require_outside(basis, point);
  FieldSample s;
  s.position = point;
  s.basis_potentials = basis_potential(basis, point);
  s.basis_fields = basis_field(basis, point);
  const auto w = rf_weights(drive);
  Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
  for (int k = 0; k < 6; ++k)
    e += w[k] * s.basis_fields[k].cast<std::complex<double>>();
  const double q = ion.charge;
  s.pseudopotential_joule =
      q * q * e.squaredNorm() / (4.0 * ion.mass * drive.omega * drive.omega);
  s.pseudopotential_ev =
      s.pseudopotential_joule / constants::elementary_charge;
  const double scale =
      std::abs(q) / (ion.mass * drive.omega * drive.omega);
  s.micromotion = {scale * std::abs(e.x()), scale * std::abs(e.y()),
                   scale * std::abs(e.z())};
  return s;
}

SecularResult secular_frequencies(const BasisSolution& basis,
                                  const DriveConfig& drive,
                                  const IonSpec& ion) {
  validate_drive(drive);
  validate_ion(ion);
  const double rho0 = basis.mesh->geometry.ion_rod_distance;
  const double h = rho0 / 200.0;
  auto U = [&](const Eigen::Vector3d& r) {
    return effective_potential(basis, drive, ion, r);
  };
  auto gradient = [&](const Eigen::Vector3d& r) {
    Eigen::Vector3d g;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d dp = r, dm = r;
      dp[i] += h;
      dm[i] -= h;
      g[i] = (U(dp) - U(dm)) / (2.0 * h);
    }
    return g;
  };
  auto hessian = [&](const Eigen::Vector3d& r) {
    Eigen::Matrix3d H;
    const double u0 = U(r);
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d dp = r, dm = r;
      dp[i] += h;
      dm[i] -= h;
      H(i, i) = (U(dp) - 2.0 * u0 + U(dm)) / (h * h);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        Eigen::Vector3d pp = r, pm = r, mp = r, mm = r;
        pp[i] += h; pp[j] += h;
        pm[i] += h; pm[j] -= h;
        mp[i] -= h; mp[j] += h;
        mm[i] -= h; mm[j] -= h;
        H(i, j) = H(j, i) = (U(pp) - U(pm) - U(mp) + U(mm)) / (4.0 * h * h);
      }
    return H;
  };

  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Eigen::Vector3d g = gradient(x);
  const double g0 = std::max(g.norm(), 1e-300);
  SecularResult result;
  for (int it = 0; it < 100; ++it) {
    if (g.norm() <= 1e-10 * g0) break;
    const Eigen::Matrix3d H = hessian(x);
    Eigen::Vector3d step = H.fullPivLu().solve(-g);
    if (!step.allFinite())
      throw DomainViolation(
          "secular-frequency search failed: singular Hessian at (" +
          format_double(x.x()) + ", " + format_double(x.y()) + ", " +
          format_double(x.z()) + ") m");
    // Damp steps that do not reduce the potential (saddle-adjacent starts).
    const double u_here = U(x);
    double lambda = 1.0;
    Eigen::Vector3d trial = x + step;
    for (int k = 0; k < 30 && U(trial) >= u_here && step.norm() * lambda > 1e-16 * rho0;
         ++k) {
      lambda *= 0.5;
      trial = x + lambda * step;
    }
    x = trial;
    if (x.norm() > 0.5 * rho0)
      throw DomainViolation(
          "secular-frequency search left the trap interior: no potential "
          "minimum near the geometric center");
    result.newton_iterations = it + 1;
    g = gradient(x);
    if (lambda * step.norm() <= 1e-13 * rho0) break;
  }

  const Eigen::Matrix3d H = hessian(x);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(H);
  const Eigen::Vector3d lambda = eig.eigenvalues();
  const Eigen::Matrix3d vecs = eig.eigenvectors();
  std::string unstable;
  for (int i = 0; i < 3; ++i) {
    if (lambda[i] <= 0.0) {
      int dominant = 0;
      vecs.col(i).cwiseAbs().maxCoeff(&dominant);
      if (!unstable.empty()) unstable += ", ";
      unstable += axis_name(dominant);
    }
  }
  if (!unstable.empty())
    throw DomainViolation(
        "total potential has no minimum: stationary point is unstable along " +
        unstable);

  // Assign eigenpairs to axes: the most z-like eigenvector is the axial mode,
  // then the most x-like of the remaining two.
  std::array<bool, 3> used{{false, false, false}};
  int iz = 0;
  double best = -1.0;
  for (int i = 0; i < 3; ++i)
    if (std::abs(vecs(2, i)) > best) {
      best = std::abs(vecs(2, i));
      iz = i;
    }
  used[iz] = true;
  int ix = -1;
  best = -1.0;
  for (int i = 0; i < 3; ++i)
    if (!used[i] && std::abs(vecs(0, i)) > best) {
      best = std::abs(vecs(0, i));
      ix = i;
    }
  used[ix] = true;
  int iy = 0;
  for (int i = 0; i < 3; ++i)
    if (!used[i]) iy = i;

  result.minimum = x;
  result.hessian_eigenvalues = {lambda[ix], lambda[iy], lambda[iz]};
  result.omega = {std::sqrt(lambda[ix] / ion.mass),
                  std::sqrt(lambda[iy] / ion.mass),
                  std::sqrt(lambda[iz] / ion.mass)};
  return result;
}

MathieuResult mathieu_parameters(const BasisSolution& basis,
                                 const DriveConfig& drive,
                                 const IonSpec& ion) {
  validate_drive(drive);
  validate_ion(ion);
  const double r = basis.mesh->geometry.ion_rod_distance / 10.0;

  // 27-point stencil: center plus 26 points on the sphere of radius r
  // (6 axis points, 12 edge midpoints, 8 corners).
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(27);
  pts.emplace_back(0.0, 0.0, 0.0);
  for (int i = 0; i < 3; ++i)
    for (double s : {1.0, -1.0}) {
      Eigen::Vector3d p = Eigen::Vector3d::Zero();
      p[i] = s * r;
      pts.push_back(p);
    }
  const double re = r / std::sqrt(2.0);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          Eigen::Vector3d p = Eigen::Vector3d::Zero();
          p[i] = si * re;
          p[j] = sj * re;
          pts.push_back(p);
        }
  const double rc = r / std::sqrt(3.0);
  for (double sx : {1.0, -1.0})
    for (double sy : {1.0, -1.0})
      for (double sz : {1.0, -1.0})
        pts.emplace_back(sx * rc, sy * rc, sz * rc);

  const auto w_rf = rf_weights(drive);
  const auto w_dc = dc_weights(drive);
  const int n = static_cast<int>(pts.size());
  Eigen::VectorXd phi_rf(n), phi_dc(n);
  for (int k = 0; k < n; ++k) {
    require_outside(basis, pts[k]);
    const auto phi = basis_potential(basis, pts[k]);
    std::complex<double> rf = 0.0;
    double dc = 0.0;
    for (int e = 0; e < 6; ++e) {
      rf += w_rf[e] * phi[e];
      dc += w_dc[e] * phi[e];
    }
    // The Mathieu analysis uses the in-phase RF amplitude; all standard
    // drive schemes have real phasor weights.
    phi_rf[k] = rf.real();
    phi_dc[k] = dc;
  }

  // Quadratic model: c + b.x + 1/2 x^T S x via monomials
  // [1, x, y, z, x^2, y^2, z^2, xy, xz, yz].
  Eigen::MatrixXd design(n, 10);
  for (int k = 0; k < n; ++k) {
    const auto& p = pts[k];
    design(k, 0) = 1.0;
    design(k, 1) = p.x();
    design(k, 2) = p.y();
    design(k, 3) = p.z();
    design(k, 4) = p.x() * p.x();
    design(k, 5) = p.y() * p.y();
    design(k, 6) = p.z() * p.z();
    design(k, 7) = p.x() * p.y();
    design(k, 8) = p.x() * p.z();
    design(k, 9) = p.y() * p.z();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::VectorXd c_rf = qr.solve(phi_rf);
  const Eigen::VectorXd c_dc = qr.solve(phi_dc);

  auto check_fit = [&](const Eigen::VectorXd& coeff, const Eigen::VectorXd& y,
                       const char* which) {
    const double variation = y.maxCoeff() - y.minCoeff();
    const double rms = std::sqrt((design * coeff - y).squaredNorm() / n);
    if (variation > 0.0 && rms > 0.01 * variation)
      throw DomainViolation(
          std::string("quadratic fit of the ") + which +
          " potential near the trap center misses by " + format_double(rms) +
          " V rms (" + format_double(100.0 * rms / variation) +
          "% of the sampled variation); quadrupole expansion invalid");
  };
  check_fit(c_rf, phi_rf, "RF");
  check_fit(c_dc, phi_dc, "DC");

  MathieuResult result;
  // Full second derivatives: d^2/dx_i^2 of the monomial expansion.
  result.rf_curvature = {2.0 * c_rf[4], 2.0 * c_rf[5], 2.0 * c_rf[6]};
  result.dc_curvature = {2.0 * c_dc[4], 2.0 * c_dc[5], 2.0 * c_dc[6]};

  Eigen::Matrix3d s_rf;
  s_rf << 2.0 * c_rf[4], c_rf[7], c_rf[8],
          c_rf[7], 2.0 * c_rf[5], c_rf[9],
          c_rf[8], c_rf[9], 2.0 * c_rf[6];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(s_rf);
  const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
  result.laplace_ratio =
      max_eig > 0.0 ? std::abs(s_rf.trace()) / max_eig : 0.0;

  const double q = ion.charge;
  const double denom = ion.mass * drive.omega * drive.omega;
  for (int i = 0; i < 3; ++i) {
    result.q[i] = 2.0 * q * result.rf_curvature[i] / denom;
    result.a[i] = 4.0 * q * result.dc_curvature[i] / denom;
  }
  result.stable = true;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(result.q[i]) >= 0.908) result.stable = false;
    if (result.a[i] + 0.5 * result.q[i] * result.q[i] <= 0.0)
      result.stable = false;
  }
  return result;
}

double interpret_parametric_scan(Modulation modulation, double dip_frequency) {
  if (!(dip_frequency > 0.0) || !std::isfinite(dip_frequency))
    throw InputError("parametric dip frequency must be positive, got " +
                     format_double(dip_frequency));
  switch (modulation) {
    case Modulation::RfAmplitude:
      // Amplitude modulation couples to even quanta: the resonance sits at
      // twice the secular frequency.
      return 0.5 * dip_frequency;
    case Modulation::EndcapVoltage:
      return dip_frequency;
  }
  throw InputError("unknown parametric modulation kind");
}

}  // namespace resodrive::trap
