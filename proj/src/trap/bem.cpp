#include "resodrive/trap/bem.hpp"

#include <cmath>
#include <string>

#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

namespace resodrive::trap {

BasisSolution solve_basis(std::shared_ptr<const Mesh> mesh) {
  if (!mesh || mesh->panels.empty())
    throw BemError("basis solve requires a non-empty mesh");
  const auto& panels = mesh->panels;
  const int n = static_cast<int>(panels.size());

  // Collocation matrix: potential at panel i's center per unit total charge
  // on panel j, using the exact uniform-rectangle influence (the diagonal is
  // its closed-form value at the panel's own center).  Exact influences,
  // rather than a point-charge surrogate, are what let strongly graded
  // meshes with high-aspect edge panels meet the boundary-residual gate.
  Eigen::MatrixXd A(n, n);
  for (int j = 0; j < n; ++j) {
    const Panel& pj = panels[j];
    for (int i = 0; i < n; ++i) {
      A(i, j) = (i == j) ? self_potential(pj)
                         : unit_potential(pj, panels[i].center);
    }
  }

  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 6);
  for (int e = 0; e < 6; ++e) {
    auto [first, last] = mesh->electrode_ranges[e];
    for (int j = first; j < last; ++j) rhs(j, e) = 1.0;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  BasisSolution basis;
  basis.mesh = std::move(mesh);
  basis.charges = lu.solve(rhs);
  if (!basis.charges.allFinite())
    throw BemError("collocation system is singular");

  for (int e = 0; e < 6; ++e)
    for (int f = 0; f < 6; ++f) {
      auto [first, last] = basis.mesh->electrode_ranges[e];
      double q = 0.0;
      for (int j = first; j < last; ++j) q += basis.charges(j, f);
      basis.capacitance(e, f) = q;
    }

  // Boundary-condition audit at an off-center point of every panel.  This is
  // a genuine out-of-sample check: the collocation equations were enforced
  // at panel centers only.
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Panel& p = panels[i];
    const Eigen::Vector3d probe =
        p.center + 0.4 * p.ha * p.e1 + 0.3 * p.hb * p.e2;
    std::array<double, 6> phi{};
    for (int j = 0; j < n; ++j) {
      const double u = unit_potential(panels[j], probe);
      for (int e = 0; e < 6; ++e) phi[e] += u * basis.charges(j, e);
    }
    for (int e = 0; e < 6; ++e) {
      const double target = (p.electrode == e) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(phi[e] - target));
    }
  }
  basis.self_check_residual = worst;
  if (worst >= 0.01)
    throw BemError(
        "boundary-condition residual " + format_double(worst) +
        " V exceeds 0.01 V for a unit drive; the mesh is too coarse or the "
        "collocation system is ill-conditioned");
  return basis;
}

std::array<double, 6> basis_potential(const BasisSolution& basis,
                                      const Eigen::Vector3d& point) {
  std::array<double, 6> phi{};
  const auto& panels = basis.mesh->panels;
  const int n = static_cast<int>(panels.size());
  for (int j = 0; j < n; ++j) {
    const double u = unit_potential(panels[j], point);
    for (int e = 0; e < 6; ++e) phi[e] += u * basis.charges(j, e);
  }
  return phi;
}

std::array<Eigen::Vector3d, 6> basis_field(const BasisSolution& basis,
                                           const Eigen::Vector3d& point) {
  std::array<Eigen::Vector3d, 6> field{};
  for (auto& f : field) f.setZero();
  const auto& panels = basis.mesh->panels;
  const int n = static_cast<int>(panels.size());
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d u = unit_field(panels[j], point);
    for (int e = 0; e < 6; ++e) field[e] += u * basis.charges(j, e);
  }
  return field;
}

}  // namespace resodrive::trap
