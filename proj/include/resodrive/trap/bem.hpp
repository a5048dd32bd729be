#pragma once

#include <array>
#include <memory>

#include <Eigen/Dense>

#include "resodrive/trap/mesh.hpp"

// Boundary-element electrostatics: point collocation at panel centers with an
// analytic patch self-term.  One LU factorization yields the panel charge
// distribution for each electrode held at 1 V with the others grounded; all
// drive conditions are superpositions of these six basis solutions.

namespace resodrive::trap {

struct BasisSolution {
  std::shared_ptr<const Mesh> mesh;
  // charges(j, e) = charge (C) on panel j when electrode e is at 1 V.
  Eigen::MatrixXd charges;
  // capacitance(e, f) = total charge on electrode e for 1 V on electrode f.
  Eigen::Matrix<double, 6, 6> capacitance;
  // Largest boundary-condition error (V) found at off-center surface points
  // across all six basis excitations.
  double self_check_residual = 0.0;
};

// Assembles and factorizes the collocation system, solves the six unit-drive
// right-hand sides, and verifies the boundary condition at off-center points
// on every panel.  Throws BemError when the residual check exceeds 0.01 V
// (ill-conditioned or under-resolved mesh).
BasisSolution solve_basis(std::shared_ptr<const Mesh> mesh);

// Potential (V) at `point` of each basis solution, via the exact uniform-
// rectangle influence of every panel.  No conductor-interior check here;
// callers guard with inside_conductor.
std::array<double, 6> basis_potential(const BasisSolution& basis,
                                      const Eigen::Vector3d& point);

// Field (V/m) at `point` of each basis solution.
std::array<Eigen::Vector3d, 6> basis_field(const BasisSolution& basis,
                                           const Eigen::Vector3d& point);

}  // namespace resodrive::trap
