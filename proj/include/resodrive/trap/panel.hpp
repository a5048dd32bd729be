#pragma once

#include <Eigen/Dense>

// Flat rectangular surface panels carrying uniform charge, the building block
// of the electrostatic boundary-element model.  Each panel is described by
// its center, two orthonormal in-plane axes with half-extents, and the
// electrode it belongs to.

namespace resodrive::trap {

struct Panel {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();  // in-plane axis, half-extent ha
  Eigen::Vector3d e2 = Eigen::Vector3d::UnitY();  // in-plane axis, half-extent hb
  double ha = 0.0;
  double hb = 0.0;
  int electrode = 0;

  Eigen::Vector3d normal() const { return e1.cross(e2); }
  double area() const { return 4.0 * ha * hb; }
};

// Exact potential at `point` of the panel carrying unit total charge spread
// uniformly over its surface (closed-form corner sums).  Valid everywhere,
// including on the panel plane away from edges.
double unit_potential(const Panel& p, const Eigen::Vector3d& point);

// Exact field -grad(potential) of the same unit-charge panel.  The normal
// component is discontinuous across the sheet; exactly on the plane it is
// reported as 0 (callers never sample fields on conductor surfaces).
Eigen::Vector3d unit_field(const Panel& p, const Eigen::Vector3d& point);

// Potential at the panel's own center for unit total charge: the collocation
// self-term 4[ha*asinh(hb/ha) + hb*asinh(ha/hb)] / (4 pi eps0 area).
double self_potential(const Panel& p);

// Point-charge approximation of the panel's influence:
// 1 / (4 pi eps0 |point - center|).  Kept as a cross-check utility; the
// collocation assembly uses the exact influence throughout.
double point_potential(const Panel& p, const Eigen::Vector3d& point);

}  // namespace resodrive::trap
