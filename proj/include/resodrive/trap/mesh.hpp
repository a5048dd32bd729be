#pragma once

#include <array>
#include <utility>
#include <vector>

#include "resodrive/trap/panel.hpp"

// Surface mesh of a four-rod linear Paul trap with disk end-cap electrodes.
//
// Electrode numbering (fixed throughout the toolkit):
//   0: rod on +x   1: rod on +y   2: rod on -x   3: rod on -y
//   4: end cap at +z   5: end cap at -z
// Rod axes run parallel to z at radial distance ion_rod_distance + rod_radius
// from the trap axis; end caps are coaxial disks at z = +/- ion_endcap_distance.

namespace resodrive::trap {

struct TrapGeometry {
  double rod_radius = 200e-6;          // m (not fixed by measurement; configurable)
  double rod_length = 2e-3;            // m
  double ion_rod_distance = 400e-6;    // m, ion to rod surface
  double ion_endcap_distance = 400e-6; // m, ion to end-cap face
  double endcap_radius = 62.5e-6;      // m (gold-coated fiber facet)
  int panels_per_electrode = 192;      // multiple of 16, >= 16
};

struct Mesh {
  TrapGeometry geometry;
  std::vector<Panel> panels;
  // Half-open panel index range [first, last) of each electrode 0..5.
  std::array<std::pair<int, int>, 6> electrode_ranges{};

  int electrode_count() const { return 6; }
};

// Builds the panel mesh.  Throws DomainViolation for non-positive dimensions
// or a panel count that is not a positive multiple of 16, and BemError if the
// construction produces degenerate or overlapping panels.
Mesh build_mesh(const TrapGeometry& g);

// True when `point` lies inside (or on) one of the trap conductors.
bool inside_conductor(const TrapGeometry& g, const Eigen::Vector3d& point);

}  // namespace resodrive::trap
