#include <cmath>
#include <numeric>

#include "doctest.h"
#include "resodrive/errors.hpp"
#include "resodrive/trap/mesh.hpp"

using namespace resodrive;
using namespace resodrive::trap;

namespace {

double electrode_area(const Mesh& m, int e) {
  auto [first, last] = m.electrode_ranges[e];
  double a = 0.0;
  for (int i = first; i < last; ++i) a += m.panels[i].area();
  return a;
}

}  // namespace

TEST_CASE("default mesh has six electrodes of the requested panel count") {
  TrapGeometry g;
  Mesh m = build_mesh(g);
  CHECK(m.electrode_count() == 6);
  CHECK(m.panels.size() == 6u * 192u);
  int covered = 0;
  for (int e = 0; e < 6; ++e) {
    auto [first, last] = m.electrode_ranges[e];
    CHECK(last - first == 192);
    covered += last - first;
    for (int i = first; i < last; ++i) CHECK(m.panels[i].electrode == e);
  }
  CHECK(covered == static_cast<int>(m.panels.size()));
  // Ranges tile the panel vector consecutively.
  CHECK(m.electrode_ranges[0].first == 0);
  for (int e = 1; e < 6; ++e)
    CHECK(m.electrode_ranges[e].first == m.electrode_ranges[e - 1].second);
}

TEST_CASE("geometry validation rejects bad inputs") {
  TrapGeometry g;
  g.panels_per_electrode = 24;  // not a multiple of 16
  CHECK_THROWS_AS((void)build_mesh(g), DomainViolation);
  g.panels_per_electrode = 8;  // below the minimum
  CHECK_THROWS_AS((void)build_mesh(g), DomainViolation);
  g.panels_per_electrode = 0;
  CHECK_THROWS_AS((void)build_mesh(g), DomainViolation);
  g = TrapGeometry{};
  g.rod_radius = 0.0;
  CHECK_THROWS_AS((void)build_mesh(g), DomainViolation);
  g = TrapGeometry{};
  g.rod_length = -1e-3;
  CHECK_THROWS_AS((void)build_mesh(g), DomainViolation);
  g = TrapGeometry{};
  g.endcap_radius = g.ion_rod_distance;  // caps would touch the rods
  CHECK_THROWS_AS((void)build_mesh(g), DomainViolation);
  // The minimum legal count builds fine.
  g = TrapGeometry{};
  g.panels_per_electrode = 16;
  CHECK(build_mesh(g).panels.size() == 6u * 16u);
}

TEST_CASE("total modeled area does not depend on the panel count") {
  TrapGeometry g;
  Mesh coarse = build_mesh(g);
  g.panels_per_electrode = 384;
  Mesh fine = build_mesh(g);
  for (int e = 0; e < 6; ++e) {
    const double a0 = electrode_area(coarse, e);
    const double a1 = electrode_area(fine, e);
    CHECK(a1 == doctest::Approx(a0).epsilon(1e-9));
  }
  // Doubling the count therefore halves the mean panel area.
  const double mean0 = electrode_area(coarse, 0) / 192.0;
  const double mean1 = electrode_area(fine, 0) / 384.0;
  CHECK(mean1 == doctest::Approx(0.5 * mean0).epsilon(1e-9));

  // And the totals match the closed-form tiled areas: rods tile the
  // circumscribed 16-gon prism, caps the inscribed 16-gon of the disk.
  const TrapGeometry d{};
  const double rod_exact =
      16.0 * 2.0 * d.rod_radius * std::tan(M_PI / 16.0) * d.rod_length;
  const double rp = d.endcap_radius * std::cos(M_PI / 16.0);
  const double cap_exact = 16.0 * std::tan(M_PI / 16.0) * rp * rp;
  CHECK(electrode_area(coarse, 0) == doctest::Approx(rod_exact).epsilon(1e-9));
  CHECK(electrode_area(coarse, 4) == doctest::Approx(cap_exact).epsilon(1e-9));
}

TEST_CASE("mesh respects the trap symmetries") {
  Mesh m = build_mesh(TrapGeometry{});

  // Rod 1 is rod 0 rotated by 90 degrees about z.
  auto [f0, l0] = m.electrode_ranges[0];
  auto [f1, l1] = m.electrode_ranges[1];
  REQUIRE(l0 - f0 == l1 - f1);
  for (int i = f0; i < l0; ++i) {
    const Eigen::Vector3d c = m.panels[i].center;
    const Eigen::Vector3d rotated(-c.y(), c.x(), c.z());
    double best = 1.0;
    for (int j = f1; j < l1; ++j)
      best = std::min(best, (m.panels[j].center - rotated).norm());
    CHECK(best < 1e-12);
  }

  // The end caps mirror each other in z, panel for panel.
  auto [f4, l4] = m.electrode_ranges[4];
  auto [f5, l5] = m.electrode_ranges[5];
  REQUIRE(l4 - f4 == l5 - f5);
  for (int i = 0; i < l4 - f4; ++i) {
    const Panel& top = m.panels[f4 + i];
    const Panel& bottom = m.panels[f5 + i];
    CHECK(top.center.x() == bottom.center.x());
    CHECK(top.center.y() == bottom.center.y());
    CHECK(top.center.z() == -bottom.center.z());
    CHECK(top.ha == bottom.ha);
    CHECK(top.hb == bottom.hb);
  }

  // Each rod's panel set is mirror symmetric in z.
  for (int i = f0; i < l0; ++i) {
    const Eigen::Vector3d c = m.panels[i].center;
    const Eigen::Vector3d mirrored(c.x(), c.y(), -c.z());
    double best = 1.0;
    for (int j = f0; j < l0; ++j)
      best = std::min(best, (m.panels[j].center - mirrored).norm());
    CHECK(best < 1e-12);
  }
}

TEST_CASE("rod panels sit on the rod surface at the expected axis offset") {
  TrapGeometry g;
  Mesh m = build_mesh(g);
  const double axis_offset = g.ion_rod_distance + g.rod_radius;
  auto [first, last] = m.electrode_ranges[0];
  for (int i = first; i < last; ++i) {
    const Panel& p = m.panels[i];
    const double radial = std::hypot(p.center.x() - axis_offset, p.center.y());
    CHECK(radial == doctest::Approx(g.rod_radius).epsilon(1e-12));
    CHECK(std::abs(p.center.z()) <= 0.5 * g.rod_length);
  }
  // End-cap panels lie in the cap planes inside the disk radius.
  auto [f4, l4] = m.electrode_ranges[4];
  for (int i = f4; i < l4; ++i) {
    const Panel& p = m.panels[i];
    CHECK(p.center.z() == g.ion_endcap_distance);
    CHECK(std::hypot(p.center.x(), p.center.y()) < g.endcap_radius);
  }
}

TEST_CASE("inside_conductor classifies rod, cap, and vacuum points") {
  TrapGeometry g;
  const double axis_offset = g.ion_rod_distance + g.rod_radius;  // 600 um

  // Trap center and the mid-gap region are vacuum.
  CHECK(!inside_conductor(g, {0, 0, 0}));
  CHECK(!inside_conductor(g, {0.5 * g.ion_rod_distance, 0, 0}));

  // Points on each rod axis are inside.
  CHECK(inside_conductor(g, {axis_offset, 0, 0}));
  CHECK(inside_conductor(g, {0, axis_offset, 0}));
  CHECK(inside_conductor(g, {-axis_offset, 0, 0}));
  CHECK(inside_conductor(g, {0, -axis_offset, 0}));

  // Just past the faceted rod surface is vacuum; just beyond the rod end too.
  const double prism = g.rod_radius / std::cos(M_PI / 16.0);
  CHECK(!inside_conductor(g, {axis_offset + 1.01 * prism, 0, 0}));
  CHECK(inside_conductor(g, {axis_offset + g.rod_radius, 0, 0}));
  CHECK(!inside_conductor(g, {axis_offset, 0, 0.51 * g.rod_length}));

  // End-cap faces count as conductor, points slightly off the face do not.
  CHECK(inside_conductor(g, {0, 0, g.ion_endcap_distance}));
  CHECK(inside_conductor(g, {0, 0, -g.ion_endcap_distance}));
  CHECK(!inside_conductor(g, {0, 0, g.ion_endcap_distance - 1e-6}));
  CHECK(!inside_conductor(
      g, {1.1 * g.endcap_radius, 0, g.ion_endcap_distance}));
}
