#include "resodrive/trap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "resodrive/constants.hpp"
#include "resodrive/errors.hpp"
#include "resodrive/format.hpp"

namespace resodrive::trap {

namespace {

constexpr int kAzimuthalSlices = 16;
// Half the azimuthal step: panels are chords of a regular 16-gon.
const double kHalfSector = constants::pi / kAzimuthalSlices;

// Surface charge density diverges like d^(-1/2) at the open rod ends and at
// the disk rims, so uniform panels plateau far above the boundary-residual
// gate no matter how many are used.  Rings are therefore geometrically graded
// toward those edges.  The fractions below set the finest ring widths
// relative to the governing dimension; they were tuned so the default mesh
// passes the solve-time boundary audit with ~30% margin and keeps improving
// when the panel count doubles.
constexpr double kRodEndWidthFraction = 7.5e-4;   // of rod length
constexpr double kCapRimWidthFraction = 0.0024;   // of end-cap radius
constexpr double kCapCenterWidthFraction = 0.032; // of end-cap radius

void validate_geometry(const TrapGeometry& g) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainViolation(std::string(what) + " must be positive, got " +
                            format_double(v));
  };
  positive(g.rod_radius, "rod radius");
  positive(g.rod_length, "rod length");
  positive(g.ion_rod_distance, "ion-rod distance");
  positive(g.ion_endcap_distance, "ion-endcap distance");
  positive(g.endcap_radius, "end-cap radius");
  if (g.panels_per_electrode < 16 ||
      g.panels_per_electrode % kAzimuthalSlices != 0)
    throw DomainViolation(
        "panels per electrode must be a positive multiple of 16, got " +
        std::to_string(g.panels_per_electrode));
  if (g.endcap_radius >= g.ion_rod_distance)
    throw DomainViolation(
        "end-cap radius must be smaller than the ion-rod distance or the "
        "end caps touch the rods");
}

// Ratio g such that w_min * (1 + g + ... + g^(n-1)) [+ 0.5 w_min g^(n-1) when
// half_extra, i.e. half of one more ring as wide as the last] = total.
double solve_growth(int n, double total, double w_min, bool half_extra) {
  auto length = [&](double g) {
    double base;
    if (std::abs(g - 1.0) < 1e-12)
      base = n;
    else
      base = (std::pow(g, n) - 1.0) / (g - 1.0);
    const double extra = 0.5 * std::pow(g, n - 1);
    return w_min * (base + (half_extra ? extra : 0.0));
  };
  if (length(1.0) >= total) return 1.0;
  double lo = 1.0;
  double hi = 50.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (length(mid) < total ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Ring boundaries along the rod axis: nz rings spanning [-L/2, L/2], ring
// widths shrinking geometrically toward both ends down to w_end.  An odd ring
// count gets a single ring straddling z = 0 so the mesh stays mirror
// symmetric in z.
std::vector<double> rod_ring_edges(int nz, double length, double w_end) {
  const double half = 0.5 * length;
  const int h = nz / 2;
  // Cumulative graded widths marching from one end toward the middle.  For
  // even nz the two halves meet at z = 0; for odd nz the march stops short
  // and one ring straddles z = 0.
  std::vector<double> up{0.0};
  if (nz % 2 == 0) {
    const double g = solve_growth(h, half, w_end, false);
    std::vector<double> w(h);
    double sum = 0.0;
    for (int k = 0; k < h; ++k) sum += (w[k] = w_end * std::pow(g, k));
    for (double& x : w) x *= half / sum;
    for (int k = 0; k < h; ++k) up.push_back(up.back() + w[k]);
    up.back() = half;
  } else if (h == 0) {
    // A single ring spans the whole rod.
  } else {
    // The center ring repeats the width of its flanking rings so the size
    // progression stays monotone through z = 0.
    const double g = solve_growth(h, half, w_end, true);
    std::vector<double> w(h);
    for (int k = 0; k < h; ++k) w[k] = w_end * std::pow(g, k);
    double sum = 0.5 * w[h - 1];  // half of the center ring per side
    for (int k = 0; k < h; ++k) sum += w[k];
    for (double& x : w) x *= half / sum;
    for (int k = 0; k < h; ++k) up.push_back(up.back() + w[k]);
  }
  // Mirror the cumulative boundaries into edges over [-half, half]; the
  // shared edge at z = 0 (even nz) is emitted once.
  std::vector<double> edges;
  edges.reserve(nz + 1);
  for (int i = 0; i <= h; ++i) edges.push_back(-half + up[i]);
  for (int i = h; i >= 0; --i) {
    if (nz % 2 == 0 && i == h) continue;
    edges.push_back(half - up[i]);
  }
  return edges;
}

// Ring widths for an end-cap disk: K rings covering [0, Rp]; widths grow
// geometrically (single common ratio) from w_center at the axis and from
// w_rim at the rim, meeting in the middle.
std::vector<double> cap_ring_widths(int K, double total, double w_center,
                                    double w_rim) {
  auto build = [&](double g, std::vector<double>& from_axis,
                   std::vector<double>& from_rim) {
    from_axis.clear();
    from_rim.clear();
    double wl = w_center;
    double wr = w_rim;
    for (int k = 0; k < K; ++k) {
      if (wl <= wr) {
        from_axis.push_back(wl);
        wl *= g;
      } else {
        from_rim.push_back(wr);
        wr *= g;
      }
    }
  };
  std::vector<double> a, b;
  double lo = 1.0 + 1e-9;
  double hi = 50.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    build(mid, a, b);
    double sum = 0.0;
    for (double w : a) sum += w;
    for (double w : b) sum += w;
    (sum < total ? lo : hi) = mid;
  }
  build(0.5 * (lo + hi), a, b);
  std::vector<double> widths(a);
  widths.insert(widths.end(), b.rbegin(), b.rend());
  double sum = 0.0;
  for (double w : widths) sum += w;
  for (double& w : widths) w *= total / sum;
  return widths;
}

void append_rod(std::vector<Panel>& panels, const TrapGeometry& g,
                double cx, double cy, int electrode) {
  const int n_z = g.panels_per_electrode / kAzimuthalSlices;
  const double R = g.rod_radius;
  const double w_end = kRodEndWidthFraction * g.rod_length;
  const std::vector<double> edges = rod_ring_edges(n_z, g.rod_length, w_end);
  // Tangent strips of half-width R tan(pi/16) tile the circumscribed 16-gon
  // prism exactly, fold line to fold line, so the discretized conductor is a
  // well-defined solid (chord strips would leave gaps at the folds).
  const double hb = R * std::tan(kHalfSector);
  const double dphi = constants::two_pi / kAzimuthalSlices;
  for (int i = 0; i < n_z; ++i) {
    const double z = 0.5 * (edges[i] + edges[i + 1]);
    const double ha = 0.5 * (edges[i + 1] - edges[i]);
    for (int m = 0; m < kAzimuthalSlices; ++m) {
      const double phi = (m + 0.5) * dphi;
      Panel p;
      p.center = {cx + R * std::cos(phi), cy + R * std::sin(phi), z};
      p.e1 = Eigen::Vector3d::UnitZ();
      p.e2 = {-std::sin(phi), std::cos(phi), 0.0};
      p.ha = ha;
      p.hb = hb;
      p.electrode = electrode;
      panels.push_back(p);
    }
  }
}

void append_endcap(std::vector<Panel>& panels, const TrapGeometry& g,
                   double z_face, int electrode) {
  const int n_r = g.panels_per_electrode / kAzimuthalSlices;
  // The disk is represented by its inscribed regular 16-gon: ring boundaries
  // are chord polygons at perpendicular distances d_k, and the outermost
  // boundary is the polygon whose corners lie exactly on the true rim circle.
  // This keeps every panel inside the disk and makes consecutive rings tile
  // seamlessly; rectangles centered on ring midlines with half-width
  // d_mid tan(pi/16) match the trapezoidal sectors in area.
  const double Rp = g.endcap_radius * std::cos(kHalfSector);
  const std::vector<double> widths =
      cap_ring_widths(n_r, Rp, kCapCenterWidthFraction * g.endcap_radius,
                      kCapRimWidthFraction * g.endcap_radius);
  const double dpsi = constants::two_pi / kAzimuthalSlices;
  double d_in = 0.0;
  for (int i = 0; i < n_r; ++i) {
    const double d_out = d_in + widths[i];
    const double d_mid = 0.5 * (d_in + d_out);
    const double ha = 0.5 * (d_out - d_in);
    const double hb = d_mid * std::tan(kHalfSector);
    for (int m = 0; m < kAzimuthalSlices; ++m) {
      const double psi = (m + 0.5) * dpsi;
      Panel p;
      p.center = {d_mid * std::cos(psi), d_mid * std::sin(psi), z_face};
      p.e1 = {std::cos(psi), std::sin(psi), 0.0};
      p.e2 = {-std::sin(psi), std::cos(psi), 0.0};
      p.ha = ha;
      p.hb = hb;
      p.electrode = electrode;
      panels.push_back(p);
    }
    d_in = d_out;
  }
}

}  // namespace

Mesh build_mesh(const TrapGeometry& g) {
  validate_geometry(g);
  Mesh mesh;
  mesh.geometry = g;
  mesh.panels.reserve(static_cast<size_t>(6) * g.panels_per_electrode);

  const double d = g.ion_rod_distance + g.rod_radius;  // rod axis offset
  const double cx[4] = {d, 0.0, -d, 0.0};
  const double cy[4] = {0.0, d, 0.0, -d};
  for (int e = 0; e < 4; ++e) {
    int first = static_cast<int>(mesh.panels.size());
    append_rod(mesh.panels, g, cx[e], cy[e], e);
    mesh.electrode_ranges[e] = {first, static_cast<int>(mesh.panels.size())};
  }
  {
    int first = static_cast<int>(mesh.panels.size());
    append_endcap(mesh.panels, g, g.ion_endcap_distance, 4);
    mesh.electrode_ranges[4] = {first, static_cast<int>(mesh.panels.size())};
  }
  {
    int first = static_cast<int>(mesh.panels.size());
    append_endcap(mesh.panels, g, -g.ion_endcap_distance, 5);
    mesh.electrode_ranges[5] = {first, static_cast<int>(mesh.panels.size())};
  }

  // Degeneracy audit: every panel must have positive extent and a center
  // distinct from all others (coincident centers mean overlapping panels).
  double min_extent = std::numeric_limits<double>::infinity();
  for (const auto& p : mesh.panels)
    min_extent = std::min({min_extent, p.ha, p.hb});
  if (!(min_extent > 0.0))
    throw BemError("mesh construction produced a zero-extent panel");
  const double min_sep = 0.5 * min_extent;
  const double min_sep2 = min_sep * min_sep;
  for (size_t i = 0; i < mesh.panels.size(); ++i)
    for (size_t j = i + 1; j < mesh.panels.size(); ++j)
      if ((mesh.panels[i].center - mesh.panels[j].center).squaredNorm() <
          min_sep2)
        throw BemError("mesh panels " + std::to_string(i) + " and " +
                       std::to_string(j) + " overlap");
  return mesh;
}

bool inside_conductor(const TrapGeometry& g, const Eigen::Vector3d& point) {
  // The rod test uses the circumscribed-polygon radius so that no point
  // between the ideal cylinder and the faceted surface counts as vacuum.
  const double r_prism = g.rod_radius / std::cos(kHalfSector);
  const double d = g.ion_rod_distance + g.rod_radius;
  const double cx[4] = {d, 0.0, -d, 0.0};
  const double cy[4] = {0.0, d, 0.0, -d};
  for (int e = 0; e < 4; ++e) {
    const double dx = point.x() - cx[e];
    const double dy = point.y() - cy[e];
    if (dx * dx + dy * dy <= r_prism * r_prism &&
        std::abs(point.z()) <= 0.5 * g.rod_length)
      return true;
  }
  // End caps are zero-thickness disks; a thin exclusion band keeps samples
  // off the surface.
  const double band = 1e-9;
  const double r2 = point.x() * point.x() + point.y() * point.y();
  if (r2 <= g.endcap_radius * g.endcap_radius &&
      (std::abs(point.z() - g.ion_endcap_distance) <= band ||
       std::abs(point.z() + g.ion_endcap_distance) <= band))
    return true;
  return false;
}

}  // namespace resodrive::trap
