#include "resodrive/trap/panel.hpp"

#include <cmath>

#include "resodrive/constants.hpp"

// Closed-form potential and field of a uniformly charged rectangle
// |x| <= ha, |y| <= hb in its own plane.  With corner offsets u = xi - x
// (xi = +/-ha), v = eta - y (eta = +/-hb), r = sqrt(u^2 + v^2 + z^2) and
// corner sign s = sign(u-corner) * sign(v-corner) pattern (+,-,-,+):
//
//   phi = sigma/(4 pi eps0) * sum s * [u ln(v+r) + v ln(u+r) - z atan(uv/zr)]
//   E_x = sigma/(4 pi eps0) * sum s * ln(v+r)
//   E_y = sigma/(4 pi eps0) * sum s * ln(u+r)
//   E_z = sigma/(4 pi eps0) * sum s * atan(uv/zr)
//
// The atan terms vanish on the plane z = 0 (principal value), giving the
// one-sided average there.

namespace resodrive::trap {

namespace {

struct LocalPoint {
  double x, y, z;
};

LocalPoint to_local(const Panel& p, const Eigen::Vector3d& point) {
  Eigen::Vector3d w = point - p.center;
  return {w.dot(p.e1), w.dot(p.e2), w.dot(p.normal())};
}

// Guarded ln(a + r): a + r >= 0 with equality only on the edge lines, which
// valid meshes and sample points never hit exactly.
double ln_term(double a, double r) {
  double s = a + r;
  if (s <= 0.0) s = 1e-300;
  return std::log(s);
}

// Principal-value atan(uv / zr); the z -> 0 limit of the summed terms is 0
// on the sheet plane and +/- pi/2 per corner off it, which the plain atan
// (not atan2) reproduces on both sides of the sheet.
double atan_term(double u, double v, double z, double r) {
  if (z == 0.0) return 0.0;
  if (r == 0.0) return 0.0;
  return std::atan((u * v) / (z * r));
}

}  // namespace

double unit_potential(const Panel& p, const Eigen::Vector3d& point) {
  const LocalPoint q = to_local(p, point);
  const double xi[2] = {p.ha, -p.ha};
  const double eta[2] = {p.hb, -p.hb};
  double sum = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double s = (i == j) ? 1.0 : -1.0;
      const double u = xi[i] - q.x;
      const double v = eta[j] - q.y;
      const double r = std::sqrt(u * u + v * v + q.z * q.z);
      sum += s * (u * ln_term(v, r) + v * ln_term(u, r) -
                  q.z * atan_term(u, v, q.z, r));
    }
  }
  const double sigma = 1.0 / p.area();
  return sigma / constants::four_pi_eps0 * sum;
}

Eigen::Vector3d unit_field(const Panel& p, const Eigen::Vector3d& point) {
  const LocalPoint q = to_local(p, point);
  const double xi[2] = {p.ha, -p.ha};
  const double eta[2] = {p.hb, -p.hb};
  double ex = 0.0, ey = 0.0, ez = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double s = (i == j) ? 1.0 : -1.0;
      const double u = xi[i] - q.x;
      const double v = eta[j] - q.y;
      const double r = std::sqrt(u * u + v * v + q.z * q.z);
      ex += s * ln_term(v, r);
      ey += s * ln_term(u, r);
      ez += s * atan_term(u, v, q.z, r);
    }
  }
  const double scale = 1.0 / (p.area() * constants::four_pi_eps0);
  Eigen::Vector3d local(ex * scale, ey * scale, ez * scale);
  return local.x() * p.e1 + local.y() * p.e2 + local.z() * p.normal();
}

double self_potential(const Panel& p) {
  const double s = 4.0 * (p.ha * std::asinh(p.hb / p.ha) +
                          p.hb * std::asinh(p.ha / p.hb));
  return s / (constants::four_pi_eps0 * p.area());
}

double point_potential(const Panel& p, const Eigen::Vector3d& point) {
  const double d = (point - p.center).norm();
  return 1.0 / (constants::four_pi_eps0 * d);
}

}  // namespace resodrive::trap
