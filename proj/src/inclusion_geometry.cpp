#include "igabem/inclusion_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "igabem/error.hpp"

namespace igabem {

namespace {

Eigen::AlignedBox3d control_box(const GeneralInclusion& incl) {
  Eigen::AlignedBox3d box;
  for (const auto& p : incl.bottom.points()) box.extend(p);
  for (const auto& p : incl.top.points()) box.extend(p);
  return box;
}

}  // namespace

void validate(const GeneralInclusion& incl) {
  for (int n : incl.grid)
    if (n < 2) throw GeometryError("inclusion '" + incl.name + "': grid dimensions must be >= 2");
  for (int n : incl.region_subdivision)
    if (n < 1) throw GeometryError("inclusion '" + incl.name + "': region subdivision must be >= 1");
  const auto& b = incl.bottom;
  const auto& t = incl.top;
  if (b.knots_u().front() != 0.0 || b.knots_u().back() != 1.0 || b.knots_v().front() != 0.0 ||
      b.knots_v().back() != 1.0 || t.knots_u().front() != 0.0 || t.knots_u().back() != 1.0 ||
      t.knots_v().front() != 0.0 || t.knots_v().back() != 1.0)
    throw GeometryError("inclusion '" + incl.name + "': bounding surfaces must be parametrised over [0,1]^2");
  // Probe the mapping for degeneracy on a coarse lattice.
  for (double s : {0.0, 0.5, 1.0})
    for (double tt : {0.0, 0.5, 1.0})
      for (double r : {0.0, 0.5, 1.0}) (void)map_general(incl, s, tt, r);
}

void validate(const LinearInclusion& incl) {
  if (incl.axis.degree() != 1)
    throw GeometryError("bar '" + incl.name + "': axis must be a degree-1 NURBS curve");
  if (!(incl.radius > 0.0)) throw GeometryError("bar '" + incl.name + "': radius must be positive");
  if (incl.points < 2) throw GeometryError("bar '" + incl.name + "': at least 2 internal points required");
  const double len = incl.length();
  if (!(len > 0.0)) throw GeometryError("bar '" + incl.name + "': zero-length axis");
  const Vec3 dir = (incl.end() - incl.start()) / len;
  for (const auto& p : incl.axis.points()) {
    const Vec3 d = p - incl.start();
    if ((d - d.dot(dir) * dir).norm() > 1e-12 * len)
      throw GeometryError("bar '" + incl.name + "': control points must be collinear");
  }
  if (incl.radius >= 0.5 * len) throw GeometryError("bar '" + incl.name + "': radius must be small against the bar length");
}

MapResult map_general(const GeneralInclusion& incl, double s, double t, double r) {
  if (s < -1e-12 || s > 1 + 1e-12 || t < -1e-12 || t > 1 + 1e-12 || r < -1e-12 || r > 1 + 1e-12) {
    std::ostringstream msg;
    msg << "local coordinates (" << s << ", " << t << ", " << r << ") outside [0,1]^3";
    throw DomainError(msg.str());
  }
  const auto lo = incl.bottom.evaluate(s, t);
  const auto hi = incl.top.evaluate(s, t);
  MapResult out;
  out.point = (1.0 - r) * lo.point + r * hi.point;
  out.jacobi.row(0) = ((1.0 - r) * lo.du + r * hi.du).transpose();
  out.jacobi.row(1) = ((1.0 - r) * lo.dv + r * hi.dv).transpose();
  out.jacobi.row(2) = (hi.point - lo.point).transpose();
  out.jacobian = std::abs(out.jacobi.determinant());
  const double scale = out.jacobi.rowwise().norm().prod();
  if (!(out.jacobian > 1e-12 * scale) || scale == 0.0) {
    std::ostringstream msg;
    msg << "inclusion '" << incl.name << "': degenerate mapping at (s,t,r) = (" << s << ", " << t << ", " << r
        << ")";
    throw GeometryError(msg.str());
  }
  return out;
}

std::optional<Vec3> locate_in_general(const GeneralInclusion& incl, const Vec3& x, double tol) {
  auto box = control_box(incl);
  const double diam = box.diagonal().norm();
  const Vec3 pad = Vec3::Constant(1e-6 * diam);
  box.extend(box.min() - pad);
  box.extend(box.max() + pad);
  if (!box.contains(x)) return std::nullopt;
  Vec3 q(0.5, 0.5, 0.5);
  for (int it = 0; it < 60; ++it) {
    const auto m = map_general(incl, q[0], q[1], q[2]);
    const Vec3 res = x - m.point;
    if (res.norm() < 1e-14 * diam) break;
    Vec3 step = m.jacobi.transpose().partialPivLu().solve(res);
    Vec3 next = q + step;
    next[0] = std::clamp(next[0], 0.0, 1.0);
    next[1] = std::clamp(next[1], 0.0, 1.0);
    next[2] = std::clamp(next[2], -0.5, 1.5);
    if ((next - q).norm() < 1e-15) {
      q = next;
      break;
    }
    q = next;
  }
  q[2] = std::clamp(q[2], 0.0, 1.0);
  const auto m = map_general(incl, q[0], q[1], q[2]);
  if ((m.point - x).norm() > tol * diam) return std::nullopt;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(q[i]) < tol) q[i] = 0.0;
    if (std::abs(q[i] - 1.0) < tol) q[i] = 1.0;
  }
  return q;
}

LocalFrame bar_frame(const LinearInclusion& incl, double field_s, const Vec3& source) {
  const Vec3 field = incl.axis.point(field_s);
  const Vec3 V = incl.axis.derivative(field_s);
  LocalFrame f;
  f.jacobian = V.norm();
  f.z = V / f.jacobian;
  Vec3 vx = (source - field).cross(f.z);
  const double scale = std::max({(source - field).norm(), incl.length(), 1e-300});
  if (vx.norm() <= 1e-12 * scale) {
    // Source on the axis line: use the global y direction.
    vx = Vec3::UnitY().cross(f.z);
    if (vx.norm() < 1e-8) vx = Vec3::UnitZ().cross(f.z);
  }
  f.x = vx.normalized();
  f.y = f.z.cross(f.x);
  return f;
}

Mat3 transformation_matrix(const LocalFrame& frame) {
  Mat3 t;
  t.col(0) = frame.x;
  t.col(1) = frame.y;
  t.col(2) = frame.z;
  return t;
}

std::vector<GridPoint> grid_points(const GeneralInclusion& incl) {
  std::vector<GridPoint> out;
  out.reserve(incl.grid_count());
  const auto& n = incl.grid;
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const Vec3 local(double(i) / (n[0] - 1), double(j) / (n[1] - 1), double(k) / (n[2] - 1));
        out.push_back({local, map_general(incl, local[0], local[1], local[2]).point});
      }
    }
  }
  return out;
}

std::vector<GridPoint> grid_points(const LinearInclusion& incl) {
  std::vector<GridPoint> out;
  out.reserve(incl.points);
  for (int j = 0; j < incl.points; ++j) {
    const double s = double(j) / (incl.points - 1);
    out.push_back({Vec3(s, 0.0, 0.0), incl.axis.point(s)});
  }
  return out;
}

std::vector<BarSubregion> bar_subregions(const LinearInclusion& incl) {
  std::vector<BarSubregion> out;
  const int count = incl.points - 1;
  const double H = incl.length() / count;
  for (int m = 0; m < count; ++m) {
    BarSubregion b;
    b.s0 = double(m) / count;
    b.s1 = double(m + 1) / count;
    b.length = H;
    b.radius = incl.radius;
    b.start = incl.axis.point(b.s0);
    b.end = incl.axis.point(b.s1);
    b.midpoint = 0.5 * (b.start + b.end);
    out.push_back(b);
  }
  return out;
}

}  // namespace igabem
