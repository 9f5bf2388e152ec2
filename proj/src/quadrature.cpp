#include "igabem/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <sstream>

#include "igabem/error.hpp"
#include "igabem/grid_interp.hpp"

namespace igabem {

namespace {

constexpr int kMaxGauss = 64;

// Legendre polynomial P_n(x) and its derivative.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

GaussRule make_gauss(int n) {
  GaussRule rule;
  rule.order = n;
  if (n == 1) {
    rule.nodes = {0.0};
    rule.weights = {2.0};
    return rule;
  }
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

struct SurfaceEval {
  SurfaceBasis basis;
  Vec3 point;
  Vec3 du;
  Vec3 dv;
};

SurfaceEval evaluate_with_basis(const NurbsSurface& s, double u, double v) {
  SurfaceEval e{s.basis(u, v), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  for (int k = 0; k < e.basis.count; ++k) {
    const Vec3& x = s.points()[e.basis.index[k]];
    e.point += e.basis.value[k] * x;
    e.du += e.basis.du[k] * x;
    e.dv += e.basis.dv[k] * x;
  }
  return e;
}

void emit_surface_point(const NurbsSurface& s, double u, double v, double w, const SurfaceVisitor& visit) {
  const auto e = evaluate_with_basis(s, u, v);
  const Vec3 n = e.du.cross(e.dv);
  const double jac = n.norm();
  if (!(jac > 0.0)) {
    std::ostringstream msg;
    msg << "degenerate surface Jacobian at (" << u << ", " << v << ")";
    throw GeometryError(msg.str());
  }
  visit({Vec2(u, v), e.point, n / jac, w * jac}, e.basis);
}

void regular_rect(const NurbsSurface& s, const Vec3& source, double u0, double u1, double v0, double v1, int depth,
                  const QuadratureOptions& opts, const SurfaceVisitor& visit) {
  std::array<Vec3, 9> pts;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) pts[a + 3 * b] = s.point(u0 + 0.5 * a * (u1 - u0), v0 + 0.5 * b * (v1 - v0));
  double size = 0.0;
  for (int i : {0, 2, 6, 8})
    for (int j : {0, 2, 6, 8}) size = std::max(size, (pts[i] - pts[j]).norm());
  double dist = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) dist = std::min(dist, (p - source).norm());
  if (dist < opts.subdivision_ratio * size && depth < opts.max_depth) {
    const double um = 0.5 * (u0 + u1), vm = 0.5 * (v0 + v1);
    regular_rect(s, source, u0, um, v0, vm, depth + 1, opts, visit);
    regular_rect(s, source, um, u1, v0, vm, depth + 1, opts, visit);
    regular_rect(s, source, u0, um, vm, v1, depth + 1, opts, visit);
    regular_rect(s, source, um, u1, vm, v1, depth + 1, opts, visit);
    return;
  }
  const auto& g = gauss_rule(near_field_order(size, dist, opts));
  const double ju = 0.5 * (u1 - u0), jv = 0.5 * (v1 - v0);
  for (int b = 0; b < g.order; ++b) {
    const double v = v0 + jv * (1.0 + g.nodes[b]);
    for (int a = 0; a < g.order; ++a) {
      const double u = u0 + ju * (1.0 + g.nodes[a]);
      emit_surface_point(s, u, v, g.weights[a] * g.weights[b] * ju * jv, visit);
    }
  }
}

// Polar coordinates about p over the parameter triangle (p, a, b): the
// radial Jacobian cancels the 1/r singularity and the angular integrand
// stays smooth even for slender triangles.
void collapsed_triangle(const NurbsSurface& s, const Vec2& p, const Vec2& a, const Vec2& b, int order,
                        const SurfaceVisitor& visit) {
  const Vec2 ea = a - p, eb = b - p;
  const double cross = ea[0] * eb[1] - ea[1] * eb[0];
  if (std::abs(cross) <= 1e-14 * std::max(ea.squaredNorm(), eb.squaredNorm())) return;
  const double th_a = std::atan2(ea[1], ea[0]);
  const double dth = std::atan2(cross, ea.dot(eb));
  Vec2 nrm(b[1] - a[1], a[0] - b[0]);
  nrm.normalize();
  const double h = nrm.dot(ea);  // signed distance from p to the edge line
  const auto& g = gauss_rule(order);
  for (int j = 0; j < g.order; ++j) {
    const double th = th_a + 0.5 * dth * (1.0 + g.nodes[j]);
    const Vec2 w(std::cos(th), std::sin(th));
    const double len = h / nrm.dot(w);
    for (int i = 0; i < g.order; ++i) {
      const double rho = 0.5 * (1.0 + g.nodes[i]);
      const Vec2 q = p + rho * len * w;
      emit_surface_point(s, q[0], q[1], 0.25 * g.weights[i] * g.weights[j] * std::abs(dth) * rho * len * len, visit);
    }
  }
}

void singular_rect(const NurbsSurface& s, const Vec2& p, double u0, double u1, double v0, double v1,
                   const QuadratureOptions& opts, const SurfaceVisitor& visit) {
  const Vec2 q(std::clamp(p[0], u0, u1), std::clamp(p[1], v0, v1));
  const int n = opts.singular_order;
  if (opts.fan_layout == FanLayout::Triangles) {
    const std::array<Vec2, 4> c{Vec2(u0, v0), Vec2(u1, v0), Vec2(u1, v1), Vec2(u0, v1)};
    for (int e = 0; e < 4; ++e) collapsed_triangle(s, q, c[e], c[(e + 1) % 4], n, visit);
    return;
  }
  const std::array<double, 3> us{u0, q[0], u1};
  const std::array<double, 3> vs{v0, q[1], v1};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double ua = us[a], ub = us[a + 1], va = vs[b], vb = vs[b + 1];
      if (ub - ua <= 0.0 || vb - va <= 0.0) continue;
      // Corner of this piece opposite to the singular point.
      const Vec2 far(a == 0 ? ua : ub, b == 0 ? va : vb);
      const Vec2 side1(far[0], q[1]);
      const Vec2 side2(q[0], far[1]);
      collapsed_triangle(s, q, side1, far, n, visit);
      collapsed_triangle(s, q, far, side2, n, visit);
    }
  }
}

template <class Fn>
void for_each_corner_sample(const GeneralInclusion& incl, const IntegrationRegion& r, Fn&& fn) {
  for (int c = 0; c < 3; ++c)
    for (int b = 0; b < 3; ++b)
      for (int a = 0; a < 3; ++a) {
        const Vec3 l(r.lo[0] + 0.5 * a * (r.hi[0] - r.lo[0]), r.lo[1] + 0.5 * b * (r.hi[1] - r.lo[1]),
                     r.lo[2] + 0.5 * c * (r.hi[2] - r.lo[2]));
        fn(a, b, c, map_general(incl, l[0], l[1], l[2]).point);
      }
}

void regular_box(const GeneralInclusion& incl, const IntegrationRegion& r, const Vec3& source, int depth,
                 const QuadratureOptions& opts, const VolumeVisitor& visit) {
  std::array<Vec3, 8> corners;
  double dist = std::numeric_limits<double>::infinity();
  for_each_corner_sample(incl, r, [&](int a, int b, int c, const Vec3& x) {
    if (a != 1 && b != 1 && c != 1) corners[a / 2 + 2 * (b / 2) + 4 * (c / 2)] = x;
    dist = std::min(dist, (x - source).norm());
  });
  double size = 0.0;
  for (int i = 0; i < 4; ++i) size = std::max(size, (corners[i] - corners[7 - i]).norm());
  if (dist < opts.subdivision_ratio * size && depth < opts.max_depth) {
    const Vec3 mid = 0.5 * (r.lo + r.hi);
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b)
        for (int a = 0; a < 2; ++a) {
          IntegrationRegion child;
          child.lo = Vec3(a ? mid[0] : r.lo[0], b ? mid[1] : r.lo[1], c ? mid[2] : r.lo[2]);
          child.hi = Vec3(a ? r.hi[0] : mid[0], b ? r.hi[1] : mid[1], c ? r.hi[2] : mid[2]);
          regular_box(incl, child, source, depth + 1, opts, visit);
        }
    return;
  }
  const auto& g = gauss_rule(near_field_order(size, dist, opts));
  const Vec3 half = 0.5 * (r.hi - r.lo);
  const double jl = r.local_jacobian();
  for (int k = 0; k < g.order; ++k)
    for (int j = 0; j < g.order; ++j)
      for (int i = 0; i < g.order; ++i) {
        const Vec3 l = r.lo + half.cwiseProduct(Vec3(1.0 + g.nodes[i], 1.0 + g.nodes[j], 1.0 + g.nodes[k]));
        const auto m = map_general(incl, l[0], l[1], l[2]);
        visit({l, m.point, g.weights[i] * g.weights[j] * g.weights[k] * jl * m.jacobian});
      }
}

// Pyramids with apex at `corner` over the three faces of the box not
// touching it: s = (1 - rho) s0(sigma, tau) + rho corner.
void corner_pyramids(const GeneralInclusion& incl, const Vec3& lo, const Vec3& hi, const Vec3& corner, int order,
                     const VolumeVisitor& visit) {
  const auto& g = gauss_rule(order);
  const Vec3 h = hi - lo;
  for (int d = 0; d < 3; ++d) {
    const int e1 = (d + 1) % 3, e2 = (d + 2) % 3;
    const double opp = corner[d] == lo[d] ? hi[d] : lo[d];
    const double base = 0.25 * h[e1] * h[e2] * h[d];
    for (int k = 0; k < g.order; ++k) {
      const double rho = 0.5 * (1.0 + g.nodes[k]);
      const double wr = 0.5 * g.weights[k] * (1.0 - rho) * (1.0 - rho) * base;
      for (int j = 0; j < g.order; ++j) {
        for (int i = 0; i < g.order; ++i) {
          Vec3 s0;
          s0[d] = opp;
          s0[e1] = lo[e1] + 0.5 * h[e1] * (1.0 + g.nodes[i]);
          s0[e2] = lo[e2] + 0.5 * h[e2] * (1.0 + g.nodes[j]);
          const Vec3 l = (1.0 - rho) * s0 + rho * corner;
          const auto m = map_general(incl, l[0], l[1], l[2]);
          visit({l, m.point, wr * g.weights[i] * g.weights[j] * m.jacobian});
        }
      }
    }
  }
}

void accumulate_E(const GeneralInclusion& incl, const Vec3& source, const ElasticConstants& mat,
                  const VolumeQuadPoint& q, std::vector<Mat36>& out) {
  const Mat36 e = kernel_E(source, q.point, mat) * q.weight;
  for (const auto& sw : sigma_interpolation(incl, q.local)) out[sw.grid] += sw.weight * e;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
  static const std::vector<GaussRule> rules = [] {
    std::vector<GaussRule> r(kMaxGauss + 1);
    for (int i = 1; i <= kMaxGauss; ++i) r[i] = make_gauss(i);
    return r;
  }();
  if (n < 1 || n > kMaxGauss) throw DomainError("Gauss order must lie in [1, 64], got " + std::to_string(n));
  return rules[n];
}

void validate(const QuadratureOptions& o) {
  if (o.base_order < 1 || o.base_order > kMaxGauss) throw DomainError("quadrature base_order out of range");
  if (o.max_order < o.base_order || o.max_order > kMaxGauss) throw DomainError("quadrature max_order out of range");
  if (!(o.subdivision_ratio >= 0.0)) throw DomainError("quadrature subdivision_ratio must be >= 0");
  if (o.max_depth < 0 || o.max_depth > 12) throw DomainError("quadrature max_depth out of range");
  if (o.singular_order < 1 || o.singular_order > kMaxGauss) throw DomainError("quadrature singular_order out of range");
  if (o.volume_singular_order < 1 || o.volume_singular_order > kMaxGauss)
    throw DomainError("quadrature volume_singular_order out of range");
}

int near_field_order(double size, double distance, const QuadratureOptions& opts) {
  if (!(distance > 0.0)) return opts.max_order;
  const double extra = std::ceil(4.0 * size / distance);
  if (extra >= opts.max_order) return opts.max_order;
  return std::min(opts.max_order, opts.base_order + static_cast<int>(extra));
}

void for_each_surface_point(const NurbsSurface& surface, const Vec3& source, const std::optional<Vec2>& source_param,
                            const QuadratureOptions& opts, const SurfaceVisitor& visit) {
  const auto bu = surface.knots_u().breakpoints();
  const auto bv = surface.knots_v().breakpoints();
  const double tol_u = 1e-12 * (bu.back() - bu.front());
  const double tol_v = 1e-12 * (bv.back() - bv.front());
  for (std::size_t j = 0; j + 1 < bv.size(); ++j) {
    for (std::size_t i = 0; i + 1 < bu.size(); ++i) {
      const double u0 = bu[i], u1 = bu[i + 1], v0 = bv[j], v1 = bv[j + 1];
      const bool singular = source_param && (*source_param)[0] >= u0 - tol_u && (*source_param)[0] <= u1 + tol_u &&
                            (*source_param)[1] >= v0 - tol_v && (*source_param)[1] <= v1 + tol_v;
      if (singular)
        singular_rect(surface, *source_param, u0, u1, v0, v1, opts, visit);
      else
        regular_rect(surface, source, u0, u1, v0, v1, 0, opts, visit);
    }
  }
}

PatchIntegrals integrate_patch_regular(const NurbsSurface& surface, const Vec3& source, const ElasticConstants& mat,
                                       const QuadratureOptions& opts) {
  PatchIntegrals out;
  out.U.assign(surface.size(), Mat3::Zero());
  out.T.assign(surface.size(), Mat3::Zero());
  for_each_surface_point(surface, source, std::nullopt, opts, [&](const SurfaceQuadPoint& q, const SurfaceBasis& b) {
    const Mat3 u = kelvin_U(source, q.point, mat) * q.weight;
    const Mat3 t = kelvin_T(source, q.point, q.normal, mat) * q.weight;
    out.T_total += t;
    for (int k = 0; k < b.count; ++k) {
      out.U[b.index[k]] += b.value[k] * u;
      out.T[b.index[k]] += b.value[k] * t;
    }
  });
  return out;
}

PatchIntegrals integrate_patch_singular(const NurbsSurface& surface, const Vec2& source_param,
                                        const ElasticConstants& mat, const QuadratureOptions& opts) {
  const Vec3 source = surface.point(source_param[0], source_param[1]);
  const auto at = surface.basis(source_param[0], source_param[1]);
  std::vector<double> r0(surface.size(), 0.0);
  for (int k = 0; k < at.count; ++k) r0[at.index[k]] = at.value[k];

  PatchIntegrals out;
  out.U.assign(surface.size(), Mat3::Zero());
  out.T.assign(surface.size(), Mat3::Zero());
  std::vector<double> diff(surface.size(), 0.0);
  for_each_surface_point(surface, source, source_param, opts, [&](const SurfaceQuadPoint& q, const SurfaceBasis& b) {
    const Mat3 u = kelvin_U(source, q.point, mat) * q.weight;
    const Mat3 t = kelvin_T(source, q.point, q.normal, mat) * q.weight;
    // R_k(y) - R_k(source) over every function that is nonzero at either point.
    for (int k = 0; k < b.count; ++k) {
      out.U[b.index[k]] += b.value[k] * u;
      diff[b.index[k]] += b.value[k];
    }
    for (int k = 0; k < at.count; ++k) diff[at.index[k]] -= r0[at.index[k]];
    for (int k = 0; k < b.count; ++k) {
      const int idx = b.index[k];
      if (diff[idx] != 0.0) out.T[idx] += diff[idx] * t;
      diff[idx] = 0.0;
    }
    for (int k = 0; k < at.count; ++k) {
      const int idx = at.index[k];
      if (diff[idx] != 0.0) out.T[idx] += diff[idx] * t;
      diff[idx] = 0.0;
    }
  });
  return out;
}

bool IntegrationRegion::contains(const Vec3& local, double tol) const {
  for (int d = 0; d < 3; ++d)
    if (local[d] < lo[d] - tol || local[d] > hi[d] + tol) return false;
  return true;
}

std::vector<IntegrationRegion> integration_regions(const GeneralInclusion& incl) {
  std::array<std::vector<double>, 3> cuts;
  for (int d = 0; d < 3; ++d) {
    const int n = incl.grid[d];
    const double h = 1.0 / (n - 1);
    std::vector<double> base;
    if (incl.sigma_mode == SigmaMode::Linear) {
      for (int i = 0; i < n; ++i) base.push_back(i * h);
    } else {
      base.push_back(0.0);
      for (int i = 0; i + 1 < n; ++i) base.push_back((i + 0.5) * h);
      base.push_back(1.0);
    }
    base.back() = 1.0;
    const int sub = incl.region_subdivision[d];
    for (std::size_t i = 0; i + 1 < base.size(); ++i)
      for (int k = 0; k < sub; ++k) cuts[d].push_back(base[i] + (base[i + 1] - base[i]) * k / sub);
    cuts[d].push_back(1.0);
  }
  std::vector<IntegrationRegion> out;
  for (std::size_t k = 0; k + 1 < cuts[2].size(); ++k)
    for (std::size_t j = 0; j + 1 < cuts[1].size(); ++j)
      for (std::size_t i = 0; i + 1 < cuts[0].size(); ++i)
        out.push_back({Vec3(cuts[0][i], cuts[1][j], cuts[2][k]), Vec3(cuts[0][i + 1], cuts[1][j + 1], cuts[2][k + 1])});
  return out;
}

void for_each_volume_point_regular(const GeneralInclusion& incl, const IntegrationRegion& region, const Vec3& source,
                                   const QuadratureOptions& opts, const VolumeVisitor& visit) {
  regular_box(incl, region, source, 0, opts, visit);
}

void for_each_volume_point_singular(const GeneralInclusion& incl, const IntegrationRegion& region,
                                    const Vec3& source_local, int order, const VolumeVisitor& visit) {
  constexpr double tol = 1e-10;
  if (!region.contains(source_local, tol)) throw DomainError("singular volume integration: source outside region");
  std::array<std::vector<double>, 3> cuts;
  Vec3 corner;
  for (int d = 0; d < 3; ++d) {
    const double lo = region.lo[d], hi = region.hi[d], s = source_local[d];
    if (std::abs(s - lo) <= tol) {
      cuts[d] = {lo, hi};
      corner[d] = lo;
    } else if (std::abs(s - hi) <= tol) {
      cuts[d] = {lo, hi};
      corner[d] = hi;
    } else {
      cuts[d] = {lo, s, hi};
      corner[d] = s;
    }
  }
  for (std::size_t k = 0; k + 1 < cuts[2].size(); ++k)
    for (std::size_t j = 0; j + 1 < cuts[1].size(); ++j)
      for (std::size_t i = 0; i + 1 < cuts[0].size(); ++i) {
        const Vec3 lo(cuts[0][i], cuts[1][j], cuts[2][k]);
        const Vec3 hi(cuts[0][i + 1], cuts[1][j + 1], cuts[2][k + 1]);
        corner_pyramids(incl, lo, hi, corner, order, visit);
      }
}

std::vector<Mat36> integrate_volume_regular(const GeneralInclusion& incl, const IntegrationRegion& region,
                                            const Vec3& source, const ElasticConstants& mat,
                                            const QuadratureOptions& opts) {
  if (const auto loc = locate_in_general(incl, source); loc && region.contains(*loc))
    throw DomainError("regular volume integration requested for a source inside the region");
  std::vector<Mat36> out(incl.grid_count(), Mat36::Zero());
  for_each_volume_point_regular(incl, region, source, opts,
                                [&](const VolumeQuadPoint& q) { accumulate_E(incl, source, mat, q, out); });
  return out;
}

std::vector<Mat36> integrate_volume_singular(const GeneralInclusion& incl, const IntegrationRegion& region,
                                             const Vec3& source, const Vec3& source_local,
                                             const ElasticConstants& mat, int order) {
  std::vector<Mat36> out(incl.grid_count(), Mat36::Zero());
  for_each_volume_point_singular(incl, region, source_local, order,
                                 [&](const VolumeQuadPoint& q) { accumulate_E(incl, source, mat, q, out); });
  return out;
}

std::vector<Mat36> integrate_inclusion(const GeneralInclusion& incl, const Vec3& source, const ElasticConstants& mat,
                                       const QuadratureOptions& opts) {
  const auto loc = locate_in_general(incl, source);
  std::vector<Mat36> out(incl.grid_count(), Mat36::Zero());
  for (const auto& region : integration_regions(incl)) {
    const VolumeVisitor acc = [&](const VolumeQuadPoint& q) { accumulate_E(incl, source, mat, q, out); };
    if (loc && region.contains(*loc))
      for_each_volume_point_singular(incl, region, *loc, opts.volume_singular_order, acc);
    else
      for_each_volume_point_regular(incl, region, source, opts, acc);
  }
  return out;
}

Mat36 bar_integral_regular_local(double y, double z, double H, double R, const ElasticConstants& mat) {
  const double C3 = mat.C3;
  const double P = mat.C * kPi * R * R;
  const double d = H - z;
  const double a = std::sqrt(y * y + d * d);  // r_c1
  const double b = std::sqrt(y * y + z * z);  // r_c0
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("bar regular integral: source at a subregion end");
  const double a3 = a * a * a, b3 = b * b * b;
  Mat36 e = Mat36::Zero();
  e(0, 5) = 2.0 * P * C3 * (1.0 / a - 1.0 / b);
  e(1, 2) = -P * y * (d / a3 + z / b3);
  e(1, 4) = 2.0 * P * ((y * y + C3 * a * a) / a3 - (y * y + C3 * b * b) / b3);
  e(2, 0) = P * (1.0 / b - 1.0 / a);
  e(2, 1) = P * (z * z / b3 - d * d / a3);
  e(2, 2) = P * (((1.0 + 2.0 * C3) * y * y + 2.0 * (1.0 + C3) * d * d) / a3 -
                 ((1.0 + 2.0 * C3) * y * y + 2.0 * (1.0 + C3) * z * z) / b3);
  if (y > 0.0) {
    e(0, 3) = 2.0 * P * C3 / y * (d / a + z / b);
    e(1, 0) = -P / y * (d / a + z / b);
    e(1, 1) = P / y *
              ((2.0 * (1.0 + C3) * y * y + (1.0 + 2.0 * C3) * d * d) * d / a3 +
               z / b3 * (2.0 * (1.0 + C3) * y * y + (1.0 + 2.0 * C3) * z * z));
    e(2, 4) = 2.0 * P / y * ((C3 * a * a + d * d) * d / a3 + z / b3 * (z * z + C3 * b * b));
  }
  return e;
}

Mat36 bar_integral_singular_local(double H, double R, const ElasticConstants& mat) {
  const double C3 = mat.C3;
  const double th = std::atan(R / H);
  const double c = std::cos(th), s = std::sin(th);
  const double cp = mat.C * kPi;
  Mat36 e = Mat36::Zero();
  const double e16 = 0.5 * cp *
                     (H * (8.0 + 8.0 * C3 - (9.0 + 8.0 * C3) * c + std::cos(3.0 * th)) -
                      4.0 * R * (-1.0 - 2.0 * C3 + 2.0 * C3 * s + s * s * s));
  const double e31 = -cp * (R + s * (0.5 * H * std::sin(2.0 * th) + R * (s * s - 2.0)));
  const double e33 = cp * (-2.0 * H * (c - 1.0) * (2.0 * C3 + c + c * c) +
                           R * (2.0 + 4.0 * C3 - (3.0 + 4.0 * C3 + std::cos(2.0 * th)) * s));
  e(0, 5) = e16;
  e(1, 4) = e16;
  e(2, 0) = e31;
  e(2, 1) = e31;
  e(2, 2) = e33;
  return e;
}

Mat36 bar_integral(const LinearInclusion& incl, const BarSubregion& sub, const Vec3& source,
                   const ElasticConstants& mat) {
  const LocalFrame frame = bar_frame(incl, sub.s0, source);
  const Mat3 T = transformation_matrix(frame);
  const Vec3 rel = source - sub.start;
  const double H = sub.length, R = sub.radius;
  const double z = rel.dot(frame.z);
  double y = std::max(0.0, rel.dot(frame.y));
  const double tol = 1e-9 * H;
  Mat36 local = Mat36::Zero();
  if (y <= R && z >= -tol && z <= H + tol) {
    // Inside the cylinder: treat the source as lying on the axis and split
    // the piece at its foot.
    const double zc = std::clamp(z, 0.0, H);
    if (zc > tol) local += bar_integral_singular_local(zc, R, mat);
    if (H - zc > tol) local -= bar_integral_singular_local(H - zc, R, mat);
  } else {
    if (y < 1e-9 * H) y = 0.0;
    local = bar_integral_regular_local(y, z, H, R, mat);
  }
  return T * local;
}

}  // namespace igabem
