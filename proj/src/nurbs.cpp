#include "igabem/nurbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "igabem/error.hpp"

namespace igabem {

namespace {

double range_tolerance(const KnotVector& kv) { return 1e-12 * std::max(1.0, kv.back() - kv.front()); }

double clamp_parameter(const KnotVector& kv, double u) {
  const double tol = range_tolerance(kv);
  if (!(u >= kv.front() - tol && u <= kv.back() + tol)) {
    std::ostringstream msg;
    msg << "parameter " << u << " outside knot range [" << kv.front() << ", " << kv.back() << "]";
    throw DomainError(msg.str());
  }
  return std::clamp(u, kv.front(), kv.back());
}

// Nonzero basis functions and their derivatives up to `n` on `span`
// (Piegl & Tiller, algorithm A2.3). Result is (n+1) x (p+1).
MatX span_derivatives(const std::vector<double>& U, int p, int span, double u, int n) {
  MatX ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }
  MatX ders = MatX::Zero(n + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
  MatX a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= std::min(n, p); ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= std::min(n, p); ++k) {
    ders.row(k) *= factor;
    factor *= (p - k);
  }
  return ders;
}

void check_weights(const std::vector<double>& weights, std::size_t count) {
  if (weights.size() != count) throw GeometryError("weight count does not match control point count");
  for (double w : weights)
    if (!(w > 0.0)) throw GeometryError("NURBS weights must be positive");
}

// Homogeneous control polygon helpers shared by curves and surface rows.
struct Polygon {
  KnotVector kv;
  std::vector<Vec4> pw;
};

std::vector<Vec4> to_homogeneous(const std::vector<Vec3>& pts, const std::vector<double>& w) {
  std::vector<Vec4> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] << w[i] * pts[i], w[i];
  return out;
}

Polygon insert_knot_polygon(const Polygon& in, double u) {
  const auto& kv = in.kv;
  const int p = kv.degree();
  const double tol = range_tolerance(kv);
  if (!(u > kv.front() + tol && u < kv.back() - tol))
    throw DomainError("knot insertion parameter must lie strictly inside the knot range");
  const int s = kv.multiplicity(u);
  if (s + 1 > std::max(p, 1)) throw GeometryError("knot insertion would exceed multiplicity = degree");
  const auto& U = kv.knots();
  const int k = kv.find_span(u);
  const int n = kv.basis_count();
  std::vector<Vec4> q(n + 1);
  for (int i = 0; i <= k - p; ++i) q[i] = in.pw[i];
  for (int i = k - p + 1; i <= k - s; ++i) {
    const double alpha = (u - U[i]) / (U[i + p] - U[i]);
    q[i] = alpha * in.pw[i] + (1.0 - alpha) * in.pw[i - 1];
  }
  for (int i = k - s + 1; i <= n; ++i) q[i] = in.pw[i - 1];
  std::vector<double> knots = U;
  knots.insert(knots.begin() + k + 1, u);
  return {KnotVector(std::move(knots), p), std::move(q)};
}

// Degree elevation by exact interpolation: the elevated space contains the
// original one, so collocating at the new Greville abscissae (which satisfy
// Schoenberg-Whitney) recovers the elevated control polygon.
Polygon elevate_polygon(const Polygon& in) {
  const auto& kv = in.kv;
  const int p = kv.degree();
  if (p + 1 > kMaxDegree) throw GeometryError("order elevation beyond the maximum degree 4");
  std::vector<double> knots;
  for (double b : kv.breakpoints()) {
    const int m = kv.multiplicity(b) + 1;
    knots.insert(knots.end(), m, b);
  }
  KnotVector elevated(std::move(knots), p + 1);
  const auto tau = greville_abscissae(elevated);
  const int n = elevated.basis_count();
  MatX A(n, n);
  MatX rhs(n, 4);
  for (int i = 0; i < n; ++i) {
    const auto row = basis_values(elevated, tau[i]);
    for (int j = 0; j < n; ++j) A(i, j) = row[j];
    const auto old_row = basis_values(kv, tau[i]);
    Vec4 c = Vec4::Zero();
    for (std::size_t j = 0; j < old_row.size(); ++j) c += old_row[j] * in.pw[j];
    rhs.row(i) = c.transpose();
  }
  const MatX sol = A.partialPivLu().solve(rhs);
  std::vector<Vec4> q(n);
  for (int i = 0; i < n; ++i) q[i] = sol.row(i).transpose();
  // End points are interpolatory for clamped knots; pin them exactly.
  q.front() = in.pw.front();
  q.back() = in.pw.back();
  return {std::move(elevated), std::move(q)};
}

template <class Fn>
NurbsSurface refine_surface(const NurbsSurface& s, Direction dir, Fn&& refine) {
  const int nu = s.count_u(), nv = s.count_v();
  const auto pw = to_homogeneous(s.points(), s.weights());
  const bool along_u = dir == Direction::U;
  const int lines = along_u ? nv : nu;
  const int len = along_u ? nu : nv;
  std::vector<Polygon> refined;
  refined.reserve(lines);
  for (int l = 0; l < lines; ++l) {
    Polygon line{along_u ? s.knots_u() : s.knots_v(), {}};
    line.pw.resize(len);
    for (int i = 0; i < len; ++i) line.pw[i] = along_u ? pw[i + nu * l] : pw[l + nu * i];
    refined.push_back(refine(line));
  }
  const int new_len = static_cast<int>(refined.front().pw.size());
  const int new_nu = along_u ? new_len : nu;
  const int new_nv = along_u ? nv : new_len;
  std::vector<Vec3> pts(new_nu * new_nv);
  std::vector<double> w(new_nu * new_nv);
  for (int l = 0; l < lines; ++l) {
    for (int i = 0; i < new_len; ++i) {
      const int idx = along_u ? i + new_nu * l : l + new_nu * i;
      const Vec4& h = refined[l].pw[i];
      w[idx] = h[3];
      pts[idx] = h.head<3>() / h[3];
    }
  }
  const KnotVector& k = refined.front().kv;
  return along_u ? NurbsSurface(k, s.knots_v(), std::move(pts), std::move(w))
                 : NurbsSurface(s.knots_u(), k, std::move(pts), std::move(w));
}

}  // namespace

KnotVector::KnotVector(std::vector<double> knots, int degree) : knots_(std::move(knots)), degree_(degree) {
  if (degree_ < 0 || degree_ > kMaxDegree) throw GeometryError("degree must lie in [0, 4]");
  const int p = degree_;
  if (static_cast<int>(knots_.size()) < 2 * (p + 1)) throw GeometryError("knot vector too short for its degree");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (knots_[i] < knots_[i - 1]) throw GeometryError("knot vector must be nondecreasing");
  if (!(knots_.back() > knots_.front())) throw GeometryError("knot vector has zero length");
  for (int i = 0; i <= p; ++i) {
    if (knots_[i] != knots_.front() || knots_[knots_.size() - 1 - i] != knots_.back())
      throw GeometryError("knot vector must be open (end knots repeated degree+1 times)");
  }
  if (knots_[p + 1] == knots_.front() || knots_[knots_.size() - p - 2] == knots_.back())
    throw GeometryError("end knot multiplicity exceeds degree+1");
  for (double b : breakpoints()) {
    if (b == front() || b == back()) continue;
    if (multiplicity(b) > std::max(p, 1)) throw GeometryError("interior knot multiplicity exceeds degree");
  }
}

int KnotVector::find_span(double u) const {
  const int n = basis_count();
  if (u >= knots_[n]) return n - 1;
  if (u <= knots_[degree_]) return degree_;
  const auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, u);
  return static_cast<int>(it - knots_.begin()) - 1;
}

int KnotVector::multiplicity(double u) const {
  return static_cast<int>(std::count(knots_.begin(), knots_.end(), u));
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> out;
  for (double k : knots_)
    if (out.empty() || k != out.back()) out.push_back(k);
  return out;
}

std::vector<double> basis_values(const KnotVector& kv, double u) {
  u = clamp_parameter(kv, u);
  const int span = kv.find_span(u);
  const MatX d = span_derivatives(kv.knots(), kv.degree(), span, u, 0);
  std::vector<double> out(kv.basis_count(), 0.0);
  for (int j = 0; j <= kv.degree(); ++j) out[span - kv.degree() + j] = d(0, j);
  return out;
}

std::vector<double> basis_derivatives(const KnotVector& kv, double u, int order) {
  if (order < 1) throw DomainError("derivative order must be >= 1");
  u = clamp_parameter(kv, u);
  std::vector<double> out(kv.basis_count(), 0.0);
  if (order > kv.degree()) return out;
  const int span = kv.find_span(u);
  const MatX d = span_derivatives(kv.knots(), kv.degree(), span, u, order);
  for (int j = 0; j <= kv.degree(); ++j) out[span - kv.degree() + j] = d(order, j);
  return out;
}

std::vector<double> greville_abscissae(const KnotVector& kv) {
  const int p = kv.degree();
  const auto& U = kv.knots();
  std::vector<double> out(kv.basis_count());
  for (int i = 0; i < kv.basis_count(); ++i) {
    if (p == 0) {
      out[i] = 0.5 * (U[i] + U[i + 1]);
      continue;
    }
    double sum = 0.0;
    for (int k = 1; k <= p; ++k) sum += U[i + k];
    out[i] = sum / p;
  }
  return out;
}

SpanBasis span_basis(const KnotVector& kv, double u) {
  u = clamp_parameter(kv, u);
  const int p = kv.degree();
  const int span = kv.find_span(u);
  const MatX d = span_derivatives(kv.knots(), p, span, u, 1);
  SpanBasis out;
  out.first = span - p;
  out.count = p + 1;
  for (int j = 0; j <= p; ++j) {
    out.value[j] = d(0, j);
    out.deriv[j] = d(1, j);
  }
  return out;
}

NurbsCurve::NurbsCurve(KnotVector kv, std::vector<Vec3> points, std::vector<double> weights)
    : kv_(std::move(kv)), points_(std::move(points)), weights_(std::move(weights)) {
  if (weights_.empty()) weights_.assign(points_.size(), 1.0);
  if (static_cast<int>(points_.size()) != kv_.basis_count())
    throw GeometryError("curve control point count does not match knot vector");
  check_weights(weights_, points_.size());
}

Vec3 NurbsCurve::point(double u) const {
  const auto b = span_basis(kv_, u);
  Vec3 a = Vec3::Zero();
  double w = 0.0;
  for (int j = 0; j < b.count; ++j) {
    const int i = b.first + j;
    a += b.value[j] * weights_[i] * points_[i];
    w += b.value[j] * weights_[i];
  }
  return a / w;
}

Vec3 NurbsCurve::derivative(double u) const {
  const auto b = span_basis(kv_, u);
  Vec3 a = Vec3::Zero(), da = Vec3::Zero();
  double w = 0.0, dw = 0.0;
  for (int j = 0; j < b.count; ++j) {
    const int i = b.first + j;
    a += b.value[j] * weights_[i] * points_[i];
    da += b.deriv[j] * weights_[i] * points_[i];
    w += b.value[j] * weights_[i];
    dw += b.deriv[j] * weights_[i];
  }
  return (da - dw * a / w) / w;
}

NurbsSurface::NurbsSurface(KnotVector ku, KnotVector kv, std::vector<Vec3> points, std::vector<double> weights)
    : ku_(std::move(ku)), kv_(std::move(kv)), points_(std::move(points)), weights_(std::move(weights)) {
  if (weights_.empty()) weights_.assign(points_.size(), 1.0);
  if (static_cast<int>(points_.size()) != ku_.basis_count() * kv_.basis_count())
    throw GeometryError("surface control net size does not match knot vectors");
  check_weights(weights_, points_.size());
}

SurfaceBasis NurbsSurface::basis(double u, double v) const {
  const auto bu = span_basis(ku_, u);
  const auto bv = span_basis(kv_, v);
  SurfaceBasis out;
  double W = 0.0, Wu = 0.0, Wv = 0.0;
  const int nu = count_u();
  for (int b = 0; b < bv.count; ++b) {
    for (int a = 0; a < bu.count; ++a) {
      const int k = a + bu.count * b;
      const int idx = (bu.first + a) + nu * (bv.first + b);
      const double w = weights_[idx];
      out.index[k] = idx;
      out.value[k] = bu.value[a] * bv.value[b] * w;
      out.du[k] = bu.deriv[a] * bv.value[b] * w;
      out.dv[k] = bu.value[a] * bv.deriv[b] * w;
      W += out.value[k];
      Wu += out.du[k];
      Wv += out.dv[k];
    }
  }
  out.count = bu.count * bv.count;
  for (int k = 0; k < out.count; ++k) {
    const double n = out.value[k];
    out.value[k] = n / W;
    out.du[k] = (out.du[k] * W - n * Wu) / (W * W);
    out.dv[k] = (out.dv[k] * W - n * Wv) / (W * W);
  }
  return out;
}

SurfacePoint NurbsSurface::evaluate(double u, double v) const {
  const auto b = basis(u, v);
  SurfacePoint out{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  for (int k = 0; k < b.count; ++k) {
    const Vec3& x = points_[b.index[k]];
    out.point += b.value[k] * x;
    out.du += b.du[k] * x;
    out.dv += b.dv[k] * x;
  }
  return out;
}

ClosestPoint closest_point(const NurbsSurface& surface, const Vec3& x) {
  const auto bu = surface.knots_u().breakpoints();
  const auto bv = surface.knots_v().breakpoints();
  constexpr int kSamples = 4;
  ClosestPoint best{Vec2(bu.front(), bv.front()), Vec3::Zero(), std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i + 1 < bu.size(); ++i) {
    for (std::size_t j = 0; j + 1 < bv.size(); ++j) {
      for (int a = 0; a <= kSamples; ++a) {
        for (int b = 0; b <= kSamples; ++b) {
          const double u = bu[i] + (bu[i + 1] - bu[i]) * a / kSamples;
          const double v = bv[j] + (bv[j + 1] - bv[j]) * b / kSamples;
          const Vec3 p = surface.point(u, v);
          const double d = (p - x).norm();
          if (d < best.distance) best = {Vec2(u, v), p, d};
        }
      }
    }
  }
  Vec2 q = best.param;
  for (int it = 0; it < 50; ++it) {
    const auto s = surface.evaluate(q[0], q[1]);
    const Vec3 r = s.point - x;
    Eigen::Matrix2d h;
    h << s.du.dot(s.du), s.du.dot(s.dv), s.du.dot(s.dv), s.dv.dot(s.dv);
    const Vec2 g(s.du.dot(r), s.dv.dot(r));
    const Vec2 step = h.ldlt().solve(-g);
    if (!step.allFinite()) break;
    Vec2 next(std::clamp(q[0] + step[0], bu.front(), bu.back()), std::clamp(q[1] + step[1], bv.front(), bv.back()));
    const double moved = (next - q).norm();
    q = next;
    if (moved < 1e-15 * std::max(1.0, bu.back() - bu.front())) break;
  }
  const Vec3 p = surface.point(q[0], q[1]);
  const double d = (p - x).norm();
  if (d < best.distance) best = {q, p, d};
  return best;
}

NurbsCurve insert_knot(const NurbsCurve& curve, double u) {
  const auto r = insert_knot_polygon({curve.knots(), to_homogeneous(curve.points(), curve.weights())}, u);
  std::vector<Vec3> pts(r.pw.size());
  std::vector<double> w(r.pw.size());
  for (std::size_t i = 0; i < r.pw.size(); ++i) {
    w[i] = r.pw[i][3];
    pts[i] = r.pw[i].head<3>() / w[i];
  }
  return NurbsCurve(r.kv, std::move(pts), std::move(w));
}

NurbsSurface insert_knot(const NurbsSurface& surface, Direction dir, double u) {
  return refine_surface(surface, dir, [u](const Polygon& p) { return insert_knot_polygon(p, u); });
}

NurbsCurve elevate_order(const NurbsCurve& curve) {
  const auto r = elevate_polygon({curve.knots(), to_homogeneous(curve.points(), curve.weights())});
  std::vector<Vec3> pts(r.pw.size());
  std::vector<double> w(r.pw.size());
  for (std::size_t i = 0; i < r.pw.size(); ++i) {
    w[i] = r.pw[i][3];
    pts[i] = r.pw[i].head<3>() / w[i];
  }
  return NurbsCurve(r.kv, std::move(pts), std::move(w));
}

NurbsSurface elevate_order(const NurbsSurface& surface, Direction dir) {
  return refine_surface(surface, dir, [](const Polygon& p) { return elevate_polygon(p); });
}

}  // namespace igabem
