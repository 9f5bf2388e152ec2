#pragma once

#include <array>
#include <vector>

#include "igabem/types.hpp"

namespace igabem {

inline constexpr int kMaxDegree = 4;

/// Open (clamped) knot vector. The first and last knots are repeated
/// degree+1 times; interior multiplicities never exceed the degree.
class KnotVector {
 public:
  KnotVector() = default;
  KnotVector(std::vector<double> knots, int degree);

  const std::vector<double>& knots() const { return knots_; }
  int degree() const { return degree_; }
  int basis_count() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }

  /// Index s with knots[s] <= u < knots[s+1] (last nonempty span for u == back()).
  int find_span(double u) const;
  int multiplicity(double u) const;
  /// Distinct knot values, including the end knots.
  std::vector<double> breakpoints() const;

  bool operator==(const KnotVector&) const = default;

 private:
  std::vector<double> knots_;
  int degree_ = 0;
};

/// Values of all basis functions at u (Cox-de Boor).
std::vector<double> basis_values(const KnotVector& kv, double u);

/// Derivatives of the given order of all basis functions at u.
std::vector<double> basis_derivatives(const KnotVector& kv, double u, int order);

/// Greville abscissae: one collocation parameter per basis function.
std::vector<double> greville_abscissae(const KnotVector& kv);

/// Nonzero B-spline functions on one span with their first derivatives.
struct SpanBasis {
  int first = 0;  // index of the first nonzero function
  int count = 0;
  std::array<double, kMaxDegree + 1> value{};
  std::array<double, kMaxDegree + 1> deriv{};
};

SpanBasis span_basis(const KnotVector& kv, double u);

class NurbsCurve {
 public:
  NurbsCurve() = default;
  NurbsCurve(KnotVector kv, std::vector<Vec3> points, std::vector<double> weights = {});

  const KnotVector& knots() const { return kv_; }
  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  int degree() const { return kv_.degree(); }

  Vec3 point(double u) const;
  Vec3 derivative(double u) const;

 private:
  KnotVector kv_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
};

/// Rational basis of a surface at one parameter pair, restricted to the
/// (degree_u+1)*(degree_v+1) nonzero functions.
struct SurfaceBasis {
  static constexpr int kCapacity = (kMaxDegree + 1) * (kMaxDegree + 1);
  int count = 0;
  std::array<int, kCapacity> index{};
  std::array<double, kCapacity> value{};
  std::array<double, kCapacity> du{};
  std::array<double, kCapacity> dv{};
};

struct SurfacePoint {
  Vec3 point;
  Vec3 du;
  Vec3 dv;
};

/// Tensor-product NURBS surface. Control points are stored with the
/// u index running fastest: index = i + count_u * j.
class NurbsSurface {
 public:
  NurbsSurface() = default;
  NurbsSurface(KnotVector ku, KnotVector kv, std::vector<Vec3> points,
               std::vector<double> weights = {});

  const KnotVector& knots_u() const { return ku_; }
  const KnotVector& knots_v() const { return kv_; }
  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  int count_u() const { return ku_.basis_count(); }
  int count_v() const { return kv_.basis_count(); }
  int size() const { return static_cast<int>(points_.size()); }

  SurfaceBasis basis(double u, double v) const;
  SurfacePoint evaluate(double u, double v) const;
  Vec3 point(double u, double v) const { return evaluate(u, v).point; }

 private:
  KnotVector ku_;
  KnotVector kv_;
  std::vector<Vec3> points_;
  std::vector<double> weights_;
};

struct ClosestPoint {
  Vec2 param;
  Vec3 point;
  double distance = 0.0;
};

/// Closest point on the surface by sampling each knot span and refining with
/// Gauss-Newton, parameters clamped to the knot range.
ClosestPoint closest_point(const NurbsSurface& surface, const Vec3& x);

enum class Direction { U, V };

NurbsCurve insert_knot(const NurbsCurve& curve, double u);
NurbsSurface insert_knot(const NurbsSurface& surface, Direction dir, double u);
NurbsCurve elevate_order(const NurbsCurve& curve);
NurbsSurface elevate_order(const NurbsSurface& surface, Direction dir);

}  // namespace igabem
