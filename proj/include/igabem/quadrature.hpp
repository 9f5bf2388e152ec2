#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "igabem/inclusion_geometry.hpp"
#include "igabem/kernels.hpp"
#include "igabem/nurbs.hpp"

namespace igabem {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  int order = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule with n points, 1 <= n <= 64.
const GaussRule& gauss_rule(int n);

enum class FanLayout {
  Triangles,   // one triangle per element edge, apex at the singular point
  Rectangles,  // element split at the singular point, two triangles per piece
};

struct QuadratureOptions {
  int base_order = 4;
  int max_order = 16;
  double subdivision_ratio = 0.5;  // subdivide when distance/size falls below
  int max_depth = 6;
  int singular_order = 12;         // per direction on collapsed triangles
  int volume_singular_order = 8;   // per direction on pyramids
  FanLayout fan_layout = FanLayout::Triangles;
};

void validate(const QuadratureOptions& opts);

/// base + ceil(4 size/distance), capped at max_order.
int near_field_order(double size, double distance, const QuadratureOptions& opts);

struct SurfaceQuadPoint {
  Vec2 param;
  Vec3 point;
  Vec3 normal;    // unit, du x dv orientation
  double weight;  // Gauss weight times surface Jacobian
};

using SurfaceVisitor = std::function<void(const SurfaceQuadPoint&, const SurfaceBasis&)>;

/// Visits quadrature points over every knot-span element of the surface.
/// Elements containing `source_param` use the triangle fan; the rest use
/// Gauss rules whose order grows with proximity to `source`.
void for_each_surface_point(const NurbsSurface& surface, const Vec3& source, const std::optional<Vec2>& source_param,
                            const QuadratureOptions& opts, const SurfaceVisitor& visit);

/// Per control point integrals of U R_k and T R_k over one patch.
struct PatchIntegrals {
  std::vector<Mat3> U;
  std::vector<Mat3> T;
  Mat3 T_total = Mat3::Zero();  // integral of T alone; zero in the singular case
};

/// Source away from the patch.
PatchIntegrals integrate_patch_regular(const NurbsSurface& surface, const Vec3& source, const ElasticConstants& mat,
                                       const QuadratureOptions& opts);

/// Source on the patch at `source_param`. T entries hold the regularised
/// integrals of T (R_k(y) - R_k(source)), so they sum to zero.
PatchIntegrals integrate_patch_singular(const NurbsSurface& surface, const Vec2& source_param,
                                        const ElasticConstants& mat, const QuadratureOptions& opts);

/// Box in local (s, t, r) coordinates of a general inclusion.
struct IntegrationRegion {
  Vec3 lo;
  Vec3 hi;

  double local_jacobian() const { return (hi - lo).prod() / 8.0; }
  bool contains(const Vec3& local, double tol = 1e-10) const;
};

/// Linear sigma mode: the grid cells. Constant mode: the boxes around each
/// grid point. Each is further split by region_subdivision.
std::vector<IntegrationRegion> integration_regions(const GeneralInclusion& incl);

struct VolumeQuadPoint {
  Vec3 local;
  Vec3 point;
  double weight;  // includes the mapping Jacobian
};

using VolumeVisitor = std::function<void(const VolumeQuadPoint&)>;

void for_each_volume_point_regular(const GeneralInclusion& incl, const IntegrationRegion& region, const Vec3& source,
                                   const QuadratureOptions& opts, const VolumeVisitor& visit);

/// Region containing the source: split at the source's local coordinates so
/// it becomes a corner of every piece, then three pyramids per piece.
void for_each_volume_point_singular(const GeneralInclusion& incl, const IntegrationRegion& region,
                                    const Vec3& source_local, int order, const VolumeVisitor& visit);

/// Blocks of the E* volume integral per grid point (size grid_count()).
std::vector<Mat36> integrate_volume_regular(const GeneralInclusion& incl, const IntegrationRegion& region,
                                            const Vec3& source, const ElasticConstants& mat,
                                            const QuadratureOptions& opts);
std::vector<Mat36> integrate_volume_singular(const GeneralInclusion& incl, const IntegrationRegion& region,
                                             const Vec3& source, const Vec3& source_local,
                                             const ElasticConstants& mat, int order);

/// Sum over all regions, routing each to the regular or singular path.
std::vector<Mat36> integrate_inclusion(const GeneralInclusion& incl, const Vec3& source, const ElasticConstants& mat,
                                       const QuadratureOptions& opts);

/// Closed-form line integral over a bar piece of length H, source at
/// (0, y, z) in the local frame whose origin is the piece start.
Mat36 bar_integral_regular_local(double y, double z, double H, double R, const ElasticConstants& mat);

/// Closed form for a source on the axis at the top end of a piece of length H.
/// A source at the bottom end gives the negated block.
Mat36 bar_integral_singular_local(double H, double R, const ElasticConstants& mat);

/// Bar subregion block in global displacement components; the stress
/// columns stay in the bar frame.
Mat36 bar_integral(const LinearInclusion& incl, const BarSubregion& sub, const Vec3& source,
                   const ElasticConstants& mat);

}  // namespace igabem
