#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "igabem/kernels.hpp"
#include "igabem/nurbs.hpp"

namespace igabem {

/// How initial stresses are interpolated between grid points.
enum class SigmaMode { Linear, Constant };

/// Volume inclusion bounded by a bottom (I) and top (II) NURBS surface.
/// Both surfaces share the (s, t) parametrisation; r runs from bottom to top.
struct GeneralInclusion {
  std::string name;
  NurbsSurface bottom;
  NurbsSurface top;
  std::array<int, 3> grid{2, 2, 2};
  ElasticConstants material;
  SigmaMode sigma_mode = SigmaMode::Linear;
  // Extra splits of each integration region per direction.
  std::array<int, 3> region_subdivision{1, 1, 1};

  int grid_count() const { return grid[0] * grid[1] * grid[2]; }
  int grid_index(int i, int j, int k) const { return i + grid[0] * (j + grid[1] * k); }
};

/// Straight reinforcement bar: degree-1 axis, circular cross-section.
struct LinearInclusion {
  std::string name;
  NurbsCurve axis;
  double radius = 0.0;
  int points = 2;
  ElasticConstants material;

  Vec3 start() const { return axis.points().front(); }
  Vec3 end() const { return axis.points().back(); }
  double length() const { return (end() - start()).norm(); }
};

/// Validates the invariants listed on the inclusion types.
void validate(const GeneralInclusion& incl);
void validate(const LinearInclusion& incl);

struct LocalFrame {
  Vec3 x;
  Vec3 y;
  Vec3 z;
  double jacobian = 1.0;  // |dx/ds| of the axis
};

struct MapResult {
  Vec3 point;
  Mat3 jacobi;  // rows: dx/ds, dx/dt, dx/dr
  double jacobian = 0.0;
};

/// x(s,t,r) = (1-r) x_I(s,t) + r x_II(s,t) with its Jacobi matrix.
MapResult map_general(const GeneralInclusion& incl, double s, double t, double r);

/// Local coordinates of x if it lies inside the inclusion (within tol in
/// local units), found by Newton iteration on map_general.
std::optional<Vec3> locate_in_general(const GeneralInclusion& incl, const Vec3& x, double tol = 1e-9);

/// Bar frame at axis parameter `field_s` for a given source point. The source
/// lies in the y'-z' plane through the axis point (x~' = 0).
LocalFrame bar_frame(const LinearInclusion& incl, double field_s, const Vec3& source);

/// Columns are the frame axes; maps local components to global ones.
Mat3 transformation_matrix(const LocalFrame& frame);

struct GridPoint {
  Vec3 local;     // (s, t, r) or (s, 0, 0) for bars
  Vec3 position;
};

/// Equally spaced grid, s fastest then t then r. This order is the DOF
/// contract for every grid-indexed matrix block.
std::vector<GridPoint> grid_points(const GeneralInclusion& incl);
std::vector<GridPoint> grid_points(const LinearInclusion& incl);

struct BarSubregion {
  double s0 = 0.0;
  double s1 = 1.0;
  double length = 0.0;  // H
  double radius = 0.0;  // R
  Vec3 start;
  Vec3 end;
  Vec3 midpoint;
};

/// J-1 equal cylinders between consecutive bar grid points.
std::vector<BarSubregion> bar_subregions(const LinearInclusion& incl);

}  // namespace igabem
