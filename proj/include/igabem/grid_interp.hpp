#pragma once

#include <vector>

#include "igabem/inclusion_geometry.hpp"

namespace igabem {

/// Values and derivatives of the 1-D Lagrange functions on xi in [-1, 1].
struct Shape1D {
  std::vector<double> value;
  std::vector<double> deriv;
};

/// M1 = 0.5(1 - xi), M2 = 0.5(1 + xi).
Shape1D shape_linear(double xi);
/// M2 = 1 - xi^2, M1 = 0.5(1 - xi) - 0.5 M2, M3 = 0.5(1 + xi) - 0.5 M2.
Shape1D shape_quadratic(double xi);

/// Derivative weights d/ds at one grid point of a line of equally spaced points.
struct ShapeStencil {
  std::vector<int> index;
  std::vector<double> weight;
};

/// Two points: linear difference. Three or more: quadratic Lagrange
/// derivative, central inside and one-sided at the ends.
ShapeStencil grid_derivative_stencil(int n_points, double spacing, int idx);

struct SigmaWeight {
  int grid = 0;
  double weight = 0.0;
};

/// Interpolation weights M_j^sigma at a local point of a general inclusion.
std::vector<SigmaWeight> sigma_interpolation(const GeneralInclusion& incl, const Vec3& local);

/// Weights for the constant stress of bar subregion m: the mean of its two
/// bounding grid points.
std::vector<SigmaWeight> sigma_interpolation(const LinearInclusion& incl, int subregion);

/// One 6x3 block of a strain recovery matrix, acting on grid point `grid`.
struct BhatBlock {
  int grid = 0;
  Mat63 block;
};

/// Strains at grid point k from the grid displacements (engineering shear).
/// `jacobi` holds dx/ds, dx/dt, dx/dr in its rows.
std::vector<BhatBlock> build_Bhat_general(const GeneralInclusion& incl, int k, const Mat3& jacobi);

/// Axial strain at bar grid point j in the local frame; only row 3 is nonzero.
std::vector<BhatBlock> build_Bhat_bar(const LinearInclusion& incl, int j, const LocalFrame& frame);

}  // namespace igabem
