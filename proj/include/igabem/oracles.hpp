#pragma once

#include <string>

#include "igabem/inclusion_geometry.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

/// One reference comparison as shown by `verify`.
struct OracleReport {
  std::string id;
  double measured = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// Reference block together with its own convergence residual.
struct ReferenceBlock {
  Mat36 value = Mat36::Zero();
  double residual = 0.0;  // change under refinement / error estimate
};

/// Adaptive Gauss-Kronrod integration along the bar axis of the line
/// integral pi R^2 / r_c^2 E~'(r) for a source at (0, y, z) in the frame
/// whose origin is the piece start. Uses its own constants and tensor.
ReferenceBlock bar_regular_reference(double y, double z, double H, double R, const ElasticConstants& mat);

/// Same in global displacement components for a subregion and source.
ReferenceBlock bar_regular_reference(const LinearInclusion& incl, const BarSubregion& sub, const Vec3& source,
                                     const ElasticConstants& mat);

/// Volume integral of E over a cylinder of length H and radius R hanging
/// below a source on its top axis point, in spherical coordinates about the
/// source. `split` integrates theta in two pieces at arctan(R/H).
ReferenceBlock bar_singular_reference(double H, double R, const ElasticConstants& mat, bool split = true);

/// Largest relative difference between the strain kernel and the central
/// difference strain of U at one point pair, for both sign conventions.
struct StrainKernelCheck {
  double same_sign = 0.0;
  double flipped = 0.0;
};
StrainKernelCheck strain_kernel_fd_check(const Vec3& source, const Vec3& field, const ElasticConstants& mat);

/// Central-difference Jacobi matrix (rows d/ds, d/dt, d/dr) of map_general.
Mat3 fd_map_jacobi(const GeneralInclusion& incl, const Vec3& local, double h = 1e-6);

/// Rule-of-mixtures top displacement of a prism of height L and section
/// area A under end traction t with a through bar of radius R.
double mixtures_estimate(double traction, double length, double area, double E, double E_incl, double radius);

/// Max componentwise error of sum over the six faces of integral T + I for
/// an interior source of the box [lo, hi].
double closed_box_residual(const Vec3& lo, const Vec3& hi, const Vec3& source, const ElasticConstants& mat,
                           const QuadratureOptions& opts);

}  // namespace igabem
