#pragma once

#include <array>

#include "igabem/types.hpp"

namespace igabem {

/// Isotropic elastic constants plus the derived fundamental-solution
/// constants C = 1/(16 pi G (1 - nu)), C3 = 1 - 2 nu, C4 = 3.
struct ElasticConstants {
  double E = 1.0;
  double nu = 0.0;
  double G = 0.5;
  double C = 0.0;
  double C3 = 1.0;
  double C4 = 3.0;

  static ElasticConstants make(double E, double nu);
};

/// Third-order tensor stored as three 3x3 slices: t[i](j, k).
using Tensor3 = std::array<Mat3, 3>;

// Voigt ordering used throughout: (11, 22, 33, 12, 23, 13).
inline constexpr std::array<std::array<int, 2>, 6> kVoigtPairs{{{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}}};

/// Contracts the last two tensor indices into Voigt columns; shear columns
/// sum both orderings (E_i12 + E_i21, ...).
Mat36 voigt_columns(const Tensor3& t);

/// t'_abc = T_ia T_jb T_kc t_ijk, with T holding the local axes as columns.
Tensor3 rotate_to_local(const Tensor3& t, const Mat3& T);

/// Kelvin displacement solution U_ij(source, field).
Mat3 kelvin_U(const Vec3& source, const Vec3& field, const ElasticConstants& mat);

/// Kelvin traction solution T_ij for outward unit normal n at the field point.
Mat3 kelvin_T(const Vec3& source, const Vec3& field, const Vec3& n, const ElasticConstants& mat);

/// Strain kernel E_ijk (symmetrised field gradient of U_ij).
Tensor3 kernel_E_tensor(const Vec3& source, const Vec3& field, const ElasticConstants& mat);

/// Strain kernel converted to the 3x6 Voigt matrix.
Mat36 kernel_E(const Vec3& source, const Vec3& field, const ElasticConstants& mat);

/// Strain kernel without the 1/r^2 factor, expressed in the local axes given
/// by the columns of T (bar frame).
Mat36 kernel_E_tilde_local(const Vec3& source, const Vec3& field, const Mat3& T, const ElasticConstants& mat);

/// Isotropic 6x6 elasticity matrix, engineering shear strains.
Mat6 elasticity_matrix(const ElasticConstants& mat);

/// Local D' - D'_incl for a bar: only the axial entry (3,3) = E - E_incl.
Mat6 bar_D_difference(const ElasticConstants& domain, const ElasticConstants& inclusion);

}  // namespace igabem
