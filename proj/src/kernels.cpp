#include "igabem/kernels.hpp"

#include <cmath>

#include "igabem/error.hpp"

namespace igabem {

namespace {

struct Separation {
  double r;
  Vec3 dr;  // r,i
};

Separation separation(const Vec3& source, const Vec3& field) {
  const Vec3 d = field - source;
  const double r = d.norm();
  const double scale = std::max(source.norm(), field.norm());
  if (!(r > 1e-14 * std::max(1.0, scale))) throw DomainError("kernel evaluated at coincident source and field points");
  return {r, d / r};
}

// -C[...] of the strain kernel for the unit direction n (no 1/r^2).
Tensor3 strain_tensor_unit(const Vec3& n, const ElasticConstants& mat) {
  Tensor3 t;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = j; k < 3; ++k) {
        const double dij = i == j ? 1.0 : 0.0;
        const double dik = i == k ? 1.0 : 0.0;
        const double djk = j == k ? 1.0 : 0.0;
        // Filled for k >= j and mirrored, so the j-k symmetry is exact.
        t[i](j, k) = -mat.C * (mat.C3 * (n[k] * dij + n[j] * dik) - n[i] * djk + mat.C4 * n[i] * (n[j] * n[k]));
        t[i](k, j) = t[i](j, k);
      }
    }
  }
  return t;
}

}  // namespace

ElasticConstants ElasticConstants::make(double E, double nu) {
  if (!(E > 0.0)) throw DomainError("Young's modulus must be positive");
  if (!(nu > -1.0 && nu < 0.5)) throw DomainError("Poisson's ratio must lie in (-1, 0.5)");
  ElasticConstants m;
  m.E = E;
  m.nu = nu;
  m.G = E / (2.0 * (1.0 + nu));
  m.C = 1.0 / (16.0 * kPi * m.G * (1.0 - nu));
  m.C3 = 1.0 - 2.0 * nu;
  m.C4 = 3.0;
  return m;
}

Mat36 voigt_columns(const Tensor3& t) {
  Mat36 out;
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 6; ++c) {
      const auto [j, k] = kVoigtPairs[c];
      out(i, c) = j == k ? t[i](j, k) : t[i](j, k) + t[i](k, j);
    }
  }
  return out;
}

Tensor3 rotate_to_local(const Tensor3& t, const Mat3& T) {
  Tensor3 out;
  for (int a = 0; a < 3; ++a) {
    Mat3 s = Mat3::Zero();
    for (int i = 0; i < 3; ++i) s += T(i, a) * t[i];
    out[a] = T.transpose() * s * T;
  }
  return out;
}

Mat3 kelvin_U(const Vec3& source, const Vec3& field, const ElasticConstants& mat) {
  const auto [r, dr] = separation(source, field);
  const double c = mat.C / r;
  Mat3 u = (c * (3.0 - 4.0 * mat.nu)) * Mat3::Identity();
  u.noalias() += c * dr * dr.transpose();
  return u;
}

Mat3 kelvin_T(const Vec3& source, const Vec3& field, const Vec3& n, const ElasticConstants& mat) {
  const auto [r, dr] = separation(source, field);
  const double drdn = dr.dot(n);
  const double c = -1.0 / (8.0 * kPi * (1.0 - mat.nu) * r * r);
  Mat3 t = (drdn * mat.C3) * Mat3::Identity();
  t.noalias() += (3.0 * drdn) * dr * dr.transpose();
  t.noalias() -= mat.C3 * (dr * n.transpose() - n * dr.transpose());
  return c * t;
}

Tensor3 kernel_E_tensor(const Vec3& source, const Vec3& field, const ElasticConstants& mat) {
  const auto [r, dr] = separation(source, field);
  Tensor3 t = strain_tensor_unit(dr, mat);
  const double inv = 1.0 / (r * r);
  for (auto& s : t) s *= inv;
  return t;
}

Mat36 kernel_E(const Vec3& source, const Vec3& field, const ElasticConstants& mat) {
  return voigt_columns(kernel_E_tensor(source, field, mat));
}

Mat36 kernel_E_tilde_local(const Vec3& source, const Vec3& field, const Mat3& T, const ElasticConstants& mat) {
  const auto [r, dr] = separation(source, field);
  (void)r;
  return voigt_columns(strain_tensor_unit(T.transpose() * dr, mat));
}

Mat6 elasticity_matrix(const ElasticConstants& mat) {
  if (mat.nu > 0.5 - 1e-9) throw DomainError("elasticity matrix ill-conditioned as nu -> 0.5");
  const double nu = mat.nu;
  const double f = mat.E / ((1.0 + nu) * (1.0 - 2.0 * nu));
  Mat6 d = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) d(i, j) = f * (i == j ? 1.0 - nu : nu);
    d(3 + i, 3 + i) = mat.G;
  }
  return d;
}

Mat6 bar_D_difference(const ElasticConstants& domain, const ElasticConstants& inclusion) {
  Mat6 d = Mat6::Zero();
  d(2, 2) = domain.E - inclusion.E;
  return d;
}

}  // namespace igabem
