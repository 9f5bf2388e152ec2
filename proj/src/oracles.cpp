#include "igabem/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "igabem/error.hpp"
#include "igabem/model.hpp"

namespace igabem {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kPiRef = 3.141592653589793238462643383279502884;

// Strain kernel for a unit direction, assembled from E and nu directly.
Mat36 direction_kernel(const Vec3& n, double E, double nu) {
  const double G = E / (2.0 * (1.0 + nu));
  const double C = 1.0 / (16.0 * kPiRef * G * (1.0 - nu));
  const double C3 = 1.0 - 2.0 * nu;
  auto e = [&](int i, int j, int k) {
    const double dij = i == j, dik = i == k, djk = j == k;
    return -C * (C3 * (n[k] * dij + n[j] * dik) - n[i] * djk + 3.0 * n[i] * n[j] * n[k]);
  };
  static constexpr int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {1, 2}, {0, 2}};
  Mat36 out;
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 6; ++c) {
      const int j = pairs[c][0], k = pairs[c][1];
      out(i, c) = j == k ? e(i, j, j) : e(i, j, k) + e(i, k, j);
    }
  return out;
}

template <class Fn>
double integrate_entry(Fn&& f, double a, double b, double* err) {
  double e = 0.0;
  const double v = gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-12, &e);
  *err = std::max(*err, e);
  return v;
}

}  // namespace

ReferenceBlock bar_regular_reference(double y, double z, double H, double R, const ElasticConstants& mat) {
  const double area = kPiRef * R * R;
  auto integrand = [&](double zp) {
    const Vec3 r(0.0, -y, zp - z);
    const double rc2 = r.squaredNorm();
    return Mat36(direction_kernel(r / std::sqrt(rc2), mat.E, mat.nu) * (area / rc2));
  };
  std::vector<double> cuts{0.0};
  if (z > 0.0 && z < H) cuts.push_back(z);
  cuts.push_back(H);
  ReferenceBlock out;
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 6; ++c)
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        out.value(i, c) += integrate_entry([&](double zp) { return integrand(zp)(i, c); }, cuts[s], cuts[s + 1],
                                           &out.residual);
  return out;
}

ReferenceBlock bar_regular_reference(const LinearInclusion& incl, const BarSubregion& sub, const Vec3& source,
                                     const ElasticConstants& mat) {
  const auto frame = bar_frame(incl, sub.s0, source);
  const Vec3 rel = source - sub.start;
  auto ref = bar_regular_reference(std::max(0.0, rel.dot(frame.y)), rel.dot(frame.z), sub.length, sub.radius, mat);
  ref.value = transformation_matrix(frame) * ref.value;
  return ref;
}

ReferenceBlock bar_singular_reference(double H, double R, const ElasticConstants& mat, bool split) {
  constexpr int kPhi = 32;  // trapezoid rule, exact for the cubic direction dependence
  const double theta_split = std::atan(R / H);
  auto angular = [&](double theta, int i, int c) {
    const double st = std::sin(theta), ct = std::cos(theta);
    const double rmax = std::min(ct > 0.0 ? H / ct : 1e300, st > 0.0 ? R / st : 1e300);
    double sum = 0.0, mag = 0.0;
    for (int k = 0; k < kPhi; ++k) {
      const double phi = 2.0 * kPiRef * k / kPhi;
      const Vec3 n(st * std::cos(phi), st * std::sin(phi), -ct);
      const double v = direction_kernel(n, mat.E, mat.nu)(i, c);
      sum += v;
      mag += std::abs(v);
    }
    // Entries odd in phi cancel exactly; drop the rounding residue.
    if (std::abs(sum) < 1e-13 * mag) sum = 0.0;
    return sum * (2.0 * kPiRef / kPhi) * rmax * st;
  };
  ReferenceBlock out;
  std::vector<double> cuts{0.0};
  if (split) cuts.push_back(theta_split);
  cuts.push_back(0.5 * kPiRef);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 6; ++c)
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        out.value(i, c) +=
            integrate_entry([&](double t) { return angular(t, i, c); }, cuts[s], cuts[s + 1], &out.residual);
  return out;
}

StrainKernelCheck strain_kernel_fd_check(const Vec3& source, const Vec3& field, const ElasticConstants& mat) {
  const double h = 1e-6 * (field - source).norm();
  std::array<Mat3, 3> grad;
  for (int k = 0; k < 3; ++k) {
    Vec3 d = Vec3::Zero();
    d[k] = h;
    grad[k] = (kelvin_U(source, field + d, mat) - kelvin_U(source, field - d, mat)) / (2.0 * h);
  }
  const auto e = kernel_E_tensor(source, field, mat);
  double scale = 0.0;
  for (const auto& s : e) scale = std::max(scale, s.cwiseAbs().maxCoeff());
  StrainKernelCheck out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double fd = 0.5 * (grad[k](i, j) + grad[j](i, k));
        out.same_sign = std::max(out.same_sign, std::abs(e[i](j, k) - fd) / scale);
        out.flipped = std::max(out.flipped, std::abs(e[i](j, k) + fd) / scale);
      }
  return out;
}

Mat3 fd_map_jacobi(const GeneralInclusion& incl, const Vec3& local, double h) {
  Mat3 out;
  for (int d = 0; d < 3; ++d) {
    Vec3 a = local, b = local;
    a[d] = std::max(0.0, a[d] - h);
    b[d] = std::min(1.0, b[d] + h);
    out.row(d) = ((map_general(incl, b[0], b[1], b[2]).point - map_general(incl, a[0], a[1], a[2]).point) /
                  (b[d] - a[d]))
                     .transpose();
  }
  return out;
}

double mixtures_estimate(double traction, double length, double area, double E, double E_incl, double radius) {
  return traction * length / (E + (E_incl - E) * kPiRef * radius * radius / area);
}

double closed_box_residual(const Vec3& lo, const Vec3& hi, const Vec3& source, const ElasticConstants& mat,
                           const QuadratureOptions& opts) {
  Mat3 sum = Mat3::Zero();
  for (const auto& f : box_faces(lo, hi)) sum += integrate_patch_regular(f.surface, source, mat, opts).T_total;
  return (sum + Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace igabem
