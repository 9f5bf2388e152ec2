#include <cmath>
#include <random>

#include "doctest.h"
#include "igabem/error.hpp"
#include "igabem/kernels.hpp"

using namespace igabem;

namespace {

Vec3 random_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  return Vec3(uni(rng), uni(rng), uni(rng));
}

Mat3 random_rotation(std::mt19937& rng) {
  Eigen::Quaterniond q(Eigen::Vector4d(random_point(rng)[0], random_point(rng)[1], random_point(rng)[2], 0.7).normalized());
  return q.toRotationMatrix();
}

// Index-by-index evaluation of the traction kernel.
Mat3 traction_by_index(const Vec3& x, const Vec3& y, const Vec3& n, double nu) {
  const Vec3 d = y - x;
  const double r = d.norm();
  double drdn = 0.0;
  for (int k = 0; k < 3; ++k) drdn += d[k] / r * n[k];
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double ri = d[i] / r, rj = d[j] / r;
      const double term = drdn * ((1 - 2 * nu) * (i == j) + 3 * ri * rj) - (1 - 2 * nu) * (ri * n[j] - rj * n[i]);
      t(i, j) = -term / (8 * kPi * (1 - nu) * r * r);
    }
  return t;
}

}  // namespace

TEST_CASE("elastic constants") {
  const auto m = ElasticConstants::make(1000.0, 0.25);
  CHECK(m.G == doctest::Approx(400.0));
  CHECK(m.C == doctest::Approx(1.0 / (16 * kPi * 400.0 * 0.75)));
  CHECK(m.C3 == doctest::Approx(0.5));
  CHECK(m.C4 == 3.0);
  CHECK_THROWS_AS(ElasticConstants::make(-1.0, 0.2), DomainError);
  CHECK_THROWS_AS(ElasticConstants::make(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(ElasticConstants::make(1.0, -1.0), DomainError);
}

TEST_CASE("Kelvin displacement kernel") {
  const auto m = ElasticConstants::make(1.0, 0.0);
  const Mat3 u = kelvin_U(Vec3::Zero(), Vec3(1, 0, 0), m);
  CHECK(u(0, 0) == doctest::Approx(1.0 / (2 * kPi)).epsilon(1e-14));
  std::mt19937 rng(1);
  const auto m2 = ElasticConstants::make(3.0, 0.3);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_point(rng), y = random_point(rng);
    const Mat3 a = kelvin_U(x, y, m2);
    CHECK((a - a.transpose()).norm() < 1e-14 * a.norm());
    const Mat3 b = kelvin_U(x, x + 2.5 * (y - x), m2);
    CHECK((b - a / 2.5).norm() < 1e-13 * a.norm());
  }
  CHECK_THROWS_AS(kelvin_U(Vec3(1, 2, 3), Vec3(1, 2, 3), m), DomainError);
}

TEST_CASE("Kelvin traction kernel") {
  std::mt19937 rng(2);
  const auto m = ElasticConstants::make(2.0, 0.27);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_point(rng), y = random_point(rng), n = random_point(rng).normalized();
    const Mat3 t = kelvin_T(x, y, n, m);
    CHECK((t - traction_by_index(x, y, n, 0.27)).norm() < 1e-12 * t.norm());
    const Mat3 s = kelvin_T(x, x + 3.0 * (y - x), n, m);
    CHECK((s - t / 9.0).norm() < 1e-13 * t.norm());
  }
  CHECK_THROWS_AS(kelvin_T(Vec3::Zero(), Vec3::Zero(), Vec3::UnitZ(), m), DomainError);
}

TEST_CASE("strain kernel hand value, symmetry and homogeneity") {
  const auto m = ElasticConstants::make(1.0, 0.0);
  const auto e = kernel_E_tensor(Vec3::Zero(), Vec3(1, 0, 0), m);
  CHECK(e[0](0, 0) == doctest::Approx(-1.0 / (2 * kPi)).epsilon(1e-14));
  std::mt19937 rng(3);
  const auto m2 = ElasticConstants::make(5.0, 0.3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_point(rng), y = random_point(rng);
    const auto t = kernel_E_tensor(x, y, m2);
    for (int a = 0; a < 3; ++a) CHECK((t[a] - t[a].transpose()).norm() == 0.0);
    const Mat36 e1 = kernel_E(x, y, m2);
    const Mat36 e2 = kernel_E(x, x + 1.7 * (y - x), m2);
    CHECK((e2 - e1 / (1.7 * 1.7)).norm() < 1e-13 * e1.norm());
  }
}

TEST_CASE("strain kernel equals the symmetrised field gradient of U") {
  std::mt19937 rng(4);
  const auto m = ElasticConstants::make(1.3, 0.21);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x = random_point(rng), y = random_point(rng);
    const double h = 1e-6 * (y - x).norm();
    std::array<Mat3, 3> grad;  // grad[k] = dU/dy_k
    for (int k = 0; k < 3; ++k) {
      Vec3 dy = Vec3::Zero();
      dy[k] = h;
      grad[k] = (kelvin_U(x, y + dy, m) - kelvin_U(x, y - dy, m)) / (2 * h);
    }
    const auto e = kernel_E_tensor(x, y, m);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          const double fd = 0.5 * (grad[k](i, j) + grad[j](i, k));
          CHECK(std::abs(e[i](j, k) - fd) <= 1e-5 * std::max(1.0, e[i].norm()) * e[i].norm());
        }
  }
}

TEST_CASE("Voigt contraction") {
  std::mt19937 rng(5);
  const auto m = ElasticConstants::make(1.0, 0.3);
  for (int t = 0; t < 20; ++t) {
    Mat3 s;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s(i, j) = random_point(rng)[0];
    s = 0.5 * (s + s.transpose()).eval();
    const Vec6 v(s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(1, 2), s(0, 2));
    const Vec3 x = random_point(rng), y = random_point(rng);
    const auto e = kernel_E_tensor(x, y, m);
    Vec3 direct;
    for (int i = 0; i < 3; ++i) direct[i] = e[i].cwiseProduct(s).sum();
    CHECK((direct - kernel_E(x, y, m) * v).norm() < 1e-12 * direct.norm());
  }
}

TEST_CASE("local strain kernel matches rotated global kernel") {
  std::mt19937 rng(6);
  const auto m = ElasticConstants::make(1.0, 0.2);
  for (int t = 0; t < 50; ++t) {
    const Vec3 x = random_point(rng), y = random_point(rng);
    const Mat3 T = random_rotation(rng);
    const double r2 = (y - x).squaredNorm();
    const Mat36 rotated = voigt_columns(rotate_to_local(kernel_E_tensor(x, y, m), T)) * r2;
    CHECK((rotated - kernel_E_tilde_local(x, y, T, m)).norm() < 1e-12 * rotated.norm());
  }
}

TEST_CASE("elasticity matrix") {
  const auto d0 = elasticity_matrix(ElasticConstants::make(2.0, 0.0));
  Mat6 expect = Mat6::Zero();
  expect.diagonal() << 2, 2, 2, 1, 1, 1;
  CHECK((d0 - expect).norm() < 1e-14);
  const auto m = ElasticConstants::make(1000.0, 0.2);
  const auto d = elasticity_matrix(m);
  CHECK(d(0, 0) == doctest::Approx(1000.0 * 0.8 / (1.2 * 0.6)));
  const Vec6 hyd = (Vec6() << 1, 1, 1, 0, 0, 0).finished();
  const Vec6 p = d * hyd;
  for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(1000.0 / (1 - 0.4)));
  CHECK((d - d.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat6>(d).eigenvalues().minCoeff() > 0.0);
  ElasticConstants bad = m;
  bad.nu = 0.4999999999;
  CHECK_THROWS_AS(elasticity_matrix(bad), DomainError);
}

TEST_CASE("bar constitutive difference") {
  const auto d = bar_D_difference(ElasticConstants::make(1.0, 0.0), ElasticConstants::make(2.0, 0.0));
  CHECK(d(2, 2) == -1.0);
  CHECK(d.cwiseAbs().sum() == 1.0);
  CHECK(bar_D_difference(ElasticConstants::make(3.0, 0.1), ElasticConstants::make(3.0, 0.3)).isZero(0.0));
  CHECK(bar_D_difference(ElasticConstants::make(1000.0, 0.0), ElasticConstants::make(500.0, 0.0))(2, 2) == 500.0);
}
