#include <cmath>

#include "doctest.h"
#include "igabem/oracles.hpp"

using namespace igabem;

TEST_CASE("rule of mixtures estimate") {
  CHECK(mixtures_estimate(1.0, 1.0, 1.0, 1.0, 1.0, 0.05) == doctest::Approx(1.0).epsilon(1e-15));
  // 1 / (1 + (2 - 1) pi 0.05^2)
  const double ex1 = mixtures_estimate(1.0, 1.0, 1.0, 1.0, 2.0, 0.05);
  CHECK(ex1 == doctest::Approx(0.99220708).epsilon(1e-7));
  CHECK(ex1 > 0.98);
  CHECK(ex1 < 1.0);
  CHECK(mixtures_estimate(1.0, 1.0, 1.0, 1.0, 2.0, 1e-9) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mixtures_estimate(2.0, 3.0, 1.0, 1.0, 1.0, 0.05) == doctest::Approx(6.0));
}

TEST_CASE("line quadrature reference certifies its own convergence") {
  const auto mat = ElasticConstants::make(1.0, 0.25);
  for (const auto& [y, z] : {std::pair{0.2, 0.5}, std::pair{0.06, -0.3}, std::pair{1.5, 2.0}}) {
    const auto ref = bar_regular_reference(y, z, 1.0, 0.05, mat);
    CHECK(ref.residual < 1e-10 * ref.value.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("mid-plane source cancels the entries odd in the axial offset") {
  const auto mat = ElasticConstants::make(1.0, 0.2);
  const auto ref = bar_regular_reference(0.3, 0.5, 1.0, 0.05, mat);
  const double scale = ref.value.cwiseAbs().maxCoeff();
  for (const auto& [r, c] : {std::pair{0, 5}, std::pair{1, 4}, std::pair{2, 0}, std::pair{2, 1}, std::pair{2, 2}})
    CHECK(std::abs(ref.value(r, c)) < 1e-12 * scale);
  for (const auto& [r, c] : {std::pair{0, 3}, std::pair{1, 0}, std::pair{1, 1}, std::pair{1, 2}, std::pair{2, 4}})
    CHECK(std::abs(ref.value(r, c)) > 1e-6 * scale);
}

TEST_CASE("polar reference: axisymmetry and split additivity") {
  const auto mat = ElasticConstants::make(1.0, 0.3);
  const auto split = bar_singular_reference(0.4, 0.05, mat, true);
  const auto whole = bar_singular_reference(0.4, 0.05, mat, false);
  const double scale = split.value.cwiseAbs().maxCoeff();
  CHECK((split.value - whole.value).cwiseAbs().maxCoeff() < 1e-8 * scale);
  CHECK(split.residual < 1e-8 * scale);
  // Only components even in the azimuth survive: (1,6), (2,5), (3,1), (3,2), (3,3).
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 6; ++c) {
      const bool even = (r == 0 && c == 5) || (r == 1 && c == 4) || (r == 2 && c <= 2);
      if (!even) CHECK(split.value(r, c) == 0.0);
    }
  CHECK(split.value(0, 5) == doctest::Approx(split.value(1, 4)).epsilon(1e-12));
}

TEST_CASE("kernel finite-difference check distinguishes the sign") {
  const auto mat = ElasticConstants::make(1.0, 0.3);
  const auto c = strain_kernel_fd_check(Vec3(0.1, -0.2, 0.3), Vec3(0.7, 0.4, -0.5), mat);
  CHECK(c.same_sign < 1e-6);
  CHECK(c.flipped > 1.0);
}

TEST_CASE("closed box residual") {
  const auto mat = ElasticConstants::make(1.0, 0.3);
  CHECK(closed_box_residual(Vec3::Zero(), Vec3(2, 1, 1), Vec3(0.3, 0.5, 0.6), mat, QuadratureOptions{}) < 1e-4);
}
