#include <cmath>
#include <random>

#include "doctest.h"
#include "igabem/error.hpp"
#include "igabem/model.hpp"
#include "igabem/oracles.hpp"
#include "igabem/quadrature.hpp"
#include "test_support.hpp"

using namespace igabem;
using namespace igabem::testing;

namespace {

double max_abs(const Mat36& m) { return m.cwiseAbs().maxCoeff(); }

NurbsSurface unit_face() { return bilinear(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)); }

NurbsSurface curved_face() {
  KnotVector k({0, 0, 0, 0.5, 1, 1, 1}, 2);
  std::vector<Vec3> pts;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) pts.emplace_back(i / 3.0, j / 3.0, 0.15 * std::sin(1.0 + i) * std::cos(0.5 * j));
  return NurbsSurface(k, k, pts);
}

Mat3 sum_U(const PatchIntegrals& p) {
  Mat3 s = Mat3::Zero();
  for (const auto& m : p.U) s += m;
  return s;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules") {
  CHECK(gauss_rule(1).nodes[0] == 0.0);
  CHECK(gauss_rule(1).weights[0] == 2.0);
  CHECK(gauss_rule(2).nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(gauss_rule(2).weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  double s = 0.0;
  const auto& g4 = gauss_rule(4);
  for (int i = 0; i < 4; ++i) s += g4.weights[i] * std::pow(g4.nodes[i], 6);
  CHECK(std::abs(s - 2.0 / 7.0) < 1e-14);
  for (int n = 1; n <= 64; ++n) {
    const auto& g = gauss_rule(n);
    for (int deg : {0, 2 * n - 2, 2 * n - 1}) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += g.weights[i] * std::pow(g.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(std::abs(v - exact) < 1e-13);
    }
  }
  CHECK_THROWS_AS(gauss_rule(0), DomainError);
  CHECK_THROWS_AS(gauss_rule(65), DomainError);
}

TEST_CASE("order escalation rule") {
  QuadratureOptions o;
  CHECK(near_field_order(1.0, 100.0, o) == 5);
  CHECK(near_field_order(1.0, 1.0, o) == 8);
  CHECK(near_field_order(1.0, 0.1, o) == 16);
  CHECK(near_field_order(1.0, 0.0, o) == 16);
}

TEST_CASE("surface weights integrate the area") {
  QuadratureOptions o;
  for (const auto& param : {std::optional<Vec2>{}, std::optional<Vec2>{Vec2(0.3, 0.6)}, std::optional<Vec2>{Vec2(0, 1)}}) {
    double area = 0.0;
    for_each_surface_point(unit_face(), Vec3(0.3, 0.6, 0.0), param, o,
                           [&](const SurfaceQuadPoint& q, const SurfaceBasis&) { area += q.weight; });
    CHECK(std::abs(area - 1.0) < (param && (*param)[0] > 0.0 ? 1e-8 : 1e-13));
  }
}

TEST_CASE("regular patch integral converges to a high-order reference") {
  const auto m = ElasticConstants::make(1.0, 0.3);
  const auto s = curved_face();
  const Vec3 src(0.4, 0.5, 0.6);
  QuadratureOptions ref;
  ref.base_order = ref.max_order = 32;
  ref.subdivision_ratio = 0.0;
  const auto a = integrate_patch_regular(s, src, m, QuadratureOptions{});
  const auto b = integrate_patch_regular(s, src, m, ref);
  CHECK((sum_U(a) - sum_U(b)).norm() < 1e-8 * sum_U(b).norm());
  CHECK((a.T_total - b.T_total).norm() < 1e-8 * b.T_total.norm());
  for (std::size_t k = 0; k < a.U.size(); ++k) CHECK((a.U[k] - b.U[k]).norm() < 1e-8 * sum_U(b).norm());
}

TEST_CASE("singular patch integrals") {
  const auto m = ElasticConstants::make(1.0, 0.3);
  for (const auto& s : {unit_face(), curved_face()}) {
    for (const Vec2 p : {Vec2(0.5, 0.5), Vec2(0.3, 0.6), Vec2(0.0, 0.5), Vec2(1.0, 1.0)}) {
      QuadratureOptions fan, rect;
      rect.fan_layout = FanLayout::Rectangles;
      const auto a = integrate_patch_singular(s, p, m, fan);
      const auto b = integrate_patch_singular(s, p, m, rect);
      CHECK((sum_U(a) - sum_U(b)).norm() < 1e-7 * sum_U(b).norm());
      Mat3 tsum = Mat3::Zero();
      double tnorm = 0.0;
      for (std::size_t k = 0; k < a.T.size(); ++k) {
        tsum += a.T[k];
        tnorm = std::max(tnorm, a.T[k].norm());
        CHECK((a.T[k] - b.T[k]).norm() < 1e-6 * std::max(1.0, tnorm));
      }
      // Regularised integrand of a constant field vanishes.
      CHECK(tsum.norm() < 1e-14 * std::max(1.0, tnorm));

      QuadratureOptions lo, hi;
      lo.singular_order = 8;
      hi.singular_order = 16;
      const auto c = integrate_patch_singular(s, p, m, lo);
      const auto d = integrate_patch_singular(s, p, m, hi);
      CHECK((sum_U(c) - sum_U(d)).norm() < 1e-6 * sum_U(d).norm());
    }
  }
}

TEST_CASE("closed box traction identity") {
  const auto m = ElasticConstants::make(1.0, 0.25);
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  for (int i = 0; i < 10; ++i) {
    const Vec3 src(uni(rng), uni(rng), uni(rng));
    CHECK(closed_box_residual(Vec3::Zero(), Vec3::Ones(), src, m, QuadratureOptions{}) < 1e-4);
  }
}

TEST_CASE("volume regions and weights") {
  auto g = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1), {3, 2, 2});
  const auto regions = integration_regions(g);
  CHECK(regions.size() == 2);
  CHECK(regions[0].local_jacobian() == doctest::Approx(1.0 / 16.0));
  IntegrationRegion half{Vec3(0, 0, 0), Vec3(0.5, 0.5, 1)};
  CHECK(half.local_jacobian() == doctest::Approx(1.0 / 32.0));

  const Vec3 far(5, 5, 5);
  double vol = 0.0;
  for (const auto& r : regions)
    for_each_volume_point_regular(g, r, far, QuadratureOptions{}, [&](const VolumeQuadPoint& q) { vol += q.weight; });
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-13));

  g.sigma_mode = SigmaMode::Constant;
  g.region_subdivision = {1, 2, 1};
  CHECK(integration_regions(g).size() == 24);
  vol = 0.0;
  for (const auto& r : integration_regions(g))
    for_each_volume_point_regular(g, r, far, QuadratureOptions{}, [&](const VolumeQuadPoint& q) { vol += q.weight; });
  CHECK(vol == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("regular volume integration converges") {
  const auto m = ElasticConstants::make(1.0, 0.3);
  const auto g = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1), {3, 3, 3});
  const Vec3 src(2.5, 0.3, 0.4);
  QuadratureOptions o6, o20;
  o6.base_order = o6.max_order = 6;
  o20.base_order = o20.max_order = 20;
  o6.subdivision_ratio = o20.subdivision_ratio = 0.0;
  double err_prev = 1e300;
  std::vector<Mat36> ref(g.grid_count(), Mat36::Zero());
  for (const auto& r : integration_regions(g)) {
    const auto b = integrate_volume_regular(g, r, src, m, o20);
    for (int j = 0; j < g.grid_count(); ++j) ref[j] += b[j];
  }
  double scale = 0.0;
  for (const auto& b : ref) scale = std::max(scale, max_abs(b));
  for (int order : {4, 6, 8}) {
    QuadratureOptions o;
    o.base_order = o.max_order = order;
    o.subdivision_ratio = 0.0;
    double err = 0.0;
    std::vector<Mat36> got(g.grid_count(), Mat36::Zero());
    for (const auto& r : integration_regions(g)) {
      const auto b = integrate_volume_regular(g, r, src, m, o);
      for (int j = 0; j < g.grid_count(); ++j) got[j] += b[j];
    }
    for (int j = 0; j < g.grid_count(); ++j) err = std::max(err, max_abs(got[j] - ref[j]));
    CHECK(err < err_prev);
    err_prev = err;
    if (order == 6) CHECK(err < 1e-8 * scale);
  }
  CHECK_THROWS_AS(integrate_volume_regular(g, integration_regions(g)[0], Vec3(0.25, 0.25, 0.25), m, o6), DomainError);
}

TEST_CASE("singular volume integration") {
  const auto g = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1));
  const IntegrationRegion cube{Vec3::Zero(), Vec3::Ones()};
  for (const Vec3 src : {Vec3(0, 0, 0), Vec3(1, 1, 0), Vec3(0.5, 0.0, 0.3), Vec3(0.2, 0.7, 0.4)}) {
    double vol = 0.0, wmin_near = 1e300;
    for_each_volume_point_singular(g, cube, src, 6, [&](const VolumeQuadPoint& q) {
      vol += q.weight;
      if ((q.local - src).norm() < 0.05) wmin_near = std::min(wmin_near, q.weight);
    });
    CHECK(std::abs(vol - 1.0) < 1e-12);
    CHECK(wmin_near < 1e-4);
  }
  const auto m = ElasticConstants::make(1.0, 0.3);
  const Vec3 corner(0, 0, 0);
  const auto a = integrate_volume_singular(g, cube, corner, corner, m, 8);
  const auto b = integrate_volume_singular(g, cube, corner, corner, m, 16);
  for (int j = 0; j < g.grid_count(); ++j) {
    const double scale = max_abs(b[j]);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 6; ++c) CHECK(std::abs(a[j](r, c) - b[j](r, c)) <= 1e-3 * std::max(std::abs(b[j](r, c)), 1e-3 * scale));
  }
}

TEST_CASE("analytical bar integrals against the line quadrature oracle") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double H = 0.05 + uni(rng), R = 0.01 + 0.05 * uni(rng);
    const double y = R * (1.05 + 20.0 * uni(rng));
    const double z = -0.5 + (H + 1.0) * uni(rng);
    const auto mat = ElasticConstants::make(0.5 + uni(rng), 0.45 * uni(rng));
    const Mat36 a = bar_integral_regular_local(y, z, H, R, mat);
    const auto ref = bar_regular_reference(y, z, H, R, mat);
    worst = std::max(worst, max_abs(a - ref.value) / max_abs(ref.value));
    CHECK(a(0, 0) == 0.0);
    CHECK(a(1, 3) == 0.0);
  }
  CHECK(worst < 1e-8);

  const auto mat = ElasticConstants::make(1.0, 0.2);
  const Mat36 axis = bar_integral_regular_local(0.0, 1.7, 1.0, 0.05, mat);
  CHECK(axis(0, 3) == 0.0);
  CHECK(axis(1, 0) == 0.0);
  CHECK(axis(1, 1) == 0.0);
  CHECK(axis(2, 4) == 0.0);
  const auto axis_ref = bar_regular_reference(0.0, 1.7, 1.0, 0.05, mat);
  CHECK(max_abs(axis - axis_ref.value) < 1e-8 * max_abs(axis_ref.value));
}

TEST_CASE("singular bar integrals against the polar quadrature oracle") {
  for (const auto& [H, R, nu] : {std::tuple{1.0, 0.05, 0.0}, std::tuple{0.3, 0.1, 0.3}, std::tuple{0.05, 0.05, 0.2}}) {
    const auto mat = ElasticConstants::make(1.0, nu);
    const Mat36 a = bar_integral_singular_local(H, R, mat);
    const auto ref = bar_singular_reference(H, R, mat);
    CHECK(ref.residual < 1e-8 * max_abs(ref.value));
    CHECK(max_abs(a - ref.value) < 1e-6 * max_abs(ref.value));
    CHECK(a(0, 5) == a(1, 4));
    CHECK(a(2, 0) == a(2, 1));
    int nonzero = 0;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 6; ++c) nonzero += a(r, c) != 0.0;
    CHECK(nonzero == 5);
    const auto whole = bar_singular_reference(H, R, mat, false);
    CHECK(max_abs(whole.value - ref.value) < 1e-8 * max_abs(ref.value));
  }
  const auto mat = ElasticConstants::make(1.0, 0.25);
  CHECK(max_abs(bar_integral_singular_local(1.0, 1e-9, mat)) < 1e-8);
}

TEST_CASE("bar integrals scale with 1/G") {
  const auto m1 = ElasticConstants::make(1.0, 0.2);
  const auto m2 = ElasticConstants::make(4.0, 0.2);
  CHECK(max_abs(bar_integral_regular_local(0.3, 0.2, 1.0, 0.05, m1) - 4.0 * bar_integral_regular_local(0.3, 0.2, 1.0, 0.05, m2)) < 1e-15);
  CHECK(max_abs(bar_integral_singular_local(0.4, 0.05, m1) - 4.0 * bar_integral_singular_local(0.4, 0.05, m2)) < 1e-15);
}

TEST_CASE("bar routing") {
  const auto bar = straight_bar(Vec3(0.5, 0.5, 0), Vec3(0.5, 0.5, 1), 0.05, 2);
  const auto sub = bar_subregions(bar)[0];
  const auto mat = ElasticConstants::make(1.0, 0.0);
  // Source at the top end: the closed form as is; at the bottom end: negated.
  const Mat36 top = bar_integral(bar, sub, Vec3(0.5, 0.5, 1), mat);
  const Mat36 bottom = bar_integral(bar, sub, Vec3(0.5, 0.5, 0), mat);
  const Mat36 F = bar_integral_singular_local(1.0, 0.05, mat);
  CHECK(top(2, 2) == doctest::Approx(F(2, 2)));
  CHECK(bottom(2, 2) == doctest::Approx(-F(2, 2)));
  // A source inside the segment splits it.
  const Mat36 mid = bar_integral(bar, sub, Vec3(0.5, 0.5, 0.3), mat);
  const Mat36 split = bar_integral_singular_local(0.3, 0.05, mat) - bar_integral_singular_local(0.7, 0.05, mat);
  CHECK(std::abs(mid(2, 2) - split(2, 2)) < 1e-14);
  const Mat36 off = bar_integral(bar, sub, Vec3(0.52, 0.5, 0.3), mat);
  CHECK(std::abs(off(2, 2) - split(2, 2)) < 1e-14);
  // Far sources agree with the global-frame oracle.
  for (const Vec3 src : {Vec3(0.9, 0.2, 0.4), Vec3(0.5, 0.5, 1.6), Vec3(0.1, 0.8, -0.3)}) {
    const auto ref = bar_regular_reference(bar, sub, src, mat);
    CHECK(max_abs(bar_integral(bar, sub, src, mat) - ref.value) < 1e-8 * max_abs(ref.value));
  }
}
