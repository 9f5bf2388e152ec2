#include <random>

#include "doctest.h"
#include "igabem/error.hpp"
#include "igabem/inclusion_geometry.hpp"
#include "test_support.hpp"

using namespace igabem;
using namespace igabem::testing;

namespace {

GeneralInclusion wedge() {
  auto g = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1));
  // Top face shrunk by one half about its centre.
  g.top = bilinear(Vec3(0.25, 0.25, 1), Vec3(0.75, 0.25, 1), Vec3(0.25, 0.75, 1), Vec3(0.75, 0.75, 1));
  return g;
}

}  // namespace

TEST_CASE("unit cube mapping is the identity") {
  const auto g = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1));
  validate(g);
  for (double s : {0.0, 0.3, 1.0})
    for (double t : {0.1, 0.9})
      for (double r : {0.0, 0.5, 1.0}) {
        const auto m = map_general(g, s, t, r);
        CHECK((m.point - Vec3(s, t, r)).norm() < 1e-15);
        CHECK((m.jacobi - Mat3::Identity()).norm() < 1e-15);
        CHECK(m.jacobian == doctest::Approx(1.0));
      }
  CHECK_THROWS_AS(map_general(g, 1.2, 0.0, 0.0), DomainError);
}

TEST_CASE("mapping reproduces the bounding surfaces") {
  const auto g = wedge();
  CHECK((map_general(g, 0.3, 0.7, 0.0).point - g.bottom.point(0.3, 0.7)).norm() < 1e-15);
  CHECK((map_general(g, 0.3, 0.7, 1.0).point - g.top.point(0.3, 0.7)).norm() < 1e-15);
}

TEST_CASE("Jacobi matrix matches finite differences") {
  const auto g = wedge();
  const double h = 1e-6;
  for (const Vec3 q : {Vec3(0.5, 0.5, 0.5), Vec3(0.2, 0.7, 0.3), Vec3(0.9, 0.1, 0.8)}) {
    const auto m = map_general(g, q[0], q[1], q[2]);
    Mat3 fd;
    for (int d = 0; d < 3; ++d) {
      Vec3 a = q, b = q;
      a[d] -= h;
      b[d] += h;
      fd.row(d) = ((map_general(g, b[0], b[1], b[2]).point - map_general(g, a[0], a[1], a[2]).point) / (2 * h)).transpose();
    }
    CHECK((fd - m.jacobi).norm() < 1e-5 * m.jacobi.norm());
    CHECK(m.jacobian == doctest::Approx(std::abs(fd.determinant())).epsilon(1e-6));
  }
}

TEST_CASE("degenerate mapping is reported") {
  auto g = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1));
  g.top = g.bottom;
  CHECK_THROWS_AS(map_general(g, 0.5, 0.5, 0.5), GeometryError);
  CHECK_THROWS_AS(validate(g), GeometryError);
  auto h = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1), {1, 2, 2});
  CHECK_THROWS_AS(validate(h), GeometryError);
}

TEST_CASE("locating points in a general inclusion") {
  const auto g = wedge();
  const Vec3 x = map_general(g, 0.3, 0.6, 0.45).point;
  const auto loc = locate_in_general(g, x);
  REQUIRE(loc.has_value());
  CHECK((*loc - Vec3(0.3, 0.6, 0.45)).norm() < 1e-10);
  CHECK_FALSE(locate_in_general(g, Vec3(0.05, 0.05, 0.95)).has_value());
  CHECK_FALSE(locate_in_general(g, Vec3(3, 3, 3)).has_value());
  const auto corner = locate_in_general(g, Vec3(1, 1, 0));
  REQUIRE(corner.has_value());
  CHECK(*corner == Vec3(1, 1, 0));
}

TEST_CASE("bar frame") {
  const auto bar = straight_bar(Vec3(0, 0, 0), Vec3(0, 0, 1), 0.05, 2);
  validate(bar);
  const auto f = bar_frame(bar, 0.0, Vec3(1, 2, 3));
  CHECK((f.z - Vec3(0, 0, 1)).norm() < 1e-15);
  CHECK(f.jacobian == doctest::Approx(1.0));
  // Source on the axis line: x' = e_y x z'.
  const auto on = bar_frame(bar, 0.0, Vec3(0, 0, 2));
  CHECK((on.x - Vec3::UnitY().cross(Vec3::UnitZ())).norm() < 1e-15);

  std::mt19937 rng(8);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a(uni(rng), uni(rng), uni(rng));
    Vec3 b(uni(rng), uni(rng), uni(rng));
    if ((b - a).norm() < 0.2) b += Vec3(1, 1, 1);
    const auto c = straight_bar(a, b, 0.01, 3);
    const double s = 0.5 * (1.0 + uni(rng) / 2.0);
    // Every tenth source sits on the axis to exercise the fallback.
    const Vec3 src = i % 10 == 0 ? c.axis.point(0.9) : Vec3(uni(rng), uni(rng), uni(rng));
    const auto fr = bar_frame(c, s, src);
    const Mat3 T = transformation_matrix(fr);
    CHECK((T.transpose() * T - Mat3::Identity()).norm() < 1e-12);
    CHECK(T.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs((src - c.axis.point(s)).dot(fr.x)) < 1e-12);
    CHECK((src - c.axis.point(s)).dot(fr.y) >= -1e-12);
  }
  LocalFrame id{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(), 1.0};
  CHECK(transformation_matrix(id) == Mat3::Identity());
}

TEST_CASE("bar validation") {
  auto bar = straight_bar(Vec3(0, 0, 0), Vec3(0, 0, 1), -0.1, 2);
  CHECK_THROWS_AS(validate(bar), GeometryError);
  bar.radius = 0.05;
  bar.points = 1;
  CHECK_THROWS_AS(validate(bar), GeometryError);
  bar.points = 2;
  bar.axis = NurbsCurve(KnotVector({0, 0, 0, 1, 1, 1}, 2), {Vec3(0, 0, 0), Vec3(0.1, 0, 0.5), Vec3(0, 0, 1)});
  CHECK_THROWS_AS(validate(bar), GeometryError);
}

TEST_CASE("grid points and subregions") {
  const auto g = box_inclusion(Vec3(0, 0, 0), Vec3(1, 1, 1));
  const auto pts = grid_points(g);
  REQUIRE(pts.size() == 8);
  CHECK(pts[1].local == Vec3(1, 0, 0));
  CHECK(pts[2].local == Vec3(0, 1, 0));
  CHECK(pts[4].local == Vec3(0, 0, 1));
  CHECK(pts[7].position == Vec3(1, 1, 1));

  const auto g3 = box_inclusion(Vec3(2, 0, 0), Vec3(4, 1, 1), {3, 3, 3});
  const auto p3 = grid_points(g3);
  CHECK(p3.size() == 27);
  CHECK((p3[g3.grid_index(1, 2, 0)].position - Vec3(3, 1, 0)).norm() < 1e-15);

  const auto b2 = straight_bar(Vec3(0.5, 0.5, 0), Vec3(0.5, 0.5, 1), 0.05, 2);
  const auto bp = grid_points(b2);
  REQUIRE(bp.size() == 2);
  CHECK(bp[0].local[0] == 0.0);
  CHECK(bp[1].local[0] == 1.0);
  const auto s2 = bar_subregions(b2);
  REQUIRE(s2.size() == 1);
  CHECK(s2[0].length == doctest::Approx(1.0));

  const auto b21 = straight_bar(Vec3(0.5, 0.5, 0), Vec3(0.5, 0.5, 1), 0.05, 21);
  CHECK(grid_points(b21).size() == 21);
  const auto s21 = bar_subregions(b21);
  REQUIRE(s21.size() == 20);
  double vol = 0.0;
  for (const auto& s : s21) {
    CHECK(s.length == doctest::Approx(0.05));
    vol += kPi * s.radius * s.radius * s.length;
  }
  CHECK(vol == doctest::Approx(kPi * 0.05 * 0.05).epsilon(1e-12));
  CHECK((s21[3].midpoint - Vec3(0.5, 0.5, 0.175)).norm() < 1e-15);
}
