#include "doctest.h"
#include "igabem/error.hpp"
#include "igabem/solver.hpp"
#include "test_support.hpp"

using namespace igabem;
using namespace igabem::testing;

namespace {

const Vec3 kLo(0, 0, 0), kHi(1, 1, 1);

double rel(const VecX& a, const VecX& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Model composite(double e_incl, double tz = 1.0) {
  Model m = box_model(kLo, kHi, 1.0, 0.2, tz);
  auto incl = box_inclusion(Vec3(0.25, 0.25, 0.3), Vec3(0.75, 0.75, 0.7), {3, 3, 3});
  incl.material = ElasticConstants::make(e_incl, 0.2);
  m.generals.push_back(incl);
  auto bar = straight_bar(Vec3(0.1, 0.1, 0.0), Vec3(0.1, 0.1, 1.0), 0.03, 4);
  bar.material = ElasticConstants::make(e_incl, 0.0);
  m.bars.push_back(bar);
  return m;
}

}  // namespace

TEST_CASE("method names and option validation") {
  CHECK(parse_method("newton") == SolveMethod::Newton);
  CHECK(std::string(to_string(SolveMethod::Coupled)) == "coupled");
  CHECK_THROWS_AS(parse_method("lu"), DomainError);
  CHECK_THROWS_AS(validate(SolveOptions{SolveMethod::OneStep, 0.0, 10}), DomainError);
  CHECK_THROWS_AS(validate(SolveOptions{SolveMethod::OneStep, 1e-8, 0}), DomainError);
}

TEST_CASE("zero contrast") {
  const auto s = assemble(composite(1.0));
  const VecX x0 = s.L.partialPivLu().solve(s.r);
  const auto one = solve_onestep(s);
  CHECK(rel(one.x, x0) < 1e-12);
  CHECK(one.sigma0.cwiseAbs().maxCoeff() < 1e-12);
  const auto newton = solve_newton_modified(s);
  CHECK(newton.iterations == 1);
  CHECK(newton.increments[0] == 0.0);
  const auto coupled = solve_coupled(s);
  const VecX plain = s.Bhat * (s.Ahat * coupled.x + s.cbar);
  CHECK((coupled.strain - plain).norm() < 1e-12 * plain.norm());
}

TEST_CASE("methods agree with a stiffer inclusion and bar") {
  const auto s = assemble(composite(2.0));
  const auto one = solve_onestep(s);
  const auto coupled = solve_coupled(s);
  SolveOptions o;
  o.tol = 1e-12;
  const auto newton = solve_newton_modified(s, o);
  CHECK(one.residual < 1e-10);
  CHECK(rel(coupled.x, one.x) < 1e-10);
  CHECK(rel(coupled.strain, one.strain) < 1e-10);
  CHECK(rel(newton.x, one.x) < 1e-8);
  CHECK(rel(newton.sigma0, one.sigma0) < 1e-8);
  CHECK(newton.converged);
  for (std::size_t i = 1; i < newton.increments.size(); ++i) CHECK(newton.increments[i] < newton.increments[i - 1]);
  // sigma0 = (D - D_incl) eps at every grid value.
  CHECK((one.sigma0 - s.Dd * one.strain).norm() == 0.0);
  const int bar0 = s.grid.bar_offset[0];
  for (int g = bar0; g < s.grid.size(); ++g)
    for (int c = 0; c < 6; ++c)
      if (c != 2) CHECK(one.sigma0[6 * g + c] == 0.0);
}

TEST_CASE("Newton reports nonconvergence") {
  const auto s = assemble(composite(2.0));
  SolveOptions o;
  o.method = SolveMethod::Newton;
  o.max_iter = 2;
  o.tol = 1e-14;
  CHECK_THROWS_AS(solve(s, o), SolveError);
}

TEST_CASE("linearity in the load") {
  const auto a = solve_onestep(assemble(composite(3.0, 1.0)));
  const auto b = solve_onestep(assemble(composite(3.0, 2.5)));
  CHECK(rel(b.x, 2.5 * a.x) < 1e-12);
  CHECK(rel(b.u, 2.5 * a.u) < 1e-12);
  CHECK(rel(b.strain, 2.5 * a.strain) < 1e-12);
  CHECK(rel(b.sigma0, 2.5 * a.sigma0) < 1e-12);
}

TEST_CASE("recovered stresses") {
  // Homogeneous uniaxial state: stress (0, 0, 1, 0, 0, 0) everywhere.
  Model m = box_model(kLo, kHi, 1.0, 0.0, 1.0);
  auto incl = box_inclusion(Vec3(0.3, 0.3, 0.3), Vec3(0.7, 0.7, 0.7));
  incl.material = m.material;
  m.generals.push_back(incl);
  m.bars.push_back(straight_bar(Vec3(0.5, 0.5, 0.0), Vec3(0.5, 0.5, 1.0), 0.05, 3));
  m.bars[0].material = m.material;
  const auto s = assemble(m);
  const auto res = solve_onestep(s);
  const auto f = recover_fields(m, s, res);
  Vec6 ref;
  ref << 0, 0, 1, 0, 0, 0;
  for (int g = 0; g < 8; ++g) CHECK((f.stress.segment<6>(6 * g) - ref).cwiseAbs().maxCoeff() < 2e-3);
  for (int g = 8; g < s.grid.size(); ++g) {
    CHECK(std::abs(f.stress[6 * g + 2] - 1.0) < 2e-3);
    CHECK(f.bar_force[g] == doctest::Approx(f.stress[6 * g + 2] * kPi * 0.05 * 0.05).epsilon(1e-14));
  }
}
