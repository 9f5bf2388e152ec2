#include "igabem/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "igabem/grid_interp.hpp"
#include "igabem/model.hpp"
#include "igabem/solver.hpp"

namespace igabem {

namespace {

OracleReport report(std::string id, double measured, double tolerance, std::string detail, double reference = 0.0) {
  OracleReport r;
  r.id = std::move(id);
  r.measured = measured;
  r.reference = reference;
  r.tolerance = tolerance;
  r.pass = measured <= tolerance;
  r.detail = std::move(detail);
  return r;
}

double max_abs(const Mat36& m) { return m.cwiseAbs().maxCoeff(); }

ElasticConstants scaled(const ElasticConstants& m, double s) {
  ElasticConstants out = m;
  out.C *= s;
  return out;
}

GeneralInclusion unit_box(std::array<int, 3> grid) {
  KnotVector k({0, 0, 1, 1}, 1);
  GeneralInclusion g;
  g.name = "unit";
  g.bottom = NurbsSurface(k, k, {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)});
  g.top = NurbsSurface(k, k, {Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1), Vec3(1, 1, 1)});
  g.grid = grid;
  g.material = ElasticConstants::make(2.0, 0.3);
  return g;
}

}  // namespace

OracleReport check_closed_box(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(0.05, 0.95);
  const auto mat = ElasticConstants::make(1.0, 0.3);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Vec3 src(uni(rng), uni(rng), uni(rng));
    worst = std::max(worst, closed_box_residual(Vec3::Zero(), Vec3::Ones(), src, mat, QuadratureOptions{}));
  }
  return report("closed_box_T_identity", worst, 1e-4, "max |sum of integral T + I| over 10 interior sources");
}

OracleReport check_bar_regular(const VerifyOptions& o, int configurations) {
  std::mt19937 rng(o.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < configurations; ++i) {
    const double H = 0.05 + uni(rng), R = 0.01 + 0.05 * uni(rng);
    const double y = R * (1.05 + 20.0 * uni(rng));
    const double z = -0.5 + (H + 1.0) * uni(rng);
    const auto mat = ElasticConstants::make(0.5 + uni(rng), 0.45 * uni(rng));
    const Mat36 a = bar_integral_regular_local(y, z, H, R, scaled(mat, o.kernel_constant_scale));
    const auto ref = bar_regular_reference(y, z, H, R, mat);
    worst = std::max(worst, max_abs(a - ref.value) / max_abs(ref.value));
  }
  return report("bar_regular_vs_line_quadrature", worst, 1e-8,
                std::to_string(configurations) + " random sources outside the cylinder, max relative error");
}

OracleReport check_bar_singular(const VerifyOptions& o) {
  double worst = 0.0;
  for (const auto& [H, R, nu] : {std::tuple{1.0, 0.05, 0.0}, std::tuple{0.3, 0.1, 0.3}, std::tuple{0.05, 0.05, 0.2},
                                 std::tuple{0.5, 0.02, 0.45}}) {
    const auto mat = ElasticConstants::make(1.0, nu);
    const Mat36 a = bar_integral_singular_local(H, R, scaled(mat, o.kernel_constant_scale));
    const auto ref = bar_singular_reference(H, R, mat);
    worst = std::max(worst, max_abs(a - ref.value) / max_abs(ref.value));
  }
  return report("bar_singular_vs_polar_quadrature", worst, 1e-6, "4 cylinders, max relative error");
}

OracleReport check_bar_structure() {
  // Largest entry that should vanish or equal its partner exactly.
  double worst = 0.0;
  const auto mat = ElasticConstants::make(1.3, 0.27);
  const Mat36 s = bar_integral_singular_local(0.7, 0.04, mat);
  worst = std::max({worst, std::abs(s(0, 5) - s(1, 4)), std::abs(s(2, 0) - s(2, 1))});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 6; ++c) {
      const bool listed = (r == 0 && c == 5) || (r == 1 && c == 4) || (r == 2 && c <= 2);
      if (!listed) worst = std::max(worst, std::abs(s(r, c)));
    }
  const Mat36 g = bar_integral_regular_local(0.3, 0.4, 1.0, 0.05, mat);
  const int listed[10][2] = {{0, 3}, {0, 5}, {1, 0}, {1, 1}, {1, 2}, {1, 4}, {2, 0}, {2, 1}, {2, 2}, {2, 4}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 6; ++c) {
      bool on = false;
      for (const auto& l : listed) on = on || (l[0] == r && l[1] == c);
      if (!on) worst = std::max(worst, std::abs(g(r, c)));
    }
  const Mat36 axis = bar_integral_regular_local(0.0, 1.6, 1.0, 0.05, mat);
  worst = std::max({worst, std::abs(axis(0, 3)), std::abs(axis(1, 0)), std::abs(axis(1, 1)), std::abs(axis(2, 4))});
  return report("bar_zero_entries_and_equalities", worst, 0.0, "unlisted entries, on-axis zeros, (1,6)=(2,5), (3,1)=(3,2)");
}

OracleReport check_kernel_fd(unsigned seed, int pairs) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double same = 0.0, flipped = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const Vec3 x(uni(rng), uni(rng), uni(rng));
    Vec3 y(uni(rng), uni(rng), uni(rng));
    if ((y - x).norm() < 0.1) y += Vec3(0.3, 0.2, 0.1);
    const auto mat = ElasticConstants::make(0.5 + std::abs(uni(rng)), 0.45 * std::abs(uni(rng)));
    const auto c = strain_kernel_fd_check(x, y, mat);
    same = std::max(same, c.same_sign);
    flipped = std::max(flipped, c.flipped);
  }
  std::ostringstream d;
  d << pairs << " random pairs; sign +1 (flipped sign would give " << flipped << ")";
  return report("strain_kernel_vs_fd_of_U", same, 1e-5, d.str());
}

OracleReport check_kernel_symmetry(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const auto mat = ElasticConstants::make(2.0, 0.25);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec3 x(uni(rng), uni(rng), uni(rng)), y(uni(rng), uni(rng), uni(rng));
    const auto t = kernel_E_tensor(x, y, mat);
    for (int a = 0; a < 3; ++a) worst = std::max(worst, (t[a] - t[a].transpose()).cwiseAbs().maxCoeff());
    // Source at the origin so doubling the separation is exact in floating point.
    const Mat36 e1 = kernel_E(Vec3::Zero(), y, mat);
    const Mat36 e2 = kernel_E(Vec3::Zero(), 2.0 * y, mat);
    worst = std::max(worst, max_abs(4.0 * e2 - e1) / max_abs(e1));
  }
  return report("strain_kernel_symmetry_homogeneity", worst, 0.0, "E_ijk = E_ikj and E(2r) = E(r)/4");
}

OracleReport check_patch_test() {
  Model m;
  m.material = ElasticConstants::make(1.0, 0.0);
  for (auto& f : box_faces(Vec3::Zero(), Vec3::Ones())) {
    BoundaryPatch p{f.name, refine(f.surface, {1, 1, {}, {}}), {}};
    if (f.name == "bottom")
      for (auto& c : p.bc) c = {BcKind::Displacement, 0.0};
    if (f.name == "top") p.bc[2].value = 1.0;
    m.patches.push_back(p);
  }
  const auto sys = assemble(m, {1});
  const auto res = solve_onestep(sys);
  const auto bf = boundary_field(m, sys.dofs, res.x);
  double worst = 0.0;
  for (std::size_t n = 0; n < sys.dofs.nodes.size(); ++n) {
    const Vec3 exact(0.0, 0.0, sys.dofs.nodes[n][2]);
    worst = std::max(worst, (bf.displacement[n] - exact).cwiseAbs().maxCoeff());
  }
  const Vec3 top = probe_displacement(m, sys, res, Vec3(0.5, 0.5, 1.0));
  std::ostringstream d;
  d << "uniaxial cube nu=0, t_z=1: u_z(top centre) = " << top[2] << ", max nodal error";
  return report("uniaxial_patch_test", worst, 1e-3, d.str(), 1.0);
}

OracleReport check_strain_recovery(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0.0;
  for (auto grid : {std::array<int, 3>{2, 2, 2}, std::array<int, 3>{3, 3, 3}, std::array<int, 3>{4, 3, 5}}) {
    const auto g = unit_box(grid);
    const auto pts = grid_points(g);
    const bool quadratic = grid[0] >= 3 && grid[1] >= 3 && grid[2] >= 3;
    // u_i = a_i + B_ij x_j (+ Q_ijk x_j x_k when every direction has 3+ points).
    Vec3 a;
    Mat3 B;
    std::array<Mat3, 3> Q;
    for (int i = 0; i < 3; ++i) {
      a[i] = uni(rng);
      for (int j = 0; j < 3; ++j) B(i, j) = uni(rng);
      Q[i] = Mat3::Zero();
      if (quadratic)
        for (int j = 0; j < 3; ++j)
          for (int k = 0; k < 3; ++k) Q[i](j, k) = uni(rng);
      Q[i] = 0.5 * (Q[i] + Q[i].transpose()).eval();
    }
    auto field = [&](const Vec3& x) {
      Vec3 u = a + B * x;
      for (int i = 0; i < 3; ++i) u[i] += x.dot(Q[i] * x);
      return u;
    };
    for (int k = 0; k < g.grid_count(); ++k) {
      const auto& x = pts[k].position;
      const auto map = map_general(g, pts[k].local[0], pts[k].local[1], pts[k].local[2]);
      Vec6 e = Vec6::Zero();
      for (const auto& blk : build_Bhat_general(g, k, map.jacobi)) e += blk.block * field(pts[blk.grid].position);
      Mat3 grad = B;
      for (int i = 0; i < 3; ++i) grad.row(i) += 2.0 * (Q[i] * x).transpose();
      Vec6 exact;
      exact << grad(0, 0), grad(1, 1), grad(2, 2), grad(0, 1) + grad(1, 0), grad(1, 2) + grad(2, 1),
          grad(0, 2) + grad(2, 0);
      worst = std::max(worst, (e - exact).cwiseAbs().maxCoeff());
    }
  }
  return report("strain_recovery_exactness", worst, 1e-12,
                "linear fields on 2x2x2, quadratic fields on 3x3x3 and 4x3x5 grids, identity mapping");
}

OracleReport check_singular_volume() {
  const auto g = unit_box({2, 2, 2});
  const IntegrationRegion cube{Vec3::Zero(), Vec3::Ones()};
  const auto mat = ElasticConstants::make(1.0, 0.3);
  const Vec3 corner = Vec3::Zero();
  double vol = 0.0;
  for_each_volume_point_singular(g, cube, corner, 8, [&](const VolumeQuadPoint& q) { vol += q.weight; });
  const auto a = integrate_volume_singular(g, cube, corner, corner, mat, 8);
  const auto b = integrate_volume_singular(g, cube, corner, corner, mat, 16);
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double scale = max_abs(b[j]);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 6; ++c) {
        const double ref = std::max(std::abs(b[j](r, c)), 1e-3 * scale);
        worst = std::max(worst, std::abs(a[j](r, c) - b[j](r, c)) / ref);
      }
  }
  std::ostringstream d;
  d << "corner source, orders 8 vs 16, per component; pyramid volume error " << std::abs(vol - 1.0);
  auto r = report("singular_volume_self_convergence", worst, 1e-3, d.str());
  r.pass = r.pass && std::abs(vol - 1.0) < 1e-12;
  return r;
}

std::vector<OracleReport> run_verification(const VerifyOptions& o) {
  return {check_closed_box(o.seed),     check_bar_regular(o),          check_bar_singular(o),
          check_bar_structure(),        check_kernel_fd(o.seed),       check_kernel_symmetry(o.seed),
          check_patch_test(),           check_strain_recovery(o.seed), check_singular_volume()};
}

}  // namespace igabem
