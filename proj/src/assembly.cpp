#include "igabem/assembly.hpp"

#include <cmath>
#include <sstream>

#include "igabem/error.hpp"
#include "igabem/grid_interp.hpp"
#include "parallel.hpp"

namespace igabem {

namespace {

std::string fmt_point(const Vec3& p) {
  std::ostringstream s;
  s << "(" << p[0] << ", " << p[1] << ", " << p[2] << ")";
  return s.str();
}

double patches_diameter(const std::vector<BoundaryPatch>& patches) {
  Eigen::AlignedBox3d box;
  for (const auto& p : patches)
    for (const auto& x : p.surface.points()) box.extend(x);
  return box.isEmpty() ? 0.0 : box.diagonal().norm();
}

// Unique positions of all control points; coincident points share one node.
std::vector<std::vector<int>> merge_nodes(const std::vector<BoundaryPatch>& patches, double tol,
                                          std::vector<Vec3>& nodes) {
  std::vector<std::vector<int>> out(patches.size());
  for (std::size_t p = 0; p < patches.size(); ++p) {
    for (const auto& x : patches[p].surface.points()) {
      int found = -1;
      for (std::size_t m = 0; m < nodes.size() && found < 0; ++m)
        if ((nodes[m] - x).norm() <= tol) found = static_cast<int>(m);
      if (found < 0) {
        found = static_cast<int>(nodes.size());
        nodes.push_back(x);
      }
      out[p].push_back(found);
    }
  }
  return out;
}

bool on_patch_edge(const NurbsSurface& s, int k) {
  const int i = k % s.count_u(), j = k / s.count_u();
  return i == 0 || j == 0 || i == s.count_u() - 1 || j == s.count_v() - 1;
}

// Parameters of the source on a patch, if it lies on it.
std::optional<Vec2> locate_on_patch(const NurbsSurface& s, const Vec3& x, double tol) {
  Eigen::AlignedBox3d box;
  for (const auto& p : s.points()) box.extend(p);
  if (box.exteriorDistance(x) > tol) return std::nullopt;
  const auto cp = closest_point(s, x);
  if (cp.distance > tol) return std::nullopt;
  return cp.param;
}

// Boundary integrals for one source folded onto the unknowns: `sign_H` and
// `sign_G` multiply the T and U terms; prescribed terms go to `known` with
// the same signs.
struct RowBuilder {
  const Model& model;
  const DofMap& dofs;
  std::vector<Mat3> H;                // per node
  std::vector<PatchIntegrals> G;      // per patch (U part used)

  explicit RowBuilder(const Model& m, const DofMap& d) : model(m), dofs(d), H(d.nodes.size(), Mat3::Zero()) {
    G.resize(m.patches.size());
  }

  void add_patch(int p, PatchIntegrals&& pi) {
    for (std::size_t k = 0; k < pi.T.size(); ++k) H[dofs.patch_nodes[p][k]] += pi.T[k];
    G[p] = std::move(pi);
  }

  void fold(double sign_H, double sign_G, Eigen::Ref<MatX> rows, Vec3& known) const {
    for (std::size_t m = 0; m < H.size(); ++m) {
      for (int j = 0; j < 3; ++j) {
        const Vec3 col = sign_H * H[m].col(j);
        const int idx = dofs.u_index[m][j];
        if (idx >= 0)
          rows.col(idx) += col;
        else
          known += col * dofs.u_known[m][j];
      }
    }
    for (std::size_t p = 0; p < G.size(); ++p) {
      const auto& bc = model.patches[p].bc;
      for (std::size_t k = 0; k < G[p].U.size(); ++k) {
        for (int j = 0; j < 3; ++j) {
          const Vec3 col = sign_G * G[p].U[k].col(j);
          const int idx = dofs.t_index[p][k][j];
          if (idx >= 0)
            rows.col(idx) += col;
          else
            known += col * bc[j].value;
        }
      }
    }
  }
};

}  // namespace

int DofMap::count_u_unknowns() const {
  int n = 0;
  for (const auto& u : u_index)
    for (int i : u) n += i >= 0;
  return n;
}

GridLayout make_grid_layout(const Model& model) {
  GridLayout g;
  for (std::size_t i = 0; i < model.generals.size(); ++i) {
    g.general_offset.push_back(g.size());
    const auto pts = grid_points(model.generals[i]);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k)
      g.points.push_back({false, static_cast<int>(i), k, pts[k].position});
  }
  for (std::size_t i = 0; i < model.bars.size(); ++i) {
    g.bar_offset.push_back(g.size());
    const auto pts = grid_points(model.bars[i]);
    for (int k = 0; k < static_cast<int>(pts.size()); ++k)
      g.points.push_back({true, static_cast<int>(i), k, pts[k].position});
  }
  return g;
}

void check_watertight(const std::vector<BoundaryPatch>& patches) {
  if (patches.empty()) throw GeometryError("no boundary patches");
  const double diam = patches_diameter(patches);
  if (!(diam > 0.0)) throw GeometryError("boundary has zero extent");
  QuadratureOptions opts;
  const Vec3 far = Vec3::Constant(1e6 * diam);
  Vec3 nsum = Vec3::Zero();
  Vec3 centre = Vec3::Zero();
  double area = 0.0, volume = 0.0;
  std::size_t count = 0;
  for (const auto& p : patches)
    for (const auto& x : p.surface.points()) centre += x, ++count;
  centre /= static_cast<double>(count);
  for (const auto& p : patches) {
    double patch_area = 0.0;
    for_each_surface_point(p.surface, far, std::nullopt, opts, [&](const SurfaceQuadPoint& q, const SurfaceBasis&) {
      nsum += q.weight * q.normal;
      patch_area += q.weight;
      volume += q.weight * (q.point - centre).dot(q.normal) / 3.0;
    });
    if (!(patch_area > 1e-12 * diam * diam)) throw GeometryError("patch '" + p.name + "' is degenerate (zero area)");
    area += patch_area;
  }
  if (nsum.norm() > 1e-6 * area) {
    std::ostringstream msg;
    msg << "boundary is not closed: |integral of n| = " << nsum.norm() << " for area " << area;
    throw GeometryError(msg.str());
  }
  if (!(volume > 0.0)) throw GeometryError("boundary normals point inward (du x dv must face outward)");

  std::vector<Vec3> nodes;
  const auto pn = merge_nodes(patches, 1e-9 * diam, nodes);
  std::vector<int> uses(nodes.size(), 0);
  for (std::size_t p = 0; p < patches.size(); ++p) {
    std::vector<int> seen = pn[p];
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (int m : seen) ++uses[m];
  }
  for (std::size_t p = 0; p < patches.size(); ++p) {
    const auto& s = patches[p].surface;
    for (int k = 0; k < s.size(); ++k)
      if (on_patch_edge(s, k) && uses[pn[p][k]] < 2)
        throw GeometryError("patch '" + patches[p].name + "': edge control point " + fmt_point(s.points()[k]) +
                            " is not shared with a neighbouring patch");
  }
}

DofMap build_dof_map(const std::vector<BoundaryPatch>& patches) {
  DofMap d;
  d.diameter = patches_diameter(patches);
  const double tol = 1e-9 * d.diameter;
  d.patch_nodes = merge_nodes(patches, tol, d.nodes);
  const int nn = static_cast<int>(d.nodes.size());

  std::vector<std::array<int, 3>> fixed_by(nn, {-1, -1, -1});
  d.u_known.assign(nn, Vec3::Zero());
  for (std::size_t p = 0; p < patches.size(); ++p) {
    for (std::size_t k = 0; k < d.patch_nodes[p].size(); ++k) {
      const int m = d.patch_nodes[p][k];
      for (int c = 0; c < 3; ++c) {
        const auto& bc = patches[p].bc[c];
        if (bc.kind != BcKind::Displacement) continue;
        if (fixed_by[m][c] >= 0 && fixed_by[m][c] != static_cast<int>(p)) {
          const double a = d.u_known[m][c];
          if (std::abs(a - bc.value) > 1e-12 * std::max({1.0, std::abs(a), std::abs(bc.value)})) {
            std::ostringstream msg;
            msg << "conflicting prescribed displacement at " << fmt_point(d.nodes[m]) << ", component " << c
                << ": " << a << " on patch '" << patches[fixed_by[m][c]].name << "' vs " << bc.value
                << " on patch '" << patches[p].name << "'";
            throw AssemblyError(msg.str());
          }
          continue;
        }
        fixed_by[m][c] = static_cast<int>(p);
        d.u_known[m][c] = bc.value;
      }
    }
  }

  int idx = 0;
  d.u_index.assign(nn, {-1, -1, -1});
  for (int m = 0; m < nn; ++m)
    for (int c = 0; c < 3; ++c)
      if (fixed_by[m][c] < 0) d.u_index[m][c] = idx++;
  d.t_index.resize(patches.size());
  for (std::size_t p = 0; p < patches.size(); ++p) {
    d.t_index[p].assign(d.patch_nodes[p].size(), {-1, -1, -1});
    for (std::size_t k = 0; k < d.patch_nodes[p].size(); ++k)
      for (int c = 0; c < 3; ++c)
        if (patches[p].bc[c].kind == BcKind::Displacement) d.t_index[p][k][c] = idx++;
  }
  d.unknowns = idx;

  // Home collocation point: Greville image on the first patch holding the node.
  std::vector<std::vector<double>> gu(patches.size()), gv(patches.size());
  for (std::size_t p = 0; p < patches.size(); ++p) {
    gu[p] = greville_abscissae(patches[p].surface.knots_u());
    gv[p] = greville_abscissae(patches[p].surface.knots_v());
  }
  std::vector<std::pair<int, int>> owner(nn, {-1, -1});
  for (std::size_t p = 0; p < patches.size(); ++p)
    for (std::size_t k = 0; k < d.patch_nodes[p].size(); ++k)
      if (owner[d.patch_nodes[p][k]].first < 0) owner[d.patch_nodes[p][k]] = {static_cast<int>(p), static_cast<int>(k)};
  for (int m = 0; m < nn; ++m) {
    const auto [p, k] = owner[m];
    const auto& s = patches[p].surface;
    Collocation c;
    c.patch = p;
    c.param = Vec2(gu[p][k % s.count_u()], gv[p][k / s.count_u()]);
    c.point = s.point(c.param[0], c.param[1]);
    c.node = m;
    c.row = {3 * m, 3 * m + 1, 3 * m + 2};
    d.collocation.push_back(c);
  }

  // A node fixed on k > 1 patches carries k traction unknowns per component;
  // the k - 1 extra rows collocate just inside the extra patches.
  int row = 3 * nn;
  auto shifted = [](const std::vector<double>& g, int i) {
    const int nb = i + 1 < static_cast<int>(g.size()) ? i + 1 : i - 1;
    return g[i] + 0.2 * (g[nb] - g[i]);
  };
  for (int m = 0; m < nn; ++m) {
    for (int c = 0; c < 3; ++c) {
      if (fixed_by[m][c] < 0) continue;
      bool first = true;
      for (std::size_t p = 0; p < patches.size(); ++p) {
        if (patches[p].bc[c].kind != BcKind::Displacement) continue;
        for (std::size_t k = 0; k < d.patch_nodes[p].size(); ++k) {
          if (d.patch_nodes[p][k] != m) continue;
          if (first) {
            first = false;
            continue;
          }
          const auto& s = patches[p].surface;
          Collocation e;
          e.patch = static_cast<int>(p);
          e.param = Vec2(shifted(gu[p], static_cast<int>(k) % s.count_u()), shifted(gv[p], static_cast<int>(k) / s.count_u()));
          e.point = s.point(e.param[0], e.param[1]);
          e.node = m;
          e.row[c] = row++;
          d.collocation.push_back(e);
        }
      }
    }
  }
  d.rows = row;
  if (d.rows != d.unknowns) {
    std::ostringstream msg;
    msg << "boundary system is not square: " << d.rows << " equations for " << d.unknowns << " unknowns";
    throw AssemblyError(msg.str());
  }
  return d;
}

SurfaceBasis home_basis(const Model& model, const Collocation& c) {
  return model.patches[c.patch].surface.basis(c.param[0], c.param[1]);
}

MatX inclusion_rows(const Model& model, const GridLayout& grid, const Vec3& source) {
  MatX out = MatX::Zero(3, 6 * grid.size());
  for (std::size_t i = 0; i < model.generals.size(); ++i) {
    const auto blocks = integrate_inclusion(model.generals[i], source, model.material, model.quadrature);
    for (std::size_t j = 0; j < blocks.size(); ++j)
      out.block<3, 6>(0, 6 * (grid.general_offset[i] + static_cast<int>(j))) += blocks[j];
  }
  for (std::size_t i = 0; i < model.bars.size(); ++i) {
    const auto& bar = model.bars[i];
    const auto subs = bar_subregions(bar);
    for (int m = 0; m < static_cast<int>(subs.size()); ++m) {
      const Mat36 block = bar_integral(bar, subs[m], source, model.material);
      for (const auto& w : sigma_interpolation(bar, m))
        out.block<3, 6>(0, 6 * (grid.bar_offset[i] + w.grid)) += w.weight * block;
    }
  }
  return out;
}

void assemble_L_r(const Model& model, const DofMap& dofs, const GridLayout& grid, MatX& L, VecX& r, MatX* B0,
                  const AssemblyOptions& opts) {
  L = MatX::Zero(dofs.rows, dofs.unknowns);
  r = VecX::Zero(dofs.rows);
  if (B0) *B0 = MatX::Zero(dofs.rows, 6 * grid.size());
  const double tol = 1e-9 * dofs.diameter;
  const int np = static_cast<int>(model.patches.size());
  detail::parallel_for(static_cast<int>(dofs.collocation.size()), opts.threads, [&](int ci) {
    const auto& c = dofs.collocation[ci];
    RowBuilder rb(model, dofs);
    const SurfaceBasis home = home_basis(model, c);
    for (int p = 0; p < np; ++p) {
      const auto& s = model.patches[p].surface;
      const auto param = p == c.patch ? std::optional<Vec2>(c.param) : locate_on_patch(s, c.point, tol);
      if (param) {
        rb.add_patch(p, integrate_patch_singular(s, *param, model.material, model.quadrature));
      } else {
        auto pi = integrate_patch_regular(s, c.point, model.material, model.quadrature);
        // Regularisation: -(integral of T) u(x^), with u(x^) from the home patch basis.
        for (int a = 0; a < home.count; ++a)
          rb.H[dofs.patch_nodes[c.patch][home.index[a]]] -= home.value[a] * pi.T_total;
        rb.add_patch(p, std::move(pi));
      }
    }
    MatX rows = MatX::Zero(3, dofs.unknowns);
    Vec3 known = Vec3::Zero();
    rb.fold(1.0, -1.0, rows, known);
    MatX b0;
    if (B0) b0 = inclusion_rows(model, grid, c.point);
    for (int i = 0; i < 3; ++i) {
      if (c.row[i] < 0) continue;
      L.row(c.row[i]) = rows.row(i);
      r[c.row[i]] = -known[i];
      if (B0) B0->row(c.row[i]) = b0.row(i);
    }
  });
}

void assemble_interior(const Model& model, const DofMap& dofs, const GridLayout& grid, MatX& Ahat, VecX& cbar,
                       MatX& B0bar, std::vector<bool>& on_boundary, const AssemblyOptions& opts) {
  const int M = grid.size();
  Ahat = MatX::Zero(3 * M, dofs.unknowns);
  cbar = VecX::Zero(3 * M);
  B0bar = MatX::Zero(3 * M, 6 * M);
  std::vector<char> flag(M, 0);
  const double tol = 1e-9 * dofs.diameter;
  const int np = static_cast<int>(model.patches.size());
  detail::parallel_for(M, opts.threads, [&](int g) {
    const Vec3& x = grid.points[g].position;
    for (int p = 0; p < np; ++p) {
      const auto& patch = model.patches[p];
      const auto param = locate_on_patch(patch.surface, x, tol);
      if (!param) continue;
      // Boundary point: u from the patch basis, no inclusion term.
      flag[g] = 1;
      const auto b = patch.surface.basis((*param)[0], (*param)[1]);
      for (int a = 0; a < b.count; ++a) {
        const int m = dofs.patch_nodes[p][b.index[a]];
        for (int j = 0; j < 3; ++j) {
          const int idx = dofs.u_index[m][j];
          if (idx >= 0)
            Ahat(3 * g + j, idx) += b.value[a];
          else
            cbar[3 * g + j] += b.value[a] * dofs.u_known[m][j];
        }
      }
      return;
    }
    RowBuilder rb(model, dofs);
    Mat3 t_total = Mat3::Zero();
    for (int p = 0; p < np; ++p) {
      auto pi = integrate_patch_regular(model.patches[p].surface, x, model.material, model.quadrature);
      t_total += pi.T_total;
      rb.add_patch(p, std::move(pi));
    }
    if ((t_total + Mat3::Identity()).cwiseAbs().maxCoeff() > 0.5) {
      const auto& e = grid.points[g];
      throw AssemblyError(std::string(e.bar ? "bar '" + model.bars[e.inclusion].name
                                            : "inclusion '" + model.generals[e.inclusion].name) +
                          "': grid point " + fmt_point(x) + " lies outside the domain");
    }
    MatX rows = MatX::Zero(3, dofs.unknowns);
    Vec3 known = Vec3::Zero();
    rb.fold(-1.0, 1.0, rows, known);
    Ahat.middleRows(3 * g, 3) = rows;
    cbar.segment<3>(3 * g) = known;
    B0bar.middleRows(3 * g, 3) = inclusion_rows(model, grid, x);
  });
  on_boundary.assign(flag.begin(), flag.end());
}

MatX stack_Bhat(const Model& model, const GridLayout& grid) {
  const int M = grid.size();
  MatX B = MatX::Zero(6 * M, 3 * M);
  for (std::size_t i = 0; i < model.generals.size(); ++i) {
    const auto& incl = model.generals[i];
    const int off = grid.general_offset[i];
    const auto pts = grid_points(incl);
    for (int k = 0; k < incl.grid_count(); ++k) {
      const auto& loc = pts[k].local;
      const Mat3 jac = map_general(incl, loc[0], loc[1], loc[2]).jacobi;
      for (const auto& blk : build_Bhat_general(incl, k, jac)) B.block<6, 3>(6 * (off + k), 3 * (off + blk.grid)) += blk.block;
    }
  }
  for (std::size_t i = 0; i < model.bars.size(); ++i) {
    const auto& bar = model.bars[i];
    const int off = grid.bar_offset[i];
    for (int j = 0; j < bar.points; ++j) {
      const double s = double(j) / (bar.points - 1);
      const auto frame = bar_frame(bar, s, bar.axis.point(s));
      for (const auto& blk : build_Bhat_bar(bar, j, frame)) B.block<6, 3>(6 * (off + j), 3 * (off + blk.grid)) += blk.block;
    }
  }
  return B;
}

MatX initial_stress_matrix(const Model& model, const GridLayout& grid) {
  const int M = grid.size();
  MatX D = MatX::Zero(6 * M, 6 * M);
  const Mat6 Dm = elasticity_matrix(model.material);
  for (int g = 0; g < M; ++g) {
    const auto& e = grid.points[g];
    D.block<6, 6>(6 * g, 6 * g) = e.bar ? bar_D_difference(model.material, model.bars[e.inclusion].material)
                                        : Mat6(Dm - elasticity_matrix(model.generals[e.inclusion].material));
  }
  return D;
}

SystemMatrices assemble(const Model& model, const AssemblyOptions& opts) {
  validate(model.quadrature);
  for (const auto& g : model.generals) validate(g);
  for (const auto& b : model.bars) validate(b);
  check_watertight(model.patches);
  SystemMatrices s;
  s.dofs = build_dof_map(model.patches);
  s.grid = make_grid_layout(model);
  assemble_L_r(model, s.dofs, s.grid, s.L, s.r, &s.B0, opts);
  assemble_interior(model, s.dofs, s.grid, s.Ahat, s.cbar, s.B0bar, s.grid_on_boundary, opts);
  s.Bhat = stack_Bhat(model, s.grid);
  s.Dd = initial_stress_matrix(model, s.grid);
  return s;
}

}  // namespace igabem
