#pragma once

#include <array>
#include <vector>

#include "igabem/model.hpp"

namespace igabem {

/// One collocation point. Full points own three rows (one per component);
/// the extra points added for shared Dirichlet nodes own a single row.
struct Collocation {
  int patch = 0;  // home patch: its basis expresses u at the point
  Vec2 param;
  Vec3 point;
  int node = -1;
  std::array<int, 3> row{-1, -1, -1};
};

/// Boundary unknown layout.
struct DofMap {
  double diameter = 0.0;
  std::vector<Vec3> nodes;                           // unique control point positions
  std::vector<std::vector<int>> patch_nodes;         // [patch][cp] -> node
  std::vector<std::array<int, 3>> u_index;           // [node][comp] -> unknown, -1 when prescribed
  std::vector<Vec3> u_known;                         // prescribed displacement values
  std::vector<std::vector<std::array<int, 3>>> t_index;  // [patch][cp][comp] -> unknown, -1 when prescribed
  std::vector<Collocation> collocation;
  int unknowns = 0;
  int rows = 0;

  int count_u_unknowns() const;
};

/// Model-wide numbering of inclusion grid points: general inclusions first,
/// then bars, each in its own grid order.
struct GridLayout {
  struct Entry {
    bool bar = false;
    int inclusion = 0;
    int local = 0;  // grid index within the inclusion
    Vec3 position;
  };
  std::vector<Entry> points;
  std::vector<int> general_offset;
  std::vector<int> bar_offset;

  int size() const { return static_cast<int>(points.size()); }
};

GridLayout make_grid_layout(const Model& model);

struct SystemMatrices {
  DofMap dofs;
  GridLayout grid;
  MatX L;      // rows x unknowns
  VecX r;
  MatX B0;     // rows x 6M
  MatX Ahat;   // 3M x unknowns
  VecX cbar;
  MatX B0bar;  // 3M x 6M
  MatX Bhat;   // 6M x 3M
  MatX Dd;     // 6M x 6M block diagonal D - D_incl (bars: local axial entry)
  std::vector<bool> grid_on_boundary;
};

struct AssemblyOptions {
  int threads = 0;  // 0: hardware concurrency
};

/// Checks that the patches close a volume with outward normals and meet
/// conformingly along their edges. Throws GeometryError.
void check_watertight(const std::vector<BoundaryPatch>& patches);

/// Numbers the boundary unknowns and places the collocation points.
/// Throws AssemblyError on conflicting displacement data at a shared node.
DofMap build_dof_map(const std::vector<BoundaryPatch>& patches);

/// Displacement of the boundary at a collocation point as weights on the
/// home patch control points.
SurfaceBasis home_basis(const Model& model, const Collocation& c);

/// Rows of B0 for one source point (3 x 6M).
MatX inclusion_rows(const Model& model, const GridLayout& grid, const Vec3& source);

/// L and r from the boundary discretisation; B0 too when given.
void assemble_L_r(const Model& model, const DofMap& dofs, const GridLayout& grid, MatX& L, VecX& r, MatX* B0,
                  const AssemblyOptions& opts = {});

/// Grid displacement rows u = Ahat x + cbar + B0bar sigma0.
void assemble_interior(const Model& model, const DofMap& dofs, const GridLayout& grid, MatX& Ahat, VecX& cbar,
                       MatX& B0bar, std::vector<bool>& on_boundary, const AssemblyOptions& opts = {});

/// Stacked strain recovery matrix (6M x 3M).
MatX stack_Bhat(const Model& model, const GridLayout& grid);

/// Block diagonal D - D_incl over the grid.
MatX initial_stress_matrix(const Model& model, const GridLayout& grid);

SystemMatrices assemble(const Model& model, const AssemblyOptions& opts = {});

}  // namespace igabem
