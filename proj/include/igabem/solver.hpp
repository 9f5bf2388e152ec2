#pragma once

#include <string>
#include <vector>

#include "igabem/assembly.hpp"

namespace igabem {

enum class SolveMethod { OneStep, Coupled, Newton };

const char* to_string(SolveMethod m);
SolveMethod parse_method(const std::string& name);  // throws DomainError

struct SolveOptions {
  SolveMethod method = SolveMethod::OneStep;
  double tol = 1e-10;  // Newton: relative norm of the boundary increment
  int max_iter = 200;
};

void validate(const SolveOptions& opts);

struct SolveResult {
  SolveMethod method = SolveMethod::OneStep;
  VecX x;        // boundary unknowns
  VecX u;        // grid displacements (3M)
  VecX strain;   // grid strains (6M); bars hold local components
  VecX sigma0;   // grid initial stresses (6M)
  std::vector<double> increments;  // Newton: |x_i| / |sum x| per iteration
  int iterations = 0;
  bool converged = true;
  double residual = 0.0;  // |L x - r - B0 sigma0| / |r|
};

SolveResult solve_onestep(const SystemMatrices& sys, const SolveOptions& opts = {});
SolveResult solve_coupled(const SystemMatrices& sys, const SolveOptions& opts = {});
/// Throws SolveError after max_iter; the message carries the history.
SolveResult solve_newton_modified(const SystemMatrices& sys, const SolveOptions& opts = {});
SolveResult solve(const SystemMatrices& sys, const SolveOptions& opts);

struct RecoveredFields {
  VecX stress;                    // 6M: inclusion stress D_incl eps; bars local axial only
  std::vector<double> bar_force;  // per grid point; zero for general inclusions
};

RecoveredFields recover_fields(const Model& model, const SystemMatrices& sys, const SolveResult& res);

/// Boundary solution unpacked per node (displacement) and per patch control
/// point (traction), prescribed values included.
struct BoundaryField {
  std::vector<Vec3> displacement;
  std::vector<std::vector<Vec3>> traction;
};

BoundaryField boundary_field(const Model& model, const DofMap& dofs, const VecX& x);

/// Displacement anywhere in the closed domain: patch bases on the boundary,
/// the interior displacement identity elsewhere.
Vec3 probe_displacement(const Model& model, const SystemMatrices& sys, const SolveResult& res, const Vec3& point);

}  // namespace igabem
