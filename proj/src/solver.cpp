#include "igabem/solver.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "igabem/error.hpp"

namespace igabem {

namespace {

Eigen::PartialPivLU<MatX> factor(const MatX& A, const char* what) {
  if (A.rows() != A.cols()) throw SolveError(std::string(what) + " is not square");
  Eigen::PartialPivLU<MatX> lu(A);
  const double rc = A.rows() ? lu.rcond() : 1.0;
  if (!(rc > 1e-14)) {
    std::ostringstream msg;
    msg << what << " is singular or badly conditioned (rcond " << rc << ")";
    throw SolveError(msg.str());
  }
  return lu;
}

void finish_fields(const SystemMatrices& s, SolveResult& res) {
  res.u = s.Ahat * res.x + s.cbar + s.B0bar * res.sigma0;
  const double rn = s.r.norm();
  res.residual = (s.L * res.x - s.r - s.B0 * res.sigma0).norm() / (rn > 0.0 ? rn : 1.0);
}

}  // namespace

const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::OneStep: return "onestep";
    case SolveMethod::Coupled: return "coupled";
    case SolveMethod::Newton: return "newton";
  }
  return "?";
}

SolveMethod parse_method(const std::string& name) {
  if (name == "onestep") return SolveMethod::OneStep;
  if (name == "coupled") return SolveMethod::Coupled;
  if (name == "newton") return SolveMethod::Newton;
  throw DomainError("unknown solve method '" + name + "' (onestep, coupled, newton)");
}

void validate(const SolveOptions& o) {
  if (!(o.tol > 0.0)) throw DomainError("solver tol must be positive");
  if (o.max_iter < 1) throw DomainError("solver max_iter must be >= 1");
}

SolveResult solve_onestep(const SystemMatrices& s, const SolveOptions& opts) {
  validate(opts);
  SolveResult res;
  res.method = SolveMethod::OneStep;
  const int E = static_cast<int>(s.Dd.rows());
  const MatX C = s.Bhat * s.Ahat;
  const VecX cc = s.Bhat * s.cbar;
  const MatX K = MatX::Identity(E, E) - s.Bhat * s.B0bar * s.Dd;
  const auto Kf = factor(K, "strain coupling matrix (I - C0 (D - D_incl))");
  const MatX A = Kf.solve(C);
  const VecX b = Kf.solve(cc);
  const MatX BD = s.B0 * s.Dd;
  const MatX Lp = s.L - BD * A;
  const VecX rp = s.r + BD * b;
  res.x = factor(Lp, "condensed system matrix").solve(rp);
  res.strain = A * res.x + b;
  res.sigma0 = s.Dd * res.strain;
  res.iterations = 1;
  finish_fields(s, res);
  return res;
}

SolveResult solve_coupled(const SystemMatrices& s, const SolveOptions& opts) {
  validate(opts);
  SolveResult res;
  res.method = SolveMethod::Coupled;
  const int n = static_cast<int>(s.L.cols());
  const int E = static_cast<int>(s.Dd.rows());
  MatX S(n + E, n + E);
  S.topLeftCorner(n, n) = s.L;
  S.topRightCorner(n, E) = -s.B0 * s.Dd;
  S.bottomLeftCorner(E, n) = -s.Bhat * s.Ahat;
  S.bottomRightCorner(E, E) = MatX::Identity(E, E) - s.Bhat * s.B0bar * s.Dd;
  VecX rhs(n + E);
  rhs.head(n) = s.r;
  rhs.tail(E) = s.Bhat * s.cbar;
  const VecX sol = factor(S, "coupled block system").solve(rhs);
  res.x = sol.head(n);
  res.strain = sol.tail(E);
  res.sigma0 = s.Dd * res.strain;
  res.iterations = 1;
  finish_fields(s, res);
  return res;
}

SolveResult solve_newton_modified(const SystemMatrices& s, const SolveOptions& opts) {
  validate(opts);
  SolveResult res;
  res.method = SolveMethod::Newton;
  const auto Lf = factor(s.L, "boundary system matrix L");
  const int E = static_cast<int>(s.Dd.rows());
  res.x = Lf.solve(s.r);
  res.sigma0 = VecX::Zero(E);
  res.converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const VecX u = s.Ahat * res.x + s.cbar + s.B0bar * res.sigma0;
    const VecX sigma = s.Dd * (s.Bhat * u);
    const VecX dx = Lf.solve(s.B0 * (sigma - res.sigma0));
    res.x += dx;
    res.sigma0 = sigma;
    const double total = res.x.norm();
    const double ratio = dx.norm() == 0.0 ? 0.0 : dx.norm() / total;
    res.increments.push_back(ratio);
    res.iterations = it;
    if (ratio < opts.tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) {
    std::ostringstream msg;
    msg << "modified Newton-Raphson did not converge in " << opts.max_iter << " iterations; increments:";
    for (double v : res.increments) msg << ' ' << v;
    throw SolveError(msg.str());
  }
  // Fields consistent with the converged boundary solution.
  res.strain = s.Bhat * (s.Ahat * res.x + s.cbar + s.B0bar * res.sigma0);
  res.sigma0 = s.Dd * res.strain;
  finish_fields(s, res);
  return res;
}

SolveResult solve(const SystemMatrices& s, const SolveOptions& opts) {
  switch (opts.method) {
    case SolveMethod::OneStep: return solve_onestep(s, opts);
    case SolveMethod::Coupled: return solve_coupled(s, opts);
    case SolveMethod::Newton: return solve_newton_modified(s, opts);
  }
  throw DomainError("unknown solve method");
}

RecoveredFields recover_fields(const Model& model, const SystemMatrices& s, const SolveResult& res) {
  const int M = s.grid.size();
  RecoveredFields f;
  f.stress = VecX::Zero(6 * M);
  f.bar_force.assign(M, 0.0);
  for (int g = 0; g < M; ++g) {
    const auto& e = s.grid.points[g];
    const Vec6 eps = res.strain.segment<6>(6 * g);
    if (e.bar) {
      const auto& bar = model.bars[e.inclusion];
      const double axial = bar.material.E * eps[2];
      f.stress[6 * g + 2] = axial;
      f.bar_force[g] = axial * kPi * bar.radius * bar.radius;
    } else {
      f.stress.segment<6>(6 * g) = elasticity_matrix(model.generals[e.inclusion].material) * eps;
    }
  }
  return f;
}

BoundaryField boundary_field(const Model& model, const DofMap& d, const VecX& x) {
  BoundaryField f;
  f.displacement.resize(d.nodes.size());
  for (std::size_t m = 0; m < d.nodes.size(); ++m)
    for (int j = 0; j < 3; ++j) f.displacement[m][j] = d.u_index[m][j] >= 0 ? x[d.u_index[m][j]] : d.u_known[m][j];
  f.traction.resize(model.patches.size());
  for (std::size_t p = 0; p < model.patches.size(); ++p) {
    f.traction[p].resize(d.t_index[p].size());
    for (std::size_t k = 0; k < d.t_index[p].size(); ++k)
      for (int j = 0; j < 3; ++j)
        f.traction[p][k][j] = d.t_index[p][k][j] >= 0 ? x[d.t_index[p][k][j]] : model.patches[p].bc[j].value;
  }
  return f;
}

Vec3 probe_displacement(const Model& model, const SystemMatrices& s, const SolveResult& res, const Vec3& point) {
  const auto f = boundary_field(model, s.dofs, res.x);
  const double tol = 1e-9 * s.dofs.diameter;
  for (std::size_t p = 0; p < model.patches.size(); ++p) {
    const auto& surf = model.patches[p].surface;
    const auto cp = closest_point(surf, point);
    if (cp.distance > tol) continue;
    const auto b = surf.basis(cp.param[0], cp.param[1]);
    Vec3 u = Vec3::Zero();
    for (int a = 0; a < b.count; ++a) u += b.value[a] * f.displacement[s.dofs.patch_nodes[p][b.index[a]]];
    return u;
  }
  Vec3 u = Vec3::Zero();
  Mat3 t_total = Mat3::Zero();
  for (std::size_t p = 0; p < model.patches.size(); ++p) {
    const auto pi = integrate_patch_regular(model.patches[p].surface, point, model.material, model.quadrature);
    t_total += pi.T_total;
    for (std::size_t k = 0; k < pi.U.size(); ++k)
      u += pi.U[k] * f.traction[p][k] - pi.T[k] * f.displacement[s.dofs.patch_nodes[p][k]];
  }
  if ((t_total + Mat3::Identity()).cwiseAbs().maxCoeff() > 0.5)
    throw DomainError("probe point lies outside the domain");
  if (s.grid.size() > 0) u += inclusion_rows(model, s.grid, point) * res.sigma0;
  return u;
}

}  // namespace igabem
