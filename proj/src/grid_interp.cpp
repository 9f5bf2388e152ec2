#include "igabem/grid_interp.hpp"

#include <algorithm>
#include <cmath>

#include "igabem/error.hpp"

namespace igabem {

Shape1D shape_linear(double xi) {
  return {{0.5 * (1.0 - xi), 0.5 * (1.0 + xi)}, {-0.5, 0.5}};
}

Shape1D shape_quadratic(double xi) {
  const double m2 = 1.0 - xi * xi;
  return {{0.5 * (1.0 - xi) - 0.5 * m2, m2, 0.5 * (1.0 + xi) - 0.5 * m2}, {xi - 0.5, -2.0 * xi, xi + 0.5}};
}

ShapeStencil grid_derivative_stencil(int n_points, double spacing, int idx) {
  if (n_points < 2) throw DomainError("derivative stencil needs at least 2 points");
  if (idx < 0 || idx >= n_points) throw DomainError("stencil index outside grid");
  if (!(spacing > 0.0)) throw DomainError("grid spacing must be positive");
  ShapeStencil st;
  // d/ds = (1/spacing) d/dxi, since xi spans two grid intervals.
  if (n_points == 2) {
    st.index = {0, 1};
    st.weight = {-1.0 / spacing, 1.0 / spacing};
    return st;
  }
  int first;
  double xi;
  if (idx == 0) {
    first = 0;
    xi = -1.0;
  } else if (idx == n_points - 1) {
    first = n_points - 3;
    xi = 1.0;
  } else {
    first = idx - 1;
    xi = 0.0;
  }
  const auto q = shape_quadratic(xi);
  for (int a = 0; a < 3; ++a) {
    st.index.push_back(first + a);
    st.weight.push_back(q.deriv[a] / spacing);
  }
  return st;
}

std::vector<SigmaWeight> sigma_interpolation(const GeneralInclusion& incl, const Vec3& local) {
  std::array<int, 3> cell{};
  std::array<double, 3> frac{};
  for (int d = 0; d < 3; ++d) {
    const int n = incl.grid[d];
    const double c = std::clamp(local[d], 0.0, 1.0) * (n - 1);
    if (incl.sigma_mode == SigmaMode::Constant) {
      cell[d] = std::clamp(static_cast<int>(std::floor(c + 0.5)), 0, n - 1);
    } else {
      cell[d] = std::clamp(static_cast<int>(std::floor(c)), 0, n - 2);
      frac[d] = c - cell[d];
    }
  }
  std::vector<SigmaWeight> out;
  if (incl.sigma_mode == SigmaMode::Constant) {
    out.push_back({incl.grid_index(cell[0], cell[1], cell[2]), 1.0});
    return out;
  }
  for (int c = 0; c < 2; ++c) {
    const double wr = c ? frac[2] : 1.0 - frac[2];
    for (int b = 0; b < 2; ++b) {
      const double wt = b ? frac[1] : 1.0 - frac[1];
      for (int a = 0; a < 2; ++a) {
        const double w = (a ? frac[0] : 1.0 - frac[0]) * wt * wr;
        if (w != 0.0) out.push_back({incl.grid_index(cell[0] + a, cell[1] + b, cell[2] + c), w});
      }
    }
  }
  return out;
}

std::vector<SigmaWeight> sigma_interpolation(const LinearInclusion& incl, int subregion) {
  if (subregion < 0 || subregion >= incl.points - 1) throw DomainError("bar subregion index out of range");
  return {{subregion, 0.5}, {subregion + 1, 0.5}};
}

std::vector<BhatBlock> build_Bhat_general(const GeneralInclusion& incl, int k, const Mat3& jacobi) {
  const auto& n = incl.grid;
  const int i0 = k % n[0];
  const int i1 = (k / n[0]) % n[1];
  const int i2 = k / (n[0] * n[1]);
  const std::array<int, 3> ijk{i0, i1, i2};

  Eigen::FullPivLU<Mat3> lu(jacobi);
  if (!lu.isInvertible() || std::abs(jacobi.determinant()) < 1e-14 * jacobi.rowwise().norm().prod())
    throw GeometryError("singular Jacobi matrix at grid point " + std::to_string(k) + " of '" + incl.name + "'");
  const Mat3 jinv = lu.inverse();

  // Local derivative of each participating grid function, keyed by grid index.
  std::vector<std::pair<int, Vec3>> local;
  auto add = [&local](int g, int dir, double w) {
    for (auto& [idx, d] : local) {
      if (idx == g) {
        d[dir] += w;
        return;
      }
    }
    Vec3 d = Vec3::Zero();
    d[dir] = w;
    local.emplace_back(g, d);
  };
  for (int dir = 0; dir < 3; ++dir) {
    const auto st = grid_derivative_stencil(n[dir], 1.0 / (n[dir] - 1), ijk[dir]);
    for (std::size_t a = 0; a < st.index.size(); ++a) {
      auto at = ijk;
      at[dir] = st.index[a];
      add(incl.grid_index(at[0], at[1], at[2]), dir, st.weight[a]);
    }
  }
  std::sort(local.begin(), local.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<BhatBlock> out;
  for (const auto& [g, dl] : local) {
    const Vec3 d = jinv * dl;
    Mat63 b = Mat63::Zero();
    b(0, 0) = d[0];
    b(1, 1) = d[1];
    b(2, 2) = d[2];
    b(3, 0) = d[1];
    b(3, 1) = d[0];
    b(4, 1) = d[2];
    b(4, 2) = d[1];
    b(5, 0) = d[2];
    b(5, 2) = d[0];
    out.push_back({g, b});
  }
  return out;
}

std::vector<BhatBlock> build_Bhat_bar(const LinearInclusion& incl, int j, const LocalFrame& frame) {
  const auto st = grid_derivative_stencil(incl.points, 1.0 / (incl.points - 1), j);
  std::vector<BhatBlock> out;
  for (std::size_t a = 0; a < st.index.size(); ++a) {
    Mat63 b = Mat63::Zero();
    b.row(2) = (st.weight[a] / frame.jacobian) * frame.z.transpose();
    out.push_back({st.index[a], b});
  }
  return out;
}

}  // namespace igabem
