#pragma once

#include <array>
#include <string>
#include <vector>

#include "igabem/inclusion_geometry.hpp"
#include "igabem/quadrature.hpp"

namespace igabem {

enum class BcKind { Displacement, Traction };

/// Prescribed value for one component over a whole patch.
struct ComponentBc {
  BcKind kind = BcKind::Traction;
  double value = 0.0;
};

/// Boundary patch. The outward normal is du x dv. The surface is already
/// refined, so it carries both geometry and the field bases.
struct BoundaryPatch {
  std::string name;
  NurbsSurface surface;
  std::array<ComponentBc, 3> bc;
};

struct Model {
  ElasticConstants material;
  std::vector<BoundaryPatch> patches;
  std::vector<GeneralInclusion> generals;
  std::vector<LinearInclusion> bars;
  QuadratureOptions quadrature;
};

struct NamedSurface {
  std::string name;
  NurbsSurface surface;
};

/// Bilinear faces of the box [lo, hi] with outward du x dv, in the order
/// bottom, top, front (y = lo), back, left (x = lo), right.
std::vector<NamedSurface> box_faces(const Vec3& lo, const Vec3& hi);

struct Refinement {
  int elevate_u = 0;
  int elevate_v = 0;
  std::vector<double> insert_u;
  std::vector<double> insert_v;
};

/// Order elevation first, then knot insertion.
NurbsSurface refine(const NurbsSurface& surface, const Refinement& r);

}  // namespace igabem
