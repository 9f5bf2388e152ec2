#include "igabem/model.hpp"

namespace igabem {

namespace {

NurbsSurface quad(const Vec3& o, const Vec3& eu, const Vec3& ev) {
  KnotVector k({0, 0, 1, 1}, 1);
  return NurbsSurface(k, k, {o, o + eu, o + ev, o + eu + ev});
}

}  // namespace

std::vector<NamedSurface> box_faces(const Vec3& lo, const Vec3& hi) {
  const Vec3 d = hi - lo;
  const Vec3 ex(d[0], 0, 0), ey(0, d[1], 0), ez(0, 0, d[2]);
  return {
      {"bottom", quad(lo, ey, ex)},
      {"top", quad(lo + ez, ex, ey)},
      {"front", quad(lo, ex, ez)},
      {"back", quad(lo + ey, ez, ex)},
      {"left", quad(lo, ez, ey)},
      {"right", quad(lo + ex, ey, ez)},
  };
}

NurbsSurface refine(const NurbsSurface& surface, const Refinement& r) {
  NurbsSurface s = surface;
  for (int i = 0; i < r.elevate_u; ++i) s = elevate_order(s, Direction::U);
  for (int i = 0; i < r.elevate_v; ++i) s = elevate_order(s, Direction::V);
  for (double u : r.insert_u) s = insert_knot(s, Direction::U, u);
  for (double v : r.insert_v) s = insert_knot(s, Direction::V, v);
  return s;
}

}  // namespace igabem
