#include "sald/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sald/error.hpp"

namespace sald::fixtures {
namespace {

std::vector<Vec3> centred(std::vector<Vec3> v) {
  Vec3 lo = v[0], hi = v[0];
  for (const Vec3& p : v) {
    for (int a = 0; a < 2; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  const Vec3 c = 0.5 * (lo + hi);
  for (Vec3& p : v) p = {p[0] - c[0], p[1] - c[1], 0.0};
  return v;
}

}  // namespace

std::vector<Vec3> l_shape_outline() {
  const double a = 1.0 / std::numbers::sqrt2;
  const double w = 0.3;
  return centred({{0.0, 0.0, 0.0}, {a, 0.0, 0.0}, {a, w, 0.0}, {w, w, 0.0}, {w, a, 0.0}, {0.0, a, 0.0}});
}

RawGeometry l_shape() {
  const auto v = l_shape_outline();
  return RawGeometry::from_polyline(v, true);
}

std::vector<Vec3> u_shape_outline() {
  return {{-0.35, -0.35, 0.0}, {0.35, -0.35, 0.0}, {0.35, 0.35, 0.0},  {0.15, 0.35, 0.0},
          {0.15, -0.1, 0.0},   {-0.15, -0.1, 0.0}, {-0.15, 0.35, 0.0}, {-0.35, 0.35, 0.0}};
}

GapShape u_with_gap(double gap) {
  if (!(gap > 0.0) || gap >= 0.7) throw Error("gap width must be in (0, 0.7)");
  GapShape g;
  g.width = gap;
  g.gap_start = {-0.5 * gap, -0.35, 0.0};
  g.gap_end = {0.5 * gap, -0.35, 0.0};
  // Walk the outline from the right end of the hole back round to its left end.
  std::vector<Vec3> path{g.gap_end};
  const auto u = u_shape_outline();
  for (std::size_t i = 1; i < u.size(); ++i) path.push_back(u[i]);
  path.push_back(u[0]);
  path.push_back(g.gap_start);
  g.geometry = RawGeometry::from_polyline(path, false);
  return g;
}

std::vector<Vec3> square_outline(double side) {
  const double h = 0.5 * side;
  return {{-h, -h, 0.0}, {h, -h, 0.0}, {h, h, 0.0}, {-h, h, 0.0}};
}

std::vector<Vec3> triangle_outline(double circumradius) {
  std::vector<Vec3> v;
  for (int k = 0; k < 3; ++k) {
    const double t = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 3.0;
    v.push_back({circumradius * std::cos(t), circumradius * std::sin(t), 0.0});
  }
  return centred(v);
}

std::vector<Vec3> circle_outline(double radius, int segments) {
  if (segments < 3) throw Error("circle needs at least 3 segments");
  std::vector<Vec3> v;
  for (int k = 0; k < segments; ++k) {
    const double t = 2.0 * std::numbers::pi * k / segments;
    v.push_back({radius * std::cos(t), radius * std::sin(t), 0.0});
  }
  return v;
}

RawGeometry by_name(const std::string& name) {
  if (name == "l-shape") return l_shape();
  if (name == "u-gap") return u_with_gap().geometry;
  std::vector<Vec3> v;
  if (name == "square") v = square_outline();
  else if (name == "triangle") v = triangle_outline();
  else if (name == "circle") v = circle_outline();
  else throw Error("unknown fixture: " + name);
  return RawGeometry::from_polyline(v, true);
}

std::vector<std::string> names() { return {"l-shape", "u-gap", "square", "triangle", "circle"}; }

double diameter(const std::vector<Vec3>& vertices) {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) d = std::max(d, distance(vertices[i], vertices[j]));
  }
  return d;
}

double diameter(const RawGeometry& geom) {
  const auto c = geom.corners();
  return diameter(std::vector<Vec3>(c.begin(), c.end()));
}

double polygon_sdf(const std::vector<Vec3>& outline, const Vec3& p) {
  if (outline.size() < 3) throw Error("polygon needs at least 3 vertices");
  double d2 = std::numeric_limits<double>::infinity();
  bool inside = false;
  for (std::size_t i = 0, j = outline.size() - 1; i < outline.size(); j = i++) {
    const Vec3& a = outline[j];
    const Vec3& b = outline[i];
    const Vec3 ab = b - a;
    const double t = std::clamp(dot(p - a, ab) / norm2(ab), 0.0, 1.0);
    d2 = std::min(d2, norm2(p - (a + t * ab)));
    if ((a[1] > p[1]) != (b[1] > p[1]) && p[0] < a[0] + (p[1] - a[1]) / (b[1] - a[1]) * ab[0]) inside = !inside;
  }
  const double d = std::sqrt(d2);
  return inside ? -d : d;
}

}  // namespace sald::fixtures
