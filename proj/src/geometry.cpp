#include "sald/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "sald/error.hpp"

namespace sald {
namespace {

constexpr std::uint32_t kLeafSize = 4;

Box3 empty_box() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return {{inf, inf, inf}, {-inf, -inf, -inf}};
}

void grow(Box3& b, const Vec3& p) {
  for (int i = 0; i < 3; ++i) {
    b.lo[i] = std::min(b.lo[i], p[i]);
    b.hi[i] = std::max(b.hi[i], p[i]);
  }
}

void grow(Box3& b, const Box3& o) {
  grow(b, o.lo);
  grow(b, o.hi);
}

double box_distance2(const Box3& b, const Vec3& y) {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = std::max({b.lo[i] - y[i], 0.0, y[i] - b.hi[i]});
    d2 += d * d;
  }
  return d2;
}

Vec3 closest_on_segment(const Vec3& y, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp(dot(y - a, ab) / norm2(ab), 0.0, 1.0);
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return a + t * ab;
}

// Closest point on triangle abc by Voronoi-region classification.
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = dot(ab, ap);
  const double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp);
  const double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp);
  const double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + (vb * denom) * ab + (vc * denom) * ac;
}

}  // namespace

RawGeometry RawGeometry::from_points(int dim, std::vector<Vec3> points) {
  RawGeometry g;
  g.dim_ = dim;
  g.kind_ = PrimitiveKind::Point;
  g.arity_ = 1;
  g.corners_ = std::move(points);
  g.validate_and_index();
  return g;
}

RawGeometry RawGeometry::from_segments(int dim, std::span<const std::array<Vec3, 2>> segments) {
  RawGeometry g;
  g.dim_ = dim;
  g.kind_ = PrimitiveKind::Segment;
  g.arity_ = 2;
  g.corners_.reserve(segments.size() * 2);
  for (const auto& s : segments) {
    g.corners_.push_back(s[0]);
    g.corners_.push_back(s[1]);
  }
  g.validate_and_index();
  return g;
}

RawGeometry RawGeometry::from_triangles(std::span<const std::array<Vec3, 3>> triangles) {
  RawGeometry g;
  g.dim_ = 3;
  g.kind_ = PrimitiveKind::Triangle;
  g.arity_ = 3;
  g.corners_.reserve(triangles.size() * 3);
  for (const auto& t : triangles) g.corners_.insert(g.corners_.end(), t.begin(), t.end());
  g.validate_and_index();
  return g;
}

RawGeometry RawGeometry::from_polyline(std::span<const Vec3> vertices, bool closed) {
  std::vector<std::array<Vec3, 2>> segs;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i + 1 < n; ++i) segs.push_back({vertices[i], vertices[i + 1]});
  if (closed && n > 2) segs.push_back({vertices[n - 1], vertices[0]});
  const bool planar = std::all_of(vertices.begin(), vertices.end(), [](const Vec3& v) { return v[2] == 0.0; });
  return from_segments(planar ? 2 : 3, segs);
}

void RawGeometry::validate_and_index() {
  if (dim_ != 2 && dim_ != 3) throw Error("geometry dimension must be 2 or 3");
  if (kind_ == PrimitiveKind::Triangle && dim_ != 3) throw Error("triangles require dimension 3");
  for (const Vec3& c : corners_) {
    if (!all_finite(c)) throw Error("geometry has non-finite coordinates");
    if (dim_ == 2 && c[2] != 0.0) throw Error("2D geometry must have z == 0");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(measure(i) > 0.0)) {
      throw Error("degenerate primitive " + std::to_string(i) + " (zero length or area)");
    }
  }
  if (size() > std::numeric_limits<std::uint32_t>::max()) throw Error("too many primitives");

  order_.resize(size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.clear();
  if (empty()) return;
  std::vector<Box3> boxes(size(), empty_box());
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t k = 0; k < arity_; ++k) grow(boxes[i], corner(i, k));
  }
  nodes_.reserve(2 * size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(size()), boxes);
}

std::uint32_t RawGeometry::build(std::uint32_t first, std::uint32_t count, std::vector<Box3>& boxes) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Box3 box = empty_box();
  Box3 centroids = empty_box();
  for (std::uint32_t i = first; i < first + count; ++i) {
    const Box3& b = boxes[order_[i]];
    grow(box, b);
    grow(centroids, 0.5 * (b.lo + b.hi));
  }
  nodes_[index].box = box;
  if (count <= kLeafSize) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (centroids.hi[a] - centroids.lo[a] > centroids.hi[axis] - centroids.lo[axis]) axis = a;
  }
  const std::uint32_t half = count / 2;
  auto begin = order_.begin() + first;
  std::nth_element(begin, begin + half, begin + count, [&](std::uint32_t l, std::uint32_t r) {
    const double cl = boxes[l].lo[axis] + boxes[l].hi[axis];
    const double cr = boxes[r].lo[axis] + boxes[r].hi[axis];
    return cl < cr || (cl == cr && l < r);
  });
  const std::uint32_t left = build(first, half, boxes);
  const std::uint32_t right = build(first + half, count - half, boxes);
  nodes_[index].first = left;
  nodes_[index].right = right;
  nodes_[index].count = 0;
  return index;
}

double RawGeometry::measure(std::size_t i) const {
  switch (kind_) {
    case PrimitiveKind::Point: return 1.0;
    case PrimitiveKind::Segment: return distance(corner(i, 0), corner(i, 1));
    case PrimitiveKind::Triangle:
      return 0.5 * norm(cross(corner(i, 1) - corner(i, 0), corner(i, 2) - corner(i, 0)));
  }
  return 0.0;
}

double RawGeometry::total_measure() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += measure(i);
  return s;
}

Vec3 RawGeometry::normal(std::size_t i) const {
  switch (kind_) {
    case PrimitiveKind::Point: return {0.0, 0.0, 0.0};
    case PrimitiveKind::Segment: {
      const Vec3 d = corner(i, 1) - corner(i, 0);
      if (dim_ == 2) return normalized(Vec3{-d[1], d[0], 0.0});
      // Segments embedded in 3D have a normal plane, not a direction; pick
      // the component of +z (or +y) orthogonal to the segment.
      Vec3 ref = std::abs(d[2]) < 0.9 * norm(d) ? Vec3{0.0, 0.0, 1.0} : Vec3{0.0, 1.0, 0.0};
      return normalized(cross(cross(d, ref), d));
    }
    case PrimitiveKind::Triangle:
      return normalized(cross(corner(i, 1) - corner(i, 0), corner(i, 2) - corner(i, 0)));
  }
  return {0.0, 0.0, 0.0};
}

Box3 RawGeometry::bounds() const {
  Box3 b = empty_box();
  for (const Vec3& c : corners_) grow(b, c);
  return b;
}

double RawGeometry::primitive_distance2(std::size_t i, const Vec3& y, Vec3& closest) const {
  switch (kind_) {
    case PrimitiveKind::Point: closest = corner(i, 0); break;
    case PrimitiveKind::Segment: closest = closest_on_segment(y, corner(i, 0), corner(i, 1)); break;
    case PrimitiveKind::Triangle:
      closest = closest_on_triangle(y, corner(i, 0), corner(i, 1), corner(i, 2));
      break;
  }
  return norm2(y - closest);
}

void RawGeometry::check_query(const Vec3& y) const {
  if (empty()) throw Error("empty geometry");
  if (!all_finite(y)) throw Error("query point is not finite");
  if (dim_ == 2 && y[2] != 0.0) throw Error("dimension mismatch: 3D query on 2D geometry");
}

ClosestHit RawGeometry::closest(const Vec3& y) const {
  check_query(y);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = std::numeric_limits<std::size_t>::max();
  Vec3 best_point{};

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance2(node.box, y) > best) continue;
    if (node.count > 0) {
      for (std::uint32_t j = node.first; j < node.first + node.count; ++j) {
        const std::size_t prim = order_[j];
        Vec3 c;
        const double d2 = primitive_distance2(prim, y, c);
        if (d2 < best || (d2 == best && prim < best_index)) {
          best = d2;
          best_index = prim;
          best_point = c;
        }
      }
      continue;
    }
    const double dl = box_distance2(nodes_[node.first].box, y);
    const double dr = box_distance2(nodes_[node.right].box, y);
    // Push the farther child first so the nearer one is visited next.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.first;
    } else {
      stack[top++] = node.first;
      stack[top++] = node.right;
    }
  }
  return {best_point, std::sqrt(best), best_index};
}

double unsigned_distance(const RawGeometry& geom, const Vec3& y) { return geom.closest(y).distance; }

Vec3 project(const RawGeometry& geom, const Vec3& y) { return geom.closest(y).point; }

Vec3 unsigned_gradient(const RawGeometry& geom, const Vec3& y) {
  const ClosestHit hit = geom.closest(y);
  if (hit.distance > 1e-12) return (1.0 / hit.distance) * (y - hit.point);
  if (geom.kind() == PrimitiveKind::Point) {
    throw Error("unsigned gradient is undefined on a point primitive");
  }
  return geom.normal(hit.primitive);
}

}  // namespace sald
