#pragma once

// Built-in 2D test shapes, all centred at the origin with diameter about 1.

#include <string>
#include <vector>

#include "sald/geometry.hpp"
#include "sald/vec.hpp"

namespace sald::fixtures {

/// Closed L: a square of diagonal 1 with one quadrant-sized notch removed.
std::vector<Vec3> l_shape_outline();
RawGeometry l_shape();

/// Open U outline whose bottom edge has a hole of the given width.
struct GapShape {
  RawGeometry geometry;
  Vec3 gap_start;  // left end of the hole
  Vec3 gap_end;    // right end
  double width = 0.0;
};
GapShape u_with_gap(double gap = 0.2);
/// The full outline, hole included.
std::vector<Vec3> u_shape_outline();

std::vector<Vec3> square_outline(double side = 0.6);
std::vector<Vec3> triangle_outline(double circumradius = 0.45);
std::vector<Vec3> circle_outline(double radius = 0.4, int segments = 64);

/// "l-shape", "u-gap", "square", "triangle", "circle".
RawGeometry by_name(const std::string& name);
std::vector<std::string> names();

/// Largest distance between two vertices.
double diameter(const std::vector<Vec3>& vertices);
double diameter(const RawGeometry& geom);

/// Signed distance to a simple closed polygon: negative inside.
double polygon_sdf(const std::vector<Vec3>& outline, const Vec3& p);

}  // namespace sald::fixtures
