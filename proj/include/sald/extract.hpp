#pragma once

// Level-set extraction: sampling a field on a uniform grid, marching squares
// in 2D and marching cubes in 3D, plus OBJ / SVG / CSV writers.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sald/geometry.hpp"
#include "sald/net.hpp"
#include "sald/vec.hpp"

namespace sald {

/// Node values on a uniform grid; x varies fastest. 2D grids have res[2] == 1.
struct ScalarGrid {
  int dim = 2;
  Box3 bbox;
  std::array<std::size_t, 3> res{2, 2, 1};  // nodes per axis
  std::vector<double> values;

  std::size_t index(std::size_t i, std::size_t j, std::size_t k = 0) const { return (k * res[1] + j) * res[0] + i; }
  double at(std::size_t i, std::size_t j, std::size_t k = 0) const { return values[index(i, j, k)]; }
  /// Coordinates lo + (hi - lo) * i / (res - 1): nested grids share nodes bitwise.
  Vec3 node(std::size_t i, std::size_t j, std::size_t k = 0) const;
  Vec3 spacing() const;
  /// Bilinear (2D) or trilinear (3D) interpolation, clamped to the box.
  double interpolate(const Vec3& p) const;
};

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  Vec3 face_normal(std::size_t t) const;
  double face_area(std::size_t t) const;
  double area() const;
};

struct PolylineChain {
  std::vector<Vec3> points;
  bool closed = false;
};

struct Polyline {
  std::vector<PolylineChain> chains;

  bool empty() const { return chains.empty(); }
  double length() const;
};

using ScalarField = std::function<double(const Vec3&)>;

ScalarGrid make_grid(int dim, const Box3& bbox, std::size_t res);
ScalarGrid sample_grid(const ScalarField& field, int dim, const Box3& bbox, std::size_t res);
/// f(x; z) at every node (dimension from the network).
ScalarGrid grid_eval(const ImplicitNet& net, std::span<const double> z, const Box3& bbox, std::size_t res);

/// Nodes with value < iso are inside. Saddle cells are resolved by the sign of
/// `center` at the cell centre when given, otherwise by the mean of the four
/// corners (inside diagonal connected when the centre is inside).
Polyline marching_squares(const ScalarGrid& grid, double iso = 0.0, const ScalarField& center = {});

/// Marching cubes with a case table generated from one face rule: on a face
/// whose inside corners are diagonal, the inside corners are separated.
/// Adjacent cells see the same face, so the mesh is closed away from the grid
/// boundary. Triangles are oriented with normals pointing toward increasing
/// values.
SurfaceMesh marching_cubes(const ScalarGrid& grid, double iso = 0.0);

/// Triangles of each of the 256 cases as triples of cube-edge indices.
const std::array<std::vector<std::array<std::uint8_t, 3>>, 256>& marching_cubes_table();

RawGeometry to_geometry(const SurfaceMesh& mesh);
RawGeometry to_geometry(const Polyline& polyline);

void write_obj(const SurfaceMesh& mesh, const std::filesystem::path& path);
SurfaceMesh read_obj_mesh(const std::filesystem::path& path);
/// Columns: chain,index,x,y,closed
void write_polyline_csv(const Polyline& polyline, const std::filesystem::path& path);

struct SvgLayer {
  Polyline curves;
  std::string stroke = "black";
  double width = 1.5;
};
/// Draws the layers over the optional input geometry (segments, in grey).
void write_svg(std::span<const SvgLayer> layers, const RawGeometry* overlay, const Box3& view,
               const std::filesystem::path& path, double pixels = 512.0);

}  // namespace sald
