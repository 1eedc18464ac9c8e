#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "sald/error.hpp"
#include "sald/extract.hpp"

using namespace sald;

namespace {

const Box3 kUnitBox{{-1, -1, -1}, {1, 1, 1}};

double sphere(const Vec3& p) { return norm(p) - 0.5; }

// Every directed edge must be matched by exactly one reversed edge.
bool closed_and_oriented(const SurfaceMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) ++directed[{t[e], t[(e + 1) % 3]}];
  }
  for (const auto& [edge, count] : directed) {
    if (count != 1) return false;
    const auto it = directed.find({edge.second, edge.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "sald_test_extract";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Grid, NodesAndInterpolation) {
  const ScalarGrid g = sample_grid([](const Vec3& p) { return 2 * p[0] - p[1] + 0.5; }, 2, kUnitBox, 5);
  EXPECT_EQ(g.res[0], 5u);
  EXPECT_EQ(g.res[2], 1u);
  EXPECT_EQ(g.values.size(), 25u);
  EXPECT_EQ(g.node(0, 0)[0], -1.0);
  EXPECT_EQ(g.node(4, 4)[1], 1.0);
  EXPECT_EQ(g.node(2, 0)[0], 0.0);
  EXPECT_DOUBLE_EQ(g.at(3, 1), 2 * 0.5 - (-0.5) + 0.5);
  // Bilinear interpolation reproduces affine fields.
  EXPECT_NEAR(g.interpolate({0.13, -0.71, 0}), 2 * 0.13 + 0.71 + 0.5, 1e-14);
  EXPECT_THROW(make_grid(2, kUnitBox, 1), Error);
}

TEST(MarchingSquares, SingleCellCases) {
  Box3 box{{0, 0, 0}, {1, 1, 0}};
  ScalarGrid g = make_grid(2, box, 2);
  g.values = {-1, 1, 1, 1};  // only (0,0) inside
  Polyline p = marching_squares(g);
  ASSERT_EQ(p.chains.size(), 1u);
  ASSERT_EQ(p.chains[0].points.size(), 2u);
  EXPECT_FALSE(p.chains[0].closed);
  EXPECT_NEAR(p.length(), std::sqrt(0.5), 1e-15);

  g.values = {1, 1, 1, 1};
  EXPECT_TRUE(marching_squares(g).empty());
  g.values = {-1, -1, -1, -1};
  EXPECT_TRUE(marching_squares(g).empty());
}

TEST(MarchingSquares, SaddleUsesCentre) {
  Box3 box{{0, 0, 0}, {1, 1, 0}};
  ScalarGrid g = make_grid(2, box, 2);
  // (0,0) and (1,1) inside.
  g.values = {-1, 1, 1, -1};
  const auto inside = [](const Vec3&) { return -1.0; };
  const auto outside = [](const Vec3&) { return 1.0; };
  // Joined inside diagonal: the two segments cut off the outside corners.
  const Polyline joined = marching_squares(g, 0.0, inside);
  const Polyline split = marching_squares(g, 0.0, outside);
  ASSERT_EQ(joined.chains.size(), 2u);
  ASSERT_EQ(split.chains.size(), 2u);
  auto cuts_off = [](const Polyline& p, const Vec3& corner) {
    for (const auto& c : p.chains) {
      const Vec3 mid = 0.5 * (c.points[0] + c.points[1]);
      if (distance(mid, corner) < 0.4) return true;
    }
    return false;
  };
  EXPECT_TRUE(cuts_off(joined, {1, 0, 0}));
  EXPECT_TRUE(cuts_off(joined, {0, 1, 0}));
  EXPECT_TRUE(cuts_off(split, {0, 0, 0}));
  EXPECT_TRUE(cuts_off(split, {1, 1, 0}));
  // Without a callback the corner mean (0) is not inside.
  EXPECT_TRUE(cuts_off(marching_squares(g), {0, 0, 0}));
}

TEST(MarchingSquares, CircleIsOneClosedChain) {
  const ScalarGrid g = sample_grid([](const Vec3& p) { return norm(p) - 0.6; }, 2, kUnitBox, 129);
  const Polyline p = marching_squares(g);
  ASSERT_EQ(p.chains.size(), 1u);
  EXPECT_TRUE(p.chains[0].closed);
  const double h = 2.0 / 128;
  for (const Vec3& v : p.chains[0].points) EXPECT_NEAR(norm(v), 0.6, h * h);
  EXPECT_NEAR(p.length(), 2 * std::numbers::pi * 0.6, 1e-3);
  // Points are distinct after welding.
  const auto& pts = p.chains[0].points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) EXPECT_NE(pts[i], pts[i + 1]);
}

TEST(MarchingSquares, OpenCurveAtBoundary) {
  const ScalarGrid g = sample_grid([](const Vec3& p) { return p[1] - 0.1 * p[0]; }, 2, kUnitBox, 33);
  const Polyline p = marching_squares(g);
  ASSERT_EQ(p.chains.size(), 1u);
  EXPECT_FALSE(p.chains[0].closed);
  EXPECT_NEAR(p.length(), 2 * std::sqrt(1.01), 1e-12);
}

TEST(MarchingCubes, TableIsComplete) {
  const auto& table = marching_cubes_table();
  EXPECT_TRUE(table[0].empty());
  EXPECT_TRUE(table[255].empty());
  EXPECT_EQ(table[1].size(), 1u);
  for (int c = 1; c < 255; ++c) {
    EXPECT_FALSE(table[c].empty()) << c;
    // Complementary cases cut the same set of edges.
    std::set<int> a, b;
    for (const auto& t : table[c]) a.insert(t.begin(), t.end());
    for (const auto& t : table[255 - c]) b.insert(t.begin(), t.end());
    EXPECT_EQ(a, b) << c;
    // Each cut edge has exactly one sign change.
    static const int edges[12][2] = {{0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6},
                                     {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
    for (int e = 0; e < 12; ++e) {
      const bool cut = ((c >> edges[e][0]) & 1) != ((c >> edges[e][1]) & 1);
      EXPECT_EQ(cut, a.count(e) == 1) << "case " << c << " edge " << e;
    }
  }
}

TEST(MarchingCubes, EveryCaseIsClosedInsideAGrid) {
  // Each configuration embedded in a 4x4x4 grid of outside values is a closed
  // surface when the inside corners stay away from the border.
  for (int c = 1; c < 256; ++c) {
    ScalarGrid g = make_grid(3, kUnitBox, 4);
    std::fill(g.values.begin(), g.values.end(), 1.0);
    for (int v = 0; v < 8; ++v) {
      if ((c >> v) & 1) {
        const int dx = (v == 1 || v == 2 || v == 5 || v == 6), dy = (v == 2 || v == 3 || v == 6 || v == 7),
                  dz = v >= 4;
        g.values[g.index(1 + dx, 1 + dy, 1 + dz)] = -1.0;
      }
    }
    const SurfaceMesh m = marching_cubes(g);
    EXPECT_TRUE(closed_and_oriented(m)) << "case " << c;
  }
}

TEST(MarchingCubes, SphereAt64) {
  const ScalarGrid g = sample_grid(sphere, 3, kUnitBox, 64);
  const SurfaceMesh m = marching_cubes(g);
  ASSERT_FALSE(m.empty());
  EXPECT_TRUE(closed_and_oriented(m));
  const double diag = norm(g.spacing());
  for (const Vec3& v : m.vertices) EXPECT_LE(std::abs(norm(v) - 0.5), 1.5 * diag);
  // Normals point toward increasing values: outward.
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const Vec3 c = (1.0 / 3.0) * (m.vertices[m.triangles[t][0]] + m.vertices[m.triangles[t][1]] +
                                  m.vertices[m.triangles[t][2]]);
    if (m.face_area(t) > 1e-12) {
      EXPECT_GT(dot(m.face_normal(t), c), 0.0);
    }
  }
  // Euler characteristic of a sphere.
  const long long v = static_cast<long long>(m.vertices.size()), f = static_cast<long long>(m.triangles.size());
  EXPECT_EQ(v - f / 2, 2);
}

TEST(MarchingCubes, SphereAreaAt128) {
  const ScalarGrid g = sample_grid(sphere, 3, kUnitBox, 128);
  const SurfaceMesh m = marching_cubes(g);
  const double exact = 4 * std::numbers::pi * 0.25;
  EXPECT_NEAR(m.area(), exact, 0.05 * exact);
}

TEST(MarchingCubes, TorusHasGenusOne) {
  const auto torus = [](const Vec3& p) {
    const double q = std::hypot(p[0], p[1]) - 0.5;
    return std::hypot(q, p[2]) - 0.2;
  };
  const SurfaceMesh m = marching_cubes(sample_grid(torus, 3, kUnitBox, 48));
  EXPECT_TRUE(closed_and_oriented(m));
  EXPECT_EQ(static_cast<long long>(m.vertices.size()) - static_cast<long long>(m.triangles.size()) / 2, 0);
}

TEST(MarchingCubes, RandomFieldsStayClosed) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 20; ++trial) {
    ScalarGrid g = make_grid(3, kUnitBox, 8);
    for (double& v : g.values) v = u(rng);
    // Push the border outside so the surface cannot reach it.
    for (std::size_t k = 0; k < 8; ++k) {
      for (std::size_t j = 0; j < 8; ++j) {
        for (std::size_t i = 0; i < 8; ++i) {
          if (i == 0 || j == 0 || k == 0 || i == 7 || j == 7 || k == 7) g.values[g.index(i, j, k)] = 1.0;
        }
      }
    }
    EXPECT_TRUE(closed_and_oriented(marching_cubes(g))) << trial;
  }
}

TEST(ExtractIO, ObjRoundTrip) {
  const SurfaceMesh m = marching_cubes(sample_grid(sphere, 3, kUnitBox, 16));
  const auto path = temp_path("sphere.obj");
  write_obj(m, path);
  const SurfaceMesh r = read_obj_mesh(path);
  ASSERT_EQ(r.vertices.size(), m.vertices.size());
  EXPECT_EQ(r.triangles, m.triangles);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) EXPECT_EQ(r.vertices[i], m.vertices[i]);
  const RawGeometry geom = to_geometry(m);
  EXPECT_NEAR(geom.total_measure(), m.area(), 1e-12);
}

TEST(ExtractIO, PolylineCsvAndSvg) {
  const Polyline p = marching_squares(sample_grid([](const Vec3& q) { return norm(q) - 0.5; }, 2, kUnitBox, 17));
  const auto csv = temp_path("circle.csv");
  write_polyline_csv(p, csv);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "chain,index,x,y,closed");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, p.chains[0].points.size());

  const auto svg = temp_path("circle.svg");
  const std::vector<SvgLayer> layers{{p, "black", 1.5}};
  const RawGeometry overlay = to_geometry(p);
  write_svg(layers, &overlay, kUnitBox, svg);
  std::ifstream s(svg);
  std::stringstream buf;
  buf << s.rdbuf();
  EXPECT_NE(buf.str().find("<svg"), std::string::npos);
  EXPECT_NE(buf.str().find("</svg>"), std::string::npos);
  EXPECT_NEAR(overlay.total_measure(), p.length(), 1e-12);
}
