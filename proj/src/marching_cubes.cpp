#include <map>
#include <unordered_map>

#include "sald/error.hpp"
#include "sald/extract.hpp"

namespace sald {
namespace {

using CaseTable = std::array<std::vector<std::array<std::uint8_t, 3>>, 256>;

// Corner offsets: 0 (0,0,0) 1 (1,0,0) 2 (1,1,0) 3 (0,1,0) 4 (0,0,1) 5 (1,0,1) 6 (1,1,1) 7 (0,1,1)
constexpr std::array<std::array<int, 3>, 8> kCorner{{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

constexpr std::array<std::array<int, 2>, 12> kEdge{{
    {0, 1}, {1, 2}, {3, 2}, {0, 3}, {4, 5}, {5, 6}, {7, 6}, {4, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
}};

// Faces as corner cycles; orientation is fixed up in build_table.
constexpr std::array<std::array<int, 4>, 6> kFace{{
    {0, 3, 7, 4}, {1, 2, 6, 5}, {0, 1, 5, 4}, {3, 2, 6, 7}, {0, 1, 2, 3}, {4, 5, 6, 7},
}};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdge[e][0] == a && kEdge[e][1] == b) || (kEdge[e][0] == b && kEdge[e][1] == a)) return e;
  }
  throw Error("marching cubes: corners are not adjacent");
}

bool share_face(int e0, int e1) {
  for (const auto& f : kFace) {
    int hits = 0;
    for (int k = 0; k < 4; ++k) {
      const int e = edge_between(f[k], f[(k + 1) % 4]);
      hits += (e == e0) + (e == e1);
    }
    if (hits == 2) return true;
  }
  return false;
}

Vec3 corner_point(int c) {
  return {static_cast<double>(kCorner[c][0]), static_cast<double>(kCorner[c][1]), static_cast<double>(kCorner[c][2])};
}

Vec3 edge_mid(int e) { return 0.5 * (corner_point(kEdge[e][0]) + corner_point(kEdge[e][1])); }

// Boundary loops of the inside region on the cube surface, each face walked
// counterclockwise seen from outside. A run of inside corners on a face gives
// one segment from the edge where the run ends to the edge where it starts.
std::vector<std::array<std::uint8_t, 3>> triangulate_case(int code,
                                                          const std::array<std::array<int, 4>, 6>& faces) {
  std::array<int, 12> next;
  next.fill(-1);
  for (const auto& f : faces) {
    std::array<bool, 4> in{};
    for (int k = 0; k < 4; ++k) in[k] = (code >> f[k]) & 1;
    for (int k = 0; k < 4; ++k) {
      const int k1 = (k + 1) % 4;
      if (!in[k] || in[k1]) continue;
      int j = k;
      while (in[(j + 3) % 4] && (j + 3) % 4 != k) j = (j + 3) % 4;
      const int leave = edge_between(f[k], f[k1]);
      const int enter = edge_between(f[(j + 3) % 4], f[j]);
      next[leave] = enter;
    }
  }
  std::vector<std::array<std::uint8_t, 3>> tris;
  std::array<bool, 12> seen{};
  for (int start = 0; start < 12; ++start) {
    if (next[start] < 0 || seen[start]) continue;
    std::vector<int> loop;
    for (int e = start; !seen[e]; e = next[e]) {
      seen[e] = true;
      loop.push_back(e);
      if (next[e] < 0) throw Error("marching cubes: open boundary loop");
    }
    // Fan from a vertex whose chords avoid the cube faces; a chord lying in a
    // face can coincide with the neighbour's chord and pinch the surface.
    const std::size_t n = loop.size();
    std::size_t origin = 0;
    for (std::size_t s = 0; s < n; ++s) {
      bool clean = true;
      for (std::size_t i = 2; i + 1 < n && clean; ++i) clean = !share_face(loop[s], loop[(s + i) % n]);
      if (clean) {
        origin = s;
        break;
      }
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      tris.push_back({static_cast<std::uint8_t>(loop[origin]), static_cast<std::uint8_t>(loop[(origin + i) % n]),
                      static_cast<std::uint8_t>(loop[(origin + i + 1) % n])});
    }
  }
  return tris;
}

CaseTable build_table() {
  auto faces = kFace;
  const Vec3 centre{0.5, 0.5, 0.5};
  for (auto& f : faces) {
    const Vec3 p0 = corner_point(f[0]);
    const Vec3 n = cross(corner_point(f[1]) - p0, corner_point(f[2]) - p0);
    const Vec3 mid = 0.5 * (p0 + corner_point(f[2]));
    if (dot(n, mid - centre) < 0.0) std::swap(f[1], f[3]);
  }
  CaseTable table;
  for (int code = 0; code < 256; ++code) table[code] = triangulate_case(code, faces);

  // Orient every case the same way: with corner 0 inside alone, the normal
  // must point away from it.
  const auto& probe = table[1].at(0);
  const Vec3 a = edge_mid(probe[0]);
  const Vec3 n = cross(edge_mid(probe[1]) - a, edge_mid(probe[2]) - a);
  if (dot(n, Vec3{1.0, 1.0, 1.0}) < 0.0) {
    for (auto& tris : table) {
      for (auto& t : tris) std::swap(t[1], t[2]);
    }
  }
  return table;
}

}  // namespace

const CaseTable& marching_cubes_table() {
  static const CaseTable table = build_table();
  return table;
}

SurfaceMesh marching_cubes(const ScalarGrid& grid, double iso) {
  if (grid.dim != 3) throw Error("marching cubes needs a 3D grid");
  const CaseTable& table = marching_cubes_table();
  const std::size_t nx = grid.res[0], ny = grid.res[1], nz = grid.res[2];

  SurfaceMesh mesh;
  std::map<Vec3, std::uint32_t> by_position;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  auto vertex_on = [&](std::size_t i, std::size_t j, std::size_t k, int e) -> std::uint32_t {
    const auto& ca = kCorner[kEdge[e][0]];
    const auto& cb = kCorner[kEdge[e][1]];
    const std::size_t ai = i + ca[0], aj = j + ca[1], ak = k + ca[2];
    const std::size_t bi = i + cb[0], bj = j + cb[1], bk = k + cb[2];
    const int axis = ai != bi ? 0 : (aj != bj ? 1 : 2);
    const std::uint64_t id = 3 * grid.index(ai, aj, ak) + static_cast<std::uint64_t>(axis);
    if (auto it = edge_vertex.find(id); it != edge_vertex.end()) return it->second;
    const double va = grid.at(ai, aj, ak), vb = grid.at(bi, bj, bk);
    const Vec3 pa = grid.node(ai, aj, ak), pb = grid.node(bi, bj, bk);
    const double t = (iso - va) / (vb - va);
    const Vec3 p = pa + t * (pb - pa);
    auto [pos, inserted] = by_position.try_emplace(p, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (inserted) mesh.vertices.push_back(p);
    edge_vertex.emplace(id, pos->second);
    return pos->second;
  };

  for (std::size_t k = 0; k + 1 < nz; ++k) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        int code = 0;
        for (int c = 0; c < 8; ++c) {
          const double v = grid.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          code |= (v < iso ? 1 : 0) << c;
        }
        for (const auto& t : table[code]) {
          const std::uint32_t a = vertex_on(i, j, k, t[0]);
          const std::uint32_t b = vertex_on(i, j, k, t[1]);
          const std::uint32_t c = vertex_on(i, j, k, t[2]);
          if (a == b || b == c || a == c) continue;
          mesh.triangles.push_back({a, b, c});
        }
      }
    }
  }
  return mesh;
}

}  // namespace sald
