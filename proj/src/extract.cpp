#include "sald/extract.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "sald/error.hpp"
#include "sald/parallel.hpp"

namespace sald {

Vec3 ScalarGrid::node(std::size_t i, std::size_t j, std::size_t k) const {
  const std::array<std::size_t, 3> ijk{i, j, k};
  Vec3 p = bbox.lo;
  for (int a = 0; a < dim; ++a) {
    const double frac = static_cast<double>(ijk[a]) / static_cast<double>(res[a] - 1);
    p[a] = bbox.lo[a] + (bbox.hi[a] - bbox.lo[a]) * frac;
  }
  if (dim == 2) p[2] = 0.0;
  return p;
}

Vec3 ScalarGrid::spacing() const {
  Vec3 h{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) h[a] = (bbox.hi[a] - bbox.lo[a]) / static_cast<double>(res[a] - 1);
  return h;
}

double ScalarGrid::interpolate(const Vec3& p) const {
  std::array<std::size_t, 3> base{0, 0, 0};
  std::array<double, 3> frac{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const double u = (p[a] - bbox.lo[a]) / (bbox.hi[a] - bbox.lo[a]) * static_cast<double>(res[a] - 1);
    const double c = std::clamp(u, 0.0, static_cast<double>(res[a] - 1));
    base[a] = std::min(static_cast<std::size_t>(std::floor(c)), res[a] - 2);
    frac[a] = c - static_cast<double>(base[a]);
  }
  double out = 0.0;
  const int corners = dim == 2 ? 4 : 8;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    std::array<std::size_t, 3> ijk = base;
    for (int a = 0; a < dim; ++a) {
      const bool up = (c >> a) & 1;
      w *= up ? frac[a] : 1.0 - frac[a];
      ijk[a] += up ? 1 : 0;
    }
    out += w * at(ijk[0], ijk[1], ijk[2]);
  }
  return out;
}

Vec3 SurfaceMesh::face_normal(std::size_t t) const {
  const auto& tri = triangles[t];
  return normalized(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
}

double SurfaceMesh::face_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * norm(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
}

double SurfaceMesh::area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += face_area(t);
  return a;
}

double Polyline::length() const {
  double len = 0.0;
  for (const PolylineChain& c : chains) {
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) len += distance(c.points[i], c.points[i + 1]);
    if (c.closed && c.points.size() > 2) len += distance(c.points.back(), c.points.front());
  }
  return len;
}

ScalarGrid make_grid(int dim, const Box3& bbox, std::size_t res) {
  if (dim != 2 && dim != 3) throw Error("grid dimension must be 2 or 3");
  if (res < 2) throw Error("grid resolution must be at least 2");
  for (int a = 0; a < dim; ++a) {
    if (!(bbox.hi[a] > bbox.lo[a])) throw Error("grid bounding box is empty");
  }
  ScalarGrid g;
  g.dim = dim;
  g.bbox = bbox;
  g.res = {res, res, dim == 3 ? res : 1};
  g.values.assign(g.res[0] * g.res[1] * g.res[2], 0.0);
  return g;
}

ScalarGrid sample_grid(const ScalarField& field, int dim, const Box3& bbox, std::size_t res) {
  ScalarGrid g = make_grid(dim, bbox, res);
  parallel_for(g.res[2] * g.res[1], [&](std::size_t row) {
    const std::size_t j = row % g.res[1];
    const std::size_t k = row / g.res[1];
    for (std::size_t i = 0; i < g.res[0]; ++i) g.values[g.index(i, j, k)] = field(g.node(i, j, k));
  });
  return g;
}

ScalarGrid grid_eval(const ImplicitNet& net, std::span<const double> z, const Box3& bbox, std::size_t res) {
  ScalarGrid g = make_grid(net.arch().spatial_dim, bbox, res);
  std::vector<Vec3> nodes(g.values.size());
  for (std::size_t k = 0; k < g.res[2]; ++k) {
    for (std::size_t j = 0; j < g.res[1]; ++j) {
      for (std::size_t i = 0; i < g.res[0]; ++i) nodes[g.index(i, j, k)] = g.node(i, j, k);
    }
  }
  forward_batch(net, nodes, z, g.values);
  return g;
}

// --- marching squares -----------------------------------------------------------

namespace {

// Cell edges: 0 bottom (v0-v1), 1 right (v1-v2), 2 top (v3-v2), 3 left (v0-v3);
// corners v0 (i,j), v1 (i+1,j), v2 (i+1,j+1), v3 (i,j+1).
constexpr std::array<std::array<int, 4>, 16> kSquareSegments{{
    {-1, -1, -1, -1}, {3, 0, -1, -1}, {0, 1, -1, -1}, {3, 1, -1, -1},
    {1, 2, -1, -1},   {-1, -1, -1, -1}, {0, 2, -1, -1}, {3, 2, -1, -1},
    {2, 3, -1, -1},   {0, 2, -1, -1}, {-1, -1, -1, -1}, {1, 2, -1, -1},
    {1, 3, -1, -1},   {0, 1, -1, -1}, {3, 0, -1, -1},   {-1, -1, -1, -1},
}};

struct Welder {
  std::map<Vec3, std::uint32_t> by_position;
  std::vector<Vec3> points;

  std::uint32_t add(const Vec3& p) {
    auto [it, inserted] = by_position.try_emplace(p, static_cast<std::uint32_t>(points.size()));
    if (inserted) points.push_back(p);
    return it->second;
  }
};

Vec3 lerp_edge(const Vec3& pa, const Vec3& pb, double va, double vb, double iso) {
  const double t = (iso - va) / (vb - va);
  return pa + t * (pb - pa);
}

}  // namespace

Polyline marching_squares(const ScalarGrid& grid, double iso, const ScalarField& center) {
  if (grid.dim != 2) throw Error("marching squares needs a 2D grid");
  const std::size_t nx = grid.res[0], ny = grid.res[1];

  // Edge vertices are cached by global edge id so neighbouring cells share them.
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  Welder welder;
  auto vertex_on = [&](std::size_t i, std::size_t j, int e) -> std::uint32_t {
    std::size_t ai = i, aj = j, bi = i, bj = j;
    switch (e) {
      case 0: bi = i + 1; break;
      case 1: ai = i + 1; bi = i + 1; bj = j + 1; break;
      case 2: aj = j + 1; bi = i + 1; bj = j + 1; break;
      case 3: bj = j + 1; break;
    }
    const std::uint64_t id = 2 * grid.index(ai, aj) + (ai == bi ? 1 : 0);
    if (auto it = edge_vertex.find(id); it != edge_vertex.end()) return it->second;
    const Vec3 p = lerp_edge(grid.node(ai, aj), grid.node(bi, bj), grid.at(ai, aj), grid.at(bi, bj), iso);
    const std::uint32_t v = welder.add(p);
    edge_vertex.emplace(id, v);
    return v;
  };

  std::vector<std::array<std::uint32_t, 2>> segments;
  for (std::size_t j = 0; j + 1 < ny; ++j) {
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const double v[4] = {grid.at(i, j), grid.at(i + 1, j), grid.at(i + 1, j + 1), grid.at(i, j + 1)};
      int code = 0;
      for (int c = 0; c < 4; ++c) code |= (v[c] < iso ? 1 : 0) << c;
      std::array<int, 4> segs = kSquareSegments[code];
      if (code == 5 || code == 10) {
        const Vec3 mid = 0.5 * (grid.node(i, j) + grid.node(i + 1, j + 1));
        const double c = center ? center(mid) : 0.25 * (v[0] + v[1] + v[2] + v[3]);
        const bool joined = c < iso;  // inside diagonal connected through the centre
        if (code == 5) segs = joined ? std::array<int, 4>{0, 1, 2, 3} : std::array<int, 4>{3, 0, 1, 2};
        else segs = joined ? std::array<int, 4>{3, 0, 1, 2} : std::array<int, 4>{0, 1, 2, 3};
      }
      for (int s = 0; s < 4 && segs[s] >= 0; s += 2) {
        const std::uint32_t a = vertex_on(i, j, segs[s]);
        const std::uint32_t b = vertex_on(i, j, segs[s + 1]);
        if (a != b) segments.push_back({a, b});
      }
    }
  }

  // Link segments into chains: open chains from degree-1 vertices, then loops.
  const std::size_t nv = welder.points.size();
  std::vector<std::vector<std::uint32_t>> adj(nv);
  for (std::uint32_t s = 0; s < segments.size(); ++s) {
    adj[segments[s][0]].push_back(s);
    adj[segments[s][1]].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);
  Polyline out;
  auto walk = [&](std::uint32_t start) {
    PolylineChain chain;
    chain.points.push_back(welder.points[start]);
    std::uint32_t cur = start;
    for (;;) {
      std::int64_t next_seg = -1;
      for (std::uint32_t s : adj[cur]) {
        if (!used[s]) {
          next_seg = s;
          break;
        }
      }
      if (next_seg < 0) break;
      used[next_seg] = true;
      const auto& seg = segments[static_cast<std::size_t>(next_seg)];
      cur = seg[0] == cur ? seg[1] : seg[0];
      if (cur == start) {
        chain.closed = true;
        break;
      }
      chain.points.push_back(welder.points[cur]);
    }
    if (chain.points.size() >= 2) out.chains.push_back(std::move(chain));
  };
  for (std::uint32_t v = 0; v < nv; ++v) {
    if (adj[v].size() == 1 && !used[adj[v][0]]) walk(v);
  }
  for (std::uint32_t s = 0; s < segments.size(); ++s) {
    if (!used[s]) walk(segments[s][0]);
  }
  return out;
}

RawGeometry to_geometry(const SurfaceMesh& mesh) {
  std::vector<std::array<Vec3, 3>> tris;
  tris.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!(mesh.face_area(t) > 0.0)) continue;
    const auto& f = mesh.triangles[t];
    tris.push_back({mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]});
  }
  return RawGeometry::from_triangles(tris);
}

RawGeometry to_geometry(const Polyline& polyline) {
  std::vector<std::array<Vec3, 2>> segs;
  for (const PolylineChain& c : polyline.chains) {
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i) segs.push_back({c.points[i], c.points[i + 1]});
    if (c.closed && c.points.size() > 2) segs.push_back({c.points.back(), c.points.front()});
  }
  std::erase_if(segs, [](const std::array<Vec3, 2>& s) { return s[0] == s[1]; });
  return RawGeometry::from_segments(2, segs);
}

}  // namespace sald
