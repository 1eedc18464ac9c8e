#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sald/error.hpp"
#include "sald/extract.hpp"
#include "sald/output.hpp"

namespace sald {
namespace {

std::ofstream open_text(const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out.precision(17);
  return out;
}

}  // namespace

void write_obj(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out = open_text(path);
  for (const Vec3& v : mesh.vertices) out << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

SurfaceMesh read_obj_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  SurfaceMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      Vec3 v{};
      if (!(ls >> v[0] >> v[1] >> v[2])) throw Error(path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> idx;
      std::string tok;
      while (ls >> tok) {
        long i = std::stol(tok.substr(0, tok.find('/')));
        if (i < 0) i += static_cast<long>(mesh.vertices.size()) + 1;
        if (i < 1 || static_cast<std::size_t>(i) > mesh.vertices.size()) {
          throw Error(path.string() + ":" + std::to_string(lineno) + ": face index out of range");
        }
        idx.push_back(static_cast<std::uint32_t>(i - 1));
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  return mesh;
}

void write_polyline_csv(const Polyline& polyline, const std::filesystem::path& path) {
  std::ofstream out = open_text(path);
  out << "chain,index,x,y,closed\n";
  for (std::size_t c = 0; c < polyline.chains.size(); ++c) {
    const PolylineChain& chain = polyline.chains[c];
    for (std::size_t i = 0; i < chain.points.size(); ++i) {
      out << c << ',' << i << ',' << chain.points[i][0] << ',' << chain.points[i][1] << ','
          << (chain.closed ? 1 : 0) << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_svg(std::span<const SvgLayer> layers, const RawGeometry* overlay, const Box3& view,
               const std::filesystem::path& path, double pixels) {
  const double w = view.hi[0] - view.lo[0];
  const double h = view.hi[1] - view.lo[1];
  if (!(w > 0.0) || !(h > 0.0)) throw Error("empty SVG view box");
  const double scale = pixels / std::max(w, h);
  auto px = [&](const Vec3& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", (p[0] - view.lo[0]) * scale, (view.hi[1] - p[1]) * scale);
    return std::string(buf);
  };

  std::ofstream out = open_text(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w * scale << "\" height=\"" << h * scale
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (overlay && !overlay->empty()) {
    out << "<g stroke=\"#999999\" stroke-width=\"3\" fill=\"none\">\n";
    if (overlay->kind() == PrimitiveKind::Segment) {
      for (std::size_t s = 0; s < overlay->size(); ++s) {
        out << "<path d=\"M" << px(overlay->corner(s, 0)) << " L" << px(overlay->corner(s, 1)) << "\"/>\n";
      }
    } else {
      for (std::size_t s = 0; s < overlay->size(); ++s) {
        const Vec3& p = overlay->corner(s, 0);
        out << "<circle cx=\"" << (p[0] - view.lo[0]) * scale << "\" cy=\"" << (view.hi[1] - p[1]) * scale
            << "\" r=\"1.5\" fill=\"#999999\"/>\n";
      }
    }
    out << "</g>\n";
  }
  for (const SvgLayer& layer : layers) {
    out << "<g stroke=\"" << layer.stroke << "\" stroke-width=\"" << layer.width << "\" fill=\"none\">\n";
    for (const PolylineChain& chain : layer.curves.chains) {
      out << "<path d=\"";
      for (std::size_t i = 0; i < chain.points.size(); ++i) out << (i == 0 ? "M" : " L") << px(chain.points[i]);
      if (chain.closed) out << " Z";
      out << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace sald
