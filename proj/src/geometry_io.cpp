#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "sald/error.hpp"
#include "sald/geometry.hpp"
#include "sald/output.hpp"

namespace sald {
namespace {

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read geometry file: " + path.string());
  return in;
}

std::string strip_comment(std::string line) {
  if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
  return line;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

RawGeometry read_obj(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<Vec3> vertices;
  std::vector<std::array<Vec3, 3>> triangles;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(strip_comment(line));
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 v{};
      if (!(ss >> v[0] >> v[1] >> v[2])) throw Error(path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::size_t> idx;
      std::string tok;
      while (ss >> tok) {
        const long i = std::stol(tok.substr(0, tok.find('/')));
        const long resolved = i < 0 ? static_cast<long>(vertices.size()) + i : i - 1;
        if (resolved < 0 || resolved >= static_cast<long>(vertices.size())) {
          throw Error(path.string() + ":" + std::to_string(lineno) + ": face index out of range");
        }
        idx.push_back(static_cast<std::size_t>(resolved));
      }
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        std::array<Vec3, 3> t{vertices[idx[0]], vertices[idx[k]], vertices[idx[k + 1]]};
        // Raw soups carry degenerate faces; they contribute nothing to X.
        if (norm(cross(t[1] - t[0], t[2] - t[0])) > 0.0) triangles.push_back(t);
      }
    }
  }
  if (triangles.empty() && !vertices.empty()) return RawGeometry::from_points(3, std::move(vertices));
  return RawGeometry::from_triangles(triangles);
}

RawGeometry read_xyz(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<Vec3> points;
  int dim = 0;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream ss(line);
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (v.size() < 2 || v.size() > 3) throw Error("xyz: expected 2 or 3 coordinates per line");
    if (dim == 0) dim = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != dim) throw Error("xyz: mixed 2D and 3D points");
    points.push_back({v[0], v[1], dim == 3 ? v[2] : 0.0});
  }
  return RawGeometry::from_points(dim == 0 ? 3 : dim, std::move(points));
}

RawGeometry read_segments_2d(const std::filesystem::path& path) {
  auto in = open_text(path);
  std::vector<std::array<Vec3, 2>> segments;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream ss(line);
    double x0, y0, x1, y1;
    if (!(ss >> x0 >> y0 >> x1 >> y1)) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected \"x0 y0 x1 y1\"");
    }
    segments.push_back({Vec3{x0, y0, 0.0}, Vec3{x1, y1, 0.0}});
  }
  return RawGeometry::from_segments(2, segments);
}

void write_segments_2d(const RawGeometry& geom, const std::filesystem::path& path) {
  if (geom.kind() != PrimitiveKind::Segment || geom.dim() != 2) throw Error("write_segments_2d: need 2D segments");
  std::ofstream out = open_output(path);
  out.precision(17);
  for (std::size_t i = 0; i < geom.size(); ++i) {
    out << geom.corner(i, 0)[0] << ' ' << geom.corner(i, 0)[1] << ' ' << geom.corner(i, 1)[0] << ' '
        << geom.corner(i, 1)[1] << '\n';
  }
}

RawGeometry read_geometry(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") return read_obj(path);
  if (ext == ".xyz" || ext == ".pts") return read_xyz(path);
  if (ext == ".seg" || ext == ".txt") return read_segments_2d(path);
  throw Error("unknown geometry extension: " + path.string());
}

// --- sample file ---------------------------------------------------------

namespace {
constexpr std::uint32_t kSampleVersion = 1;
}

void write_samples(const SampleBatch& batch, const std::filesystem::path& path) {
  std::ofstream out = open_output(path, std::ios::binary);
  out.write("SALD", 4);
  detail::write_le<std::uint32_t>(out, kSampleVersion);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(batch.dim));
  detail::write_le<std::uint64_t>(out, batch.values.size());
  detail::write_le<std::uint64_t>(out, batch.grads.size());
  for (const ValueSample& v : batch.values) {
    for (int a = 0; a < batch.dim; ++a) detail::write_le(out, v.point[a]);
    detail::write_le(out, v.h);
  }
  for (const GradSample& g : batch.grads) {
    for (int a = 0; a < batch.dim; ++a) detail::write_le(out, g.point[a]);
    for (int a = 0; a < batch.dim; ++a) detail::write_le(out, g.normal[a]);
  }
  if (!out) throw Error("write failed: " + path.string());
}

SampleBatch read_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  detail::expect_magic(in, "SALD");
  const auto version = detail::read_le<std::uint32_t>(in);
  if (version != kSampleVersion) throw Error("unsupported sample file version " + std::to_string(version));
  SampleBatch batch;
  batch.dim = static_cast<int>(detail::read_le<std::uint32_t>(in));
  if (batch.dim != 2 && batch.dim != 3) throw Error("sample file: bad dimension");
  const auto nv = detail::read_le<std::uint64_t>(in);
  const auto ng = detail::read_le<std::uint64_t>(in);
  batch.values.resize(nv);
  batch.grads.resize(ng);
  for (ValueSample& v : batch.values) {
    for (int a = 0; a < batch.dim; ++a) v.point[a] = detail::read_le<double>(in);
    v.h = detail::read_le<double>(in);
  }
  for (GradSample& g : batch.grads) {
    for (int a = 0; a < batch.dim; ++a) g.point[a] = detail::read_le<double>(in);
    for (int a = 0; a < batch.dim; ++a) g.normal[a] = detail::read_le<double>(in);
  }
  return batch;
}

}  // namespace sald
