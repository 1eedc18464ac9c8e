#include "sald/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "sald/error.hpp"
#include "sald/kdtree.hpp"
#include "sald/parallel.hpp"
#include "sald/output.hpp"

namespace sald {
namespace {

constexpr double kDegrees = 180.0 / std::numbers::pi;

double ordered_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void require_normals(const SampledSurface& s) {
  if (s.normals.size() != s.points.size()) throw Error("surface sample has no normals");
  for (const Vec3& n : s.normals) {
    if (norm2(n) == 0.0) throw Error("surface sample has zero normals");
  }
}

}  // namespace

SampledSurface sample_surface(const RawGeometry& geom, std::size_t n, std::uint64_t seed) {
  if (geom.empty()) throw Error("cannot sample an empty surface");
  SampledSurface out;
  if (geom.kind() == PrimitiveKind::Point) {
    out.points.assign(geom.corners().begin(), geom.corners().end());
    out.normals.assign(out.points.size(), Vec3{0.0, 0.0, 0.0});
    return out;
  }
  const std::vector<SurfacePoint> pts = sample_uniform_on(geom, n, seed);
  out.points.reserve(pts.size());
  out.normals.reserve(pts.size());
  for (const SurfacePoint& p : pts) {
    out.points.push_back(p.point);
    out.normals.push_back(geom.normal(p.primitive));
  }
  return out;
}

SampledSurface sample_surface(const SurfaceMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw Error("cannot sample an empty mesh");
  return sample_surface(to_geometry(mesh), n, seed);
}

double chamfer_one_sided(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.empty() || b.empty()) throw Error("chamfer distance of an empty set");
  const KdTree tree(b);
  std::vector<double> d(a.size());
  parallel_for(a.size(), [&](std::size_t i) { d[i] = tree.nearest(a[i]).distance; });
  return ordered_mean(d);
}

double chamfer_one_sided(std::span<const Vec3> a, const RawGeometry& b) {
  if (a.empty() || b.empty()) throw Error("chamfer distance of an empty set");
  std::vector<double> d(a.size());
  parallel_for(a.size(), [&](std::size_t i) { d[i] = b.closest(a[i]).distance; });
  return ordered_mean(d);
}

double normal_one_sided(const SampledSurface& a, const SampledSurface& b) {
  if (a.points.empty() || b.points.empty()) throw Error("normal distance of an empty set");
  require_normals(a);
  require_normals(b);
  const KdTree tree(b.points);
  std::vector<double> ang(a.points.size());
  parallel_for(a.points.size(), [&](std::size_t i) {
    ang[i] = angle_between(a.normals[i], b.normals[tree.nearest(a.points[i]).index]) * kDegrees;
  });
  return ordered_mean(ang);
}

double normal_one_sided(const SampledSurface& a, const RawGeometry& b) {
  if (a.points.empty() || b.empty()) throw Error("normal distance of an empty set");
  if (b.kind() == PrimitiveKind::Point) throw Error("point sets carry no normals");
  require_normals(a);
  std::vector<double> ang(a.points.size());
  parallel_for(a.points.size(), [&](std::size_t i) {
    ang[i] = angle_between(a.normals[i], b.normal(b.closest(a.points[i]).primitive)) * kDegrees;
  });
  return ordered_mean(ang);
}

MetricReport metric_report(const RawGeometry& recon, const RawGeometry& reference, std::size_t n,
                           std::uint64_t seed) {
  if (recon.empty() || reference.empty()) throw Error("metric of an empty surface");
  if (recon.dim() != reference.dim()) throw Error("dimension mismatch");
  const SampledSurface sa = sample_surface(recon, n, seed);
  const SampledSurface sb = sample_surface(reference, n, seed + 1);
  MetricReport r;
  r.chamfer_a_to_b = chamfer_one_sided(sa.points, reference);
  r.chamfer_b_to_a = chamfer_one_sided(sb.points, recon);
  r.chamfer_sym = 0.5 * (r.chamfer_a_to_b + r.chamfer_b_to_a);
  if (recon.kind() == PrimitiveKind::Point || reference.kind() == PrimitiveKind::Point) {
    r.normal_a_to_b = r.normal_b_to_a = r.normal_sym = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.normal_a_to_b = normal_one_sided(sa, reference);
    r.normal_b_to_a = normal_one_sided(sb, recon);
    r.normal_sym = 0.5 * (r.normal_a_to_b + r.normal_b_to_a);
  }
  return r;
}

MetricReport metric_report(const SurfaceMesh& recon, const RawGeometry& reference, std::size_t n,
                           std::uint64_t seed) {
  if (recon.empty()) throw Error("metric of an empty surface");
  return metric_report(to_geometry(recon), reference, n, seed);
}

void write_metric_csv(std::span<const MetricRow> rows, const std::filesystem::path& path, double chamfer_scale) {
  std::ofstream out = open_output(path);
  out.precision(17);
  out << "name,chamfer_sym,chamfer_a_to_b,chamfer_b_to_a,normal_sym,normal_a_to_b,normal_b_to_a\n";
  auto fields = [](const MetricReport& r) {
    return std::array<double, 6>{r.chamfer_sym,  r.chamfer_a_to_b, r.chamfer_b_to_a,
                                 r.normal_sym,   r.normal_a_to_b,  r.normal_b_to_a};
  };
  auto emit = [&](const std::string& name, const std::array<double, 6>& f) {
    out << name;
    for (int i = 0; i < 6; ++i) out << ',' << (i < 3 ? f[i] * chamfer_scale : f[i]);
    out << '\n';
  };
  for (const MetricRow& row : rows) emit(row.name, fields(row.report));
  if (rows.size() > 1) {
    std::array<double, 6> mean{}, median{};
    for (int i = 0; i < 6; ++i) {
      std::vector<double> col;
      for (const MetricRow& row : rows) col.push_back(fields(row.report)[i]);
      mean[i] = ordered_mean(col);
      std::sort(col.begin(), col.end());
      const std::size_t m = col.size() / 2;
      median[i] = col.size() % 2 ? col[m] : 0.5 * (col[m - 1] + col[m]);
    }
    emit("mean", mean);
    emit("median", median);
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace sald
