#pragma once

// Reconstruction metrics: one-sided and symmetric Chamfer distance and the
// normal-angle distance, computed on uniform surface samples.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sald/extract.hpp"
#include "sald/geometry.hpp"
#include "sald/vec.hpp"

namespace sald {

struct SampledSurface {
  std::vector<Vec3> points;
  /// Unit normal of the source primitive; zero for point-set input.
  std::vector<Vec3> normals;
};

/// Uniform by area (length in 2D). Point sets are returned unchanged.
SampledSurface sample_surface(const RawGeometry& geom, std::size_t n = 30000, std::uint64_t seed = 0);
SampledSurface sample_surface(const SurfaceMesh& mesh, std::size_t n = 30000, std::uint64_t seed = 0);

/// Mean over A of the exact distance to the nearest point of B.
double chamfer_one_sided(std::span<const Vec3> a, std::span<const Vec3> b);
/// Mean over A of the exact distance to the geometry B.
double chamfer_one_sided(std::span<const Vec3> a, const RawGeometry& b);

/// Mean angle, in degrees, between each normal of A and the normal at its
/// nearest sample of B.
double normal_one_sided(const SampledSurface& a, const SampledSurface& b);
/// Same, pairing each point of A with its closest point on the geometry B.
double normal_one_sided(const SampledSurface& a, const RawGeometry& b);

/// Raw world units; normals in degrees. Normal fields are NaN when either
/// side is a bare point set.
struct MetricReport {
  double chamfer_sym = 0.0;
  double chamfer_a_to_b = 0.0;
  double chamfer_b_to_a = 0.0;
  double normal_sym = 0.0;
  double normal_a_to_b = 0.0;
  double normal_b_to_a = 0.0;
};

/// Samples n points on each side and measures each sample against the other
/// side's geometry. A is the reconstruction, B the reference.
MetricReport metric_report(const RawGeometry& recon, const RawGeometry& reference, std::size_t n = 30000,
                           std::uint64_t seed = 0);
MetricReport metric_report(const SurfaceMesh& recon, const RawGeometry& reference, std::size_t n = 30000,
                           std::uint64_t seed = 0);

struct MetricRow {
  std::string name;
  MetricReport report;
};

/// Columns: name and the six fields, each multiplied by its scale (the
/// Chamfer scale for distances, 1 for angles). With more than one row, mean
/// and median rows are appended.
void write_metric_csv(std::span<const MetricRow> rows, const std::filesystem::path& path,
                      double chamfer_scale = 1.0);

}  // namespace sald
