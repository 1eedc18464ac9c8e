#pragma once

// Raw input geometry (point sets, segment soups, triangle soups), exact
// unsigned distance queries over a bounding-volume hierarchy, and the
// training-sample distributions built from them.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sald/vec.hpp"

namespace sald {

enum class PrimitiveKind { Point, Segment, Triangle };

struct ClosestHit {
  Vec3 point;
  double distance = 0.0;
  std::size_t primitive = 0;
};

/// Immutable collection of primitives with an acceleration index.
/// Safe for concurrent queries once constructed.
class RawGeometry {
 public:
  RawGeometry() = default;

  static RawGeometry from_points(int dim, std::vector<Vec3> points);
  static RawGeometry from_segments(int dim, std::span<const std::array<Vec3, 2>> segments);
  static RawGeometry from_triangles(std::span<const std::array<Vec3, 3>> triangles);
  /// Segments between consecutive vertices; `closed` adds the last-to-first edge.
  static RawGeometry from_polyline(std::span<const Vec3> vertices, bool closed);

  int dim() const { return dim_; }
  PrimitiveKind kind() const { return kind_; }
  std::size_t arity() const { return arity_; }
  std::size_t size() const { return arity_ == 0 ? 0 : corners_.size() / arity_; }
  bool empty() const { return size() == 0; }

  const Vec3& corner(std::size_t primitive, std::size_t k) const { return corners_[primitive * arity_ + k]; }
  std::span<const Vec3> corners() const { return corners_; }

  /// Length (segments), area (triangles), or 1 (points).
  double measure(std::size_t primitive) const;
  double total_measure() const;
  /// Representative unit normal: counterclockwise perpendicular of a 2D
  /// segment, right-hand-rule normal of a triangle. Points have none (zero).
  Vec3 normal(std::size_t primitive) const;
  Box3 bounds() const;

  /// Exact closest point over all primitives; ties go to the lowest index.
  ClosestHit closest(const Vec3& y) const;

 private:
  struct Node {
    Box3 box;
    std::uint32_t first = 0;   // leaf: offset into order_; inner: left child
    std::uint32_t count = 0;   // 0 for inner nodes
    std::uint32_t right = 0;
  };

  void validate_and_index();
  std::uint32_t build(std::uint32_t first, std::uint32_t count, std::vector<Box3>& boxes);
  double primitive_distance2(std::size_t primitive, const Vec3& y, Vec3& closest) const;
  void check_query(const Vec3& y) const;

  int dim_ = 3;
  PrimitiveKind kind_ = PrimitiveKind::Point;
  std::size_t arity_ = 1;
  std::vector<Vec3> corners_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// h(y) = min over X of |y - x|.
double unsigned_distance(const RawGeometry& geom, const Vec3& y);
/// Closest point of X to y (lowest primitive index on ties).
Vec3 project(const RawGeometry& geom, const Vec3& y);
/// Unit gradient of h. Off X: (y - p)/|y - p|. On X: the representative
/// normal of the closest (lowest-index) primitive.
Vec3 unsigned_gradient(const RawGeometry& geom, const Vec3& y);

struct ValueSample {
  Vec3 point;
  double h = 0.0;
};

struct GradSample {
  Vec3 point;
  Vec3 normal;
};

struct SampleBatch {
  int dim = 2;
  std::vector<ValueSample> values;
  std::vector<GradSample> grads;
};

struct SamplingOptions {
  std::size_t total = 50000;
  /// Surface points {y} used as Gaussian centres; 0 picks half the D1 count.
  std::size_t n_surface = 0;
  double sigma2 = 0.3;
  std::size_t k = 50;
  /// Fraction of `total` for each of D1 (Gaussian), D2 (projections of D1)
  /// and D' (on-surface gradients). D2 always matches D1 in size.
  double d1_fraction = 1.0 / 3.0;
};

/// sigma_1 of every point: distance to its k-th nearest other point.
std::vector<double> kth_neighbor_distances(std::span<const Vec3> points, std::size_t k);

/// Uniform points on X by primitive measure, each with its primitive index.
struct SurfacePoint {
  Vec3 point;
  std::size_t primitive = 0;
};
std::vector<SurfacePoint> sample_uniform_on(const RawGeometry& geom, std::size_t n, std::uint64_t seed);

SampleBatch sample_training_set(const RawGeometry& geom, const SamplingOptions& options, std::uint64_t seed);

// --- file formats -------------------------------------------------------

/// OBJ triangle soup (faces with more than three vertices are fanned).
RawGeometry read_obj(const std::filesystem::path& path);
/// Whitespace-separated "x y z" (or "x y") per line.
RawGeometry read_xyz(const std::filesystem::path& path);
/// One "x0 y0 x1 y1" segment per line; '#' starts a comment.
RawGeometry read_segments_2d(const std::filesystem::path& path);
void write_segments_2d(const RawGeometry& geom, const std::filesystem::path& path);
/// Dispatches on extension: .obj, .xyz/.pts, .seg/.txt.
RawGeometry read_geometry(const std::filesystem::path& path);

/// Binary sample file: "SALD", u32 version, u32 dim, u64 n_values, u64 n_grads,
/// then n_values x (dim coords, h) and n_grads x (dim coords, dim normal),
/// all little-endian f64.
void write_samples(const SampleBatch& batch, const std::filesystem::path& path);
SampleBatch read_samples(const std::filesystem::path& path);

}  // namespace sald
