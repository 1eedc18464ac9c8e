#include <algorithm>
#include <cmath>
#include <string>

#include "sald/error.hpp"
#include "sald/geometry.hpp"
#include "sald/kdtree.hpp"
#include "sald/parallel.hpp"
#include "sald/random.hpp"

namespace sald {
namespace {
enum Stream : std::uint64_t { kSurface = 1, kGaussian = 2, kGradSurface = 3 };
}

std::vector<double> kth_neighbor_distances(std::span<const Vec3> points, std::size_t k) {
  if (points.size() <= k) {
    throw Error("fewer than k surface samples (" + std::to_string(points.size()) + " <= " +
                std::to_string(k) + ")");
  }
  const KdTree tree(points);
  std::vector<double> sigma(points.size());
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (points.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(points.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) sigma[i] = tree.knn(points[i], k, i).back().distance;
  });
  return sigma;
}

std::vector<SurfacePoint> sample_uniform_on(const RawGeometry& geom, std::size_t n, std::uint64_t seed) {
  if (geom.empty()) throw Error("empty geometry");
  std::vector<double> cdf(geom.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < geom.size(); ++i) cdf[i] = (acc += geom.measure(i));

  auto rng = make_rng(seed, kSurface);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<SurfacePoint> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double r = uni(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    const std::size_t prim = std::min<std::size_t>(it - cdf.begin(), geom.size() - 1);
    const double u = uni(rng);
    const double v = uni(rng);
    Vec3 p;
    switch (geom.kind()) {
      case PrimitiveKind::Point: p = geom.corner(prim, 0); break;
      case PrimitiveKind::Segment: {
        const Vec3& a = geom.corner(prim, 0);
        p = a + u * (geom.corner(prim, 1) - a);
        break;
      }
      case PrimitiveKind::Triangle: {
        const double su = std::sqrt(u);
        const Vec3& a = geom.corner(prim, 0);
        p = (1.0 - su) * a + (su * (1.0 - v)) * geom.corner(prim, 1) + (su * v) * geom.corner(prim, 2);
        break;
      }
    }
    out.push_back({p, prim});
  }
  return out;
}

SampleBatch sample_training_set(const RawGeometry& geom, const SamplingOptions& options, std::uint64_t seed) {
  if (geom.empty()) throw Error("empty geometry");
  if (options.total == 0) throw Error("sample count must be positive");
  if (!(options.sigma2 > 0.0)) throw Error("sigma2 must be positive");
  const bool has_normals = geom.kind() != PrimitiveKind::Point;

  std::size_t n_d1, n_d2, n_grad;
  if (has_normals) {
    n_d1 = static_cast<std::size_t>(std::floor(static_cast<double>(options.total) * options.d1_fraction));
    n_d1 = std::clamp<std::size_t>(n_d1, 1, options.total / 2);
    n_d2 = n_d1;
    n_grad = options.total - n_d1 - n_d2;
  } else {
    n_d1 = (options.total + 1) / 2;
    n_d2 = options.total - n_d1;
    n_grad = 0;
  }
  const std::size_t n_surface = options.n_surface > 0 ? options.n_surface : std::max(options.k + 1, n_d1 / 2);

  const std::vector<SurfacePoint> centers = sample_uniform_on(geom, n_surface, seed);
  std::vector<Vec3> center_points(centers.size());
  std::transform(centers.begin(), centers.end(), center_points.begin(), [](const SurfacePoint& s) { return s.point; });
  const std::vector<double> sigma1 = kth_neighbor_distances(center_points, options.k);

  SampleBatch batch;
  batch.dim = geom.dim();
  batch.values.resize(n_d1 + n_d2);

  // D1: alternating narrow (sigma_1) and wide (sigma_2) Gaussians per centre.
  auto rng = make_rng(seed, kGaussian);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n_d1; ++i) {
    const std::size_t c = (i / 2) % n_surface;
    const double sigma = (i % 2 == 0) ? sigma1[c] : options.sigma2;
    Vec3 p = center_points[c];
    for (int a = 0; a < geom.dim(); ++a) p[a] += sigma * gauss(rng);
    batch.values[i].point = p;
  }

  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (n_d1 + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(n_d1, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const ClosestHit hit = geom.closest(batch.values[i].point);
      batch.values[i].h = hit.distance;
      // D2: projections of D1 onto X, lying on X by construction.
      if (i < n_d2) batch.values[n_d1 + i] = {hit.point, 0.0};
    }
  });

  const std::vector<SurfacePoint> on_surface = sample_uniform_on(geom, n_grad, seed ^ 0x9e3779b97f4a7c15ULL);
  batch.grads.reserve(n_grad);
  for (const SurfacePoint& s : on_surface) batch.grads.push_back({s.point, geom.normal(s.primitive)});
  return batch;
}

}  // namespace sald
