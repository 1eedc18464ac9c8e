#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "sald/error.hpp"
#include "sald/geometry.hpp"

using namespace sald;

namespace {

RawGeometry unit_circle(int n = 256) {
  std::vector<Vec3> v;
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    v.push_back({std::cos(t), std::sin(t), 0.0});
  }
  return RawGeometry::from_polyline(v, true);
}

}  // namespace

TEST(Sampling, ValueSamplesCarryExactDistance) {
  const RawGeometry g = unit_circle();
  SamplingOptions opt;
  opt.total = 1000;
  const SampleBatch b = sample_training_set(g, opt, 5);
  EXPECT_EQ(b.dim, 2);
  EXPECT_EQ(b.values.size() + b.grads.size(), 1000u);
  const std::size_t d1 = b.values.size() / 2;
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    const ValueSample& s = b.values[i];
    if (i < d1) {
      EXPECT_EQ(s.h, unsigned_distance(g, s.point));
    } else {
      EXPECT_NEAR(s.h, unsigned_distance(g, s.point), 1e-15);
    }
    EXPECT_EQ(s.point[2], 0.0);
  }
}

TEST(Sampling, EqualThirdsAndProjections) {
  const RawGeometry g = unit_circle();
  SamplingOptions opt;
  opt.total = 3000;
  const SampleBatch b = sample_training_set(g, opt, 6);
  ASSERT_EQ(b.values.size() % 2, 0u);
  EXPECT_NEAR(double(b.grads.size()), 1000.0, 1.0);
  EXPECT_EQ(b.values.size() + b.grads.size(), 3000u);
  // The second half of the value samples are projections onto X.
  const std::size_t d1 = b.values.size() / 2;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < b.values.size(); ++i) zeros += b.values[i].h == 0.0;
  EXPECT_GE(zeros, d1);
  for (std::size_t i = d1; i < b.values.size(); ++i) {
    EXPECT_EQ(b.values[i].h, 0.0);
    EXPECT_LE(unsigned_distance(g, b.values[i].point), 1e-15);
  }
  for (const GradSample& s : b.grads) {
    EXPECT_LE(unsigned_distance(g, s.point), 1e-12);
    EXPECT_NEAR(norm(s.normal), 1.0, 1e-12);
  }
}

TEST(Sampling, Deterministic) {
  const RawGeometry g = unit_circle();
  SamplingOptions opt;
  opt.total = 900;
  const SampleBatch a = sample_training_set(g, opt, 7);
  const SampleBatch b = sample_training_set(g, opt, 7);
  ASSERT_EQ(a.values.size(), b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    EXPECT_EQ(a.values[i].point, b.values[i].point);
    EXPECT_EQ(a.values[i].h, b.values[i].h);
  }
  const SampleBatch c = sample_training_set(g, opt, 8);
  EXPECT_NE(a.values[0].point, c.values[0].point);
}

TEST(Sampling, KthNeighbourOnUniformLine) {
  const double delta = 0.01;
  std::vector<Vec3> pts;
  for (int i = 0; i < 400; ++i) pts.push_back({i * delta, 0.0, 0.0});
  const auto sigma = kth_neighbor_distances(pts, 50);
  // Interior points see 25 neighbours on each side before the 50th.
  EXPECT_NEAR(sigma[200], 25 * delta, 1e-12);
  // Endpoints only have neighbours on one side.
  EXPECT_NEAR(sigma[0], 50 * delta, 1e-12);
}

TEST(Sampling, TooFewSurfacePoints) {
  const RawGeometry g = unit_circle();
  SamplingOptions opt;
  opt.total = 1000;
  opt.n_surface = 10;
  opt.k = 50;
  EXPECT_THROW(sample_training_set(g, opt, 1), Error);
}

TEST(Sampling, PointCloudHasNoGradientSamples) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({std::cos(0.1 * i), std::sin(0.1 * i), 0.0});
  const RawGeometry g = RawGeometry::from_points(2, pts);
  SamplingOptions opt;
  opt.total = 600;
  opt.k = 10;
  const SampleBatch b = sample_training_set(g, opt, 2);
  EXPECT_TRUE(b.grads.empty());
  EXPECT_FALSE(b.values.empty());
}

TEST(Sampling, UniformByMeasure) {
  // A long and a short segment: hits proportional to length.
  const std::vector<std::array<Vec3, 2>> s{{Vec3{0, 0, 0}, Vec3{3, 0, 0}}, {Vec3{0, 1, 0}, Vec3{1, 1, 0}}};
  const RawGeometry g = RawGeometry::from_segments(2, s);
  const auto pts = sample_uniform_on(g, 40000, 3);
  const double frac = std::count_if(pts.begin(), pts.end(), [](const SurfacePoint& p) { return p.primitive == 0; }) /
                      40000.0;
  EXPECT_NEAR(frac, 0.75, 0.01);
}

TEST(Sampling, SampleFileRoundTrip) {
  const RawGeometry g = unit_circle();
  SamplingOptions opt;
  opt.total = 300;
  const SampleBatch b = sample_training_set(g, opt, 9);
  const auto path = std::filesystem::temp_directory_path() / "sald_test_samples.bin";
  write_samples(b, path);
  const SampleBatch r = read_samples(path);
  EXPECT_EQ(r.dim, b.dim);
  ASSERT_EQ(r.values.size(), b.values.size());
  ASSERT_EQ(r.grads.size(), b.grads.size());
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    EXPECT_EQ(r.values[i].point, b.values[i].point);
    EXPECT_EQ(r.values[i].h, b.values[i].h);
  }
  for (std::size_t i = 0; i < b.grads.size(); ++i) EXPECT_EQ(r.grads[i].normal, b.grads[i].normal);
}
