#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sald/vec.hpp"

namespace sald {

/// Static kd-tree over a point set for exact nearest-neighbour queries.
/// Holds a copy of the points; ties resolve to the lowest point index.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points);

  struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;
  };

  std::size_t size() const { return points_.size(); }
  Neighbor nearest(const Vec3& q) const;
  /// The k nearest points sorted by (distance, index). `exclude` skips one
  /// index, typically the query point itself.
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k, std::size_t exclude = SIZE_MAX) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;
    std::uint32_t left = 0, right = 0;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
  };
  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace sald
