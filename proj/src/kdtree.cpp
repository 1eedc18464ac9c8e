#include "sald/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "sald/error.hpp"

namespace sald {
namespace {
constexpr std::uint32_t kLeaf = 8;

struct Worse {
  // max-heap on (d2, index): top is the current worst candidate
  bool operator()(const std::pair<double, std::size_t>& a, const std::pair<double, std::size_t>& b) const {
    return a < b;
  }
};
}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw Error("kd-tree over an empty point set");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeaf + 2);
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back({begin, end, 0, 0, -1, 0.0});
  if (end - begin <= kLeaf) return index;
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], points_[order_[i]][a]);
      hi[a] = std::max(hi[a], points_[order_[i]][a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] == lo[axis]) return index;  // all coincident
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t l, std::uint32_t r) { return points_[l][axis] < points_[r][axis]; });
  const double split = points_[order_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  nodes_[index].axis = axis;
  nodes_[index].split = split;
  return index;
}

KdTree::Neighbor KdTree::nearest(const Vec3& q) const {
  auto r = knn(q, 1);
  return r.front();
}

std::vector<KdTree::Neighbor> KdTree::knn(const Vec3& q, std::size_t k, std::size_t exclude) const {
  const std::size_t available = points_.size() - (exclude < points_.size() ? 1 : 0);
  if (k == 0 || k > available) throw Error("knn: k exceeds the number of points");
  std::priority_queue<std::pair<double, std::size_t>, std::vector<std::pair<double, std::size_t>>, Worse> heap;
  auto bound = [&] { return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first; };

  struct Pending {
    std::uint32_t node;
    double d2;
  };
  std::vector<Pending> stack;
  stack.push_back({0, 0.0});
  while (!stack.empty()) {
    const Pending p = stack.back();
    stack.pop_back();
    if (p.d2 > bound()) continue;
    const Node& n = nodes_[p.node];
    if (n.axis < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::size_t idx = order_[i];
        if (idx == exclude) continue;
        const double d2 = norm2(points_[idx] - q);
        const std::pair<double, std::size_t> cand{d2, idx};
        if (heap.size() < k) {
          heap.push(cand);
        } else if (cand < heap.top()) {
          heap.pop();
          heap.push(cand);
        }
      }
      continue;
    }
    const double diff = q[n.axis] - n.split;
    const std::uint32_t near = diff < 0.0 ? n.left : n.right;
    const std::uint32_t far = diff < 0.0 ? n.right : n.left;
    // Points equal to the split value may sit on either side, so the far
    // side keeps a lower bound of diff^2 (zero when diff == 0).
    stack.push_back({far, std::max(p.d2, diff * diff)});
    stack.push_back({near, p.d2});
  }
  std::vector<Neighbor> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return out;
}

}  // namespace sald
