#include "facespace/quadtree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace facespace {

QuadTree::QuadTree(const Layout& points) : points_(points), order_(static_cast<std::size_t>(points.rows())) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  Node root;
  root.begin = 0;
  root.end = order_.size();
  if (!order_.empty()) {
    const Eigen::Vector2d lo = points.colwise().minCoeff();
    const Eigen::Vector2d hi = points.colwise().maxCoeff();
    root.center_x = 0.5 * (lo.x() + hi.x());
    root.center_y = 0.5 * (lo.y() + hi.y());
    const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    root.half_width = 0.5 * extent * (1.0 + 1e-9) + 1e-12;
  }
  nodes_.push_back(root);
  nodes_.reserve(4 * order_.size() + 1);
  build(0);
}

void QuadTree::build(std::size_t node_index) {
  Node node = nodes_[node_index];
  node.count = node.end - node.begin;
  max_depth_ = std::max(max_depth_, node.depth);
  if (node.count == 0) {
    nodes_[node_index] = node;
    return;
  }

  double sx = 0.0, sy = 0.0;
  bool identical = true;
  const auto first = order_[node.begin];
  for (auto k = node.begin; k < node.end; ++k) {
    const auto p = order_[k];
    sx += points_(static_cast<Eigen::Index>(p), 0);
    sy += points_(static_cast<Eigen::Index>(p), 1);
    identical = identical && points_(static_cast<Eigen::Index>(p), 0) == points_(static_cast<Eigen::Index>(first), 0) &&
                points_(static_cast<Eigen::Index>(p), 1) == points_(static_cast<Eigen::Index>(first), 1);
  }
  node.mass_x = sx / static_cast<double>(node.count);
  node.mass_y = sy / static_cast<double>(node.count);

  if (node.count == 1 || identical || node.depth >= kMaxDepth) {
    nodes_[node_index] = node;
    return;
  }

  // Quadrant order: SW, SE, NW, NE. Stable partitions keep the build deterministic.
  const auto px = [&](std::size_t p) { return points_(static_cast<Eigen::Index>(p), 0); };
  const auto py = [&](std::size_t p) { return points_(static_cast<Eigen::Index>(p), 1); };
  auto b = order_.begin() + static_cast<std::ptrdiff_t>(node.begin);
  auto e = order_.begin() + static_cast<std::ptrdiff_t>(node.end);
  auto mid_y = std::stable_partition(b, e, [&](std::size_t p) { return py(p) < node.center_y; });
  auto mid_south = std::stable_partition(b, mid_y, [&](std::size_t p) { return px(p) < node.center_x; });
  auto mid_north = std::stable_partition(mid_y, e, [&](std::size_t p) { return px(p) < node.center_x; });

  const std::array<std::size_t, 5> bounds{
      node.begin, static_cast<std::size_t>(mid_south - order_.begin()),
      static_cast<std::size_t>(mid_y - order_.begin()),
      static_cast<std::size_t>(mid_north - order_.begin()), node.end};

  const double hw = 0.5 * node.half_width;
  const std::array<std::pair<double, double>, 4> offsets{{{-hw, -hw}, {hw, -hw}, {-hw, hw}, {hw, hw}}};
  node.first_child = static_cast<std::int64_t>(nodes_.size());
  nodes_[node_index] = node;
  for (std::size_t q = 0; q < 4; ++q) {
    Node child;
    child.center_x = node.center_x + offsets[q].first;
    child.center_y = node.center_y + offsets[q].second;
    child.half_width = hw;
    child.begin = bounds[q];
    child.end = bounds[q + 1];
    child.depth = node.depth + 1;
    nodes_.push_back(child);
  }
  for (std::size_t q = 0; q < 4; ++q) build(static_cast<std::size_t>(node.first_child) + q);
}

std::vector<std::size_t> QuadTree::leaf_of_point() const {
  std::vector<std::size_t> leaf(order_.size(), static_cast<std::size_t>(-1));
  for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
    const auto& node = nodes_[idx];
    if (!node.is_leaf()) continue;
    for (auto p : points_in(node)) leaf[p] = idx;
  }
  return leaf;
}

QuadTree::Repulsion QuadTree::repulsion(std::size_t i, double theta) const {
  Repulsion acc;
  const double yx = points_(static_cast<Eigen::Index>(i), 0);
  const double yy = points_(static_cast<Eigen::Index>(i), 1);

  std::vector<std::size_t> stack;
  stack.reserve(4 * (max_depth_ + 1));
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.count == 0) continue;

    if (node.is_leaf()) {
      for (auto j : points_in(node)) {
        if (j == i) continue;
        const double dx = yx - points_(static_cast<Eigen::Index>(j), 0);
        const double dy = yy - points_(static_cast<Eigen::Index>(j), 1);
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        acc.z += q;
        acc.force_x += q * q * dx;
        acc.force_y += q * q * dy;
        ++acc.interactions;
      }
      continue;
    }

    const double dx = yx - node.mass_x;
    const double dy = yy - node.mass_y;
    const double dist2 = dx * dx + dy * dy;
    const double width = 2.0 * node.half_width;
    if (!node.contains(yx, yy) && dist2 > 0.0 && width < theta * std::sqrt(dist2)) {
      const double q = 1.0 / (1.0 + dist2);
      const auto m = static_cast<double>(node.count);
      acc.z += m * q;
      acc.force_x += m * q * q * dx;
      acc.force_y += m * q * q * dy;
      ++acc.interactions;
      continue;
    }
    // Push in reverse so children are visited SW, SE, NW, NE.
    for (int q = 3; q >= 0; --q) stack.push_back(static_cast<std::size_t>(node.first_child) + static_cast<std::size_t>(q));
  }
  return acc;
}

}  // namespace facespace
