#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace facespace {

/// n x 2 low-dimensional coordinates.
using Layout = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

/// Region quadtree over a 2-D layout, stored as a flat node array.
///
/// Built by recursive partitioning of an index permutation; every point ends
/// up in exactly one leaf. A leaf holds one point, or several when they are
/// identical or the depth cap is reached.
class QuadTree {
 public:
  struct Node {
    double center_x = 0.0;
    double center_y = 0.0;
    double half_width = 0.0;
    double mass_x = 0.0;  // centre of mass
    double mass_y = 0.0;
    std::size_t count = 0;
    std::size_t begin = 0;  // range into point_order()
    std::size_t end = 0;
    std::int64_t first_child = -1;  // four consecutive children, or -1 for a leaf
    std::size_t depth = 0;

    bool is_leaf() const noexcept { return first_child < 0; }
    bool contains(double x, double y) const noexcept {
      return x >= center_x - half_width && x <= center_x + half_width &&
             y >= center_y - half_width && y <= center_y + half_width;
    }
  };

  /// Repulsive-force accumulator for one query point.
  struct Repulsion {
    double force_x = 0.0;  // sum_j q_ij^2 (y_i - y_j) with q_ij = 1/(1+|y_i-y_j|^2)
    double force_y = 0.0;
    double z = 0.0;        // sum_j q_ij
    std::size_t interactions = 0;  // summarized cells + individual points visited
  };

  static constexpr std::size_t kMaxDepth = 48;

  explicit QuadTree(const Layout& points);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::span<const std::size_t> point_order() const noexcept { return order_; }
  std::size_t depth() const noexcept { return max_depth_; }
  std::size_t size() const noexcept { return order_.size(); }

  /// Points stored in node `node` (only meaningful for leaves).
  std::span<const std::size_t> points_in(const Node& node) const noexcept {
    return std::span<const std::size_t>(order_).subspan(node.begin, node.end - node.begin);
  }

  /// Index of the leaf holding each point.
  std::vector<std::size_t> leaf_of_point() const;

  /// Barnes-Hut traversal for point i. A cell not containing the point is
  /// replaced by its centre of mass when width / distance < theta; theta = 0
  /// visits every other point individually.
  Repulsion repulsion(std::size_t i, double theta) const;

 private:
  void build(std::size_t node_index);

  const Layout& points_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> order_;
  std::size_t max_depth_ = 0;
};

}  // namespace facespace
