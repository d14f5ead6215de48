#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "facespace/affinity.hpp"
#include "facespace/gradient.hpp"
#include "facespace/quadtree.hpp"
#include "helpers.hpp"

using namespace facespace;

namespace {

Layout random_layout(std::uint64_t seed, std::size_t n, double scale = 1.0) {
  Rng rng(seed);
  Layout y(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    y(i, 0) = scale * rng.normal();
    y(i, 1) = scale * rng.normal();
  }
  return y;
}

AffinityMatrix random_p(std::uint64_t seed, std::size_t n) {
  return joint_affinities(testutil::random_unit_rows(seed, n, 10), std::min(10.0, (n - 1) / 3.0));
}

}  // namespace

TEST(ExactGradient, MatchesCentralFiniteDifferences) {
  const auto p = random_p(1, 20);
  Layout y = random_layout(2, 20);
  const Layout g = exact_gradient(p, y);
  const double h = 1e-6;
  double max_err = 0.0;
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (int c = 0; c < 2; ++c) {
      Layout plus = y, minus = y;
      plus(i, c) += h;
      minus(i, c) -= h;
      const double fd = (kl_divergence(p, plus) - kl_divergence(p, minus)) / (2 * h);
      max_err = std::max(max_err, std::abs(fd - g(i, c)));
    }
  }
  EXPECT_LT(max_err, 1e-4);
}

TEST(ExactGradient, RowsSumToZero) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = random_p(seed, 40);
    const Layout g = exact_gradient(p, random_layout(seed + 100, 40), 12.0);
    EXPECT_NEAR(g.col(0).sum(), 0.0, 1e-9);
    EXPECT_NEAR(g.col(1).sum(), 0.0, 1e-9);
  }
}

TEST(ExactGradient, MirroredPairIsAntisymmetric) {
  RowMatrix pd(2, 2);
  pd << 0.0, 0.5, 0.5, 0.0;
  const auto p = AffinityMatrix::dense(pd);
  Layout y(2, 2);
  y << 1e-12, -3e-13, -1e-12, 3e-13;
  const Layout g = exact_gradient(p, y);
  EXPECT_TRUE(g.allFinite());
  EXPECT_DOUBLE_EQ(g(0, 0), -g(1, 0));
  EXPECT_DOUBLE_EQ(g(0, 1), -g(1, 1));
}

TEST(ExactGradient, PScaleIsLinearInAttraction) {
  const auto p = random_p(3, 30);
  const Layout y = random_layout(4, 30);
  const Layout g1 = exact_gradient(p, y, 1.0);
  const Layout g2 = exact_gradient(p, y, 2.0);
  const Layout g3 = exact_gradient(p, y, 3.0);
  // g(s) = s*A - R, so g3 - g2 == g2 - g1.
  EXPECT_LT(((g3 - g2) - (g2 - g1)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BhGradient, ThetaZeroEqualsExact) {
  const auto p = random_p(5, 100);
  const Layout y = random_layout(6, 100);
  const Layout exact = exact_gradient(p, y);
  const Layout bh = bh_gradient(p, y, 0.0);
  EXPECT_LT((exact - bh).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(BhGradient, ThetaHalfWithinFivePercent) {
  const auto p = random_p(7, 200);
  const Layout y = random_layout(8, 200, 5.0);
  const Layout exact = exact_gradient(p, y);
  const Layout bh = bh_gradient(p, y, 0.5);
  EXPECT_LT((exact - bh).norm() / exact.norm(), 0.05);
}

TEST(BhGradient, SparseInputAgreesWithDense) {
  const auto x = testutil::random_unit_rows(9, 80, 6);
  AffinityOptions opt;
  opt.dense_limit = 10;
  const auto sparse = joint_affinities(x, 5.0, opt);
  const auto dense = AffinityMatrix::dense(sparse.to_dense());
  const Layout y = random_layout(10, 80);
  EXPECT_LT((bh_gradient(sparse, y, 0.0) - exact_gradient(dense, y)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BhGradient, DistantOutlierUsesFewInteractions) {
  const std::size_t n = 400;
  Layout y = random_layout(11, n, 1e-2);
  y(n - 1, 0) = 1e4;
  y(n - 1, 1) = -1e4;
  const auto p = random_p(12, n);
  BhStats stats;
  bh_gradient(p, y, 0.5, 1.0, &stats);
  ASSERT_EQ(stats.interactions.size(), n);
  EXPECT_LT(stats.interactions[n - 1], n);
  EXPECT_LE(stats.interactions[n - 1], stats.tree_depth + 4);
  // Exact traversal visits every other point.
  bh_gradient(p, y, 0.0, 1.0, &stats);
  EXPECT_EQ(stats.interactions[n - 1], n - 1);
}

TEST(QuadTree, EveryPointInExactlyOneLeaf) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Layout y = random_layout(seed, 50 + 37 * seed);
    // A few exact duplicates must not break the build.
    y.row(1) = y.row(0);
    y.row(2) = y.row(0);
    const QuadTree tree(y);
    std::vector<int> seen(static_cast<std::size_t>(y.rows()), 0);
    std::size_t leaf_total = 0;
    for (const auto& node : tree.nodes()) {
      if (!node.is_leaf()) continue;
      for (auto idx : tree.points_in(node)) {
        ++seen[idx];
        EXPECT_TRUE(node.contains(y(static_cast<Eigen::Index>(idx), 0), y(static_cast<Eigen::Index>(idx), 1)));
      }
      leaf_total += node.count;
    }
    EXPECT_EQ(leaf_total, static_cast<std::size_t>(y.rows()));
    for (int s : seen) EXPECT_EQ(s, 1);
    const auto leaf = tree.leaf_of_point();
    for (std::size_t i = 0; i < leaf.size(); ++i) {
      const auto pts = tree.points_in(tree.nodes()[leaf[i]]);
      EXPECT_NE(std::find(pts.begin(), pts.end(), i), pts.end());
    }
  }
}

TEST(QuadTree, RootSummarizesAllMass) {
  const Layout y = random_layout(21, 123);
  const QuadTree tree(y);
  const auto& root = tree.nodes().front();
  EXPECT_EQ(root.count, 123u);
  EXPECT_NEAR(root.mass_x, y.col(0).mean(), 1e-12);
  EXPECT_NEAR(root.mass_y, y.col(1).mean(), 1e-12);
  for (Eigen::Index i = 0; i < y.rows(); ++i) EXPECT_TRUE(root.contains(y(i, 0), y(i, 1)));
}

TEST(KlDivergence, NonNegativeAndZeroForMatchingQ) {
  const auto p = random_p(13, 25);
  EXPECT_GE(kl_divergence(p, random_layout(14, 25)), 0.0);
  // Two points: Q is {1/2, 1/2} off-diagonal whatever the distance.
  RowMatrix pd(2, 2);
  pd << 0.0, 0.5, 0.5, 0.0;
  Layout y(2, 2);
  y << 0, 0, 3, 4;
  EXPECT_NEAR(kl_divergence(AffinityMatrix::dense(pd), y), 0.0, 1e-15);
}
