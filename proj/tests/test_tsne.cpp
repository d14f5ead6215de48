#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "facespace/error.hpp"
#include "facespace/parallel.hpp"
#include "facespace/tsne.hpp"
#include "helpers.hpp"

using namespace facespace;

namespace {

TsneConfig quick(std::size_t iters = 400) {
  TsneConfig c;
  c.perplexity = 10.0;
  c.n_iter = iters;
  return c;
}

bool bitwise_equal(const Layout& a, const Layout& b) {
  return a.rows() == b.rows() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST(RunTsne, SameSeedIsBitwiseIdentical) {
  const auto x = testutil::random_unit_rows(1, 80, 16);
  const auto a = run_tsne(x, quick(300));
  const auto b = run_tsne(x, quick(300));
  EXPECT_TRUE(bitwise_equal(a.points, b.points));
  auto other = quick(300);
  other.seed = 2;
  EXPECT_FALSE(bitwise_equal(a.points, run_tsne(x, other).points));
}

TEST(RunTsne, ThreadCountDoesNotChangeResult) {
  const auto x = testutil::random_unit_rows(2, 90, 16);
  set_thread_count(1);
  const auto a = run_tsne(x, quick(300));
  set_thread_count(5);
  const auto b = run_tsne(x, quick(300));
  set_thread_count(0);
  EXPECT_TRUE(bitwise_equal(a.points, b.points));
}

TEST(RunTsne, RecoversThreeClusters) {
  const auto data = testutil::three_clusters(3, 50, 512);
  const auto layout = run_tsne(data.rows, quick(1000));
  EXPECT_TRUE(layout.points.allFinite());
  EXPECT_TRUE(testutil::recovers_labels(layout.points, data.labels));
}

TEST(RunTsne, KlTraceAndCentering) {
  const auto data = testutil::three_clusters(4, 40, 64);
  const auto layout = run_tsne(data.rows, quick(1000));
  ASSERT_FALSE(layout.kl_trace.empty());
  for (std::size_t k = 0; k < layout.kl_trace.size(); ++k) {
    EXPECT_GE(layout.kl_trace[k].kl, 0.0);
    EXPECT_EQ(layout.kl_trace[k].iteration, 50 * (k + 1));
  }
  ASSERT_TRUE(layout.kl_at(250).has_value());
  ASSERT_TRUE(layout.kl_at(1000).has_value());
  EXPECT_LT(*layout.kl_at(1000), *layout.kl_at(250));
  EXPECT_FALSE(layout.kl_at(251).has_value());
  EXPECT_NEAR(layout.points.col(0).mean(), 0.0, 1e-6);
  EXPECT_NEAR(layout.points.col(1).mean(), 0.0, 1e-6);
}

TEST(RunTsne, DuplicateRowsAreJittered) {
  RowMatrix x = testutil::random_unit_rows(5, 40, 8);
  for (int i = 1; i < 10; ++i) x.row(i) = x.row(0);
  const auto layout = run_tsne(x, quick(200));
  EXPECT_TRUE(layout.points.allFinite());
}

TEST(RunTsne, DatasetEntryRequiresNormalizedRows) {
  const auto d = testutil::random_dataset(6, 30, 8);
  EXPECT_FS_ERROR(run_tsne(d, quick(50)), NotNormalized);
  const auto layout = run_tsne(normalize_rows(d), quick(50));
  EXPECT_EQ(layout.points.rows(), 30);
}

TEST(RunTsne, PerplexityMustLeaveRoom) {
  const auto x = testutil::random_unit_rows(7, 10, 4);
  auto c = quick(10);
  c.perplexity = 9.0;
  EXPECT_FS_ERROR(run_tsne(x, c), PerplexityTooLarge);
}

TEST(RunTsne, SparsePathRuns) {
  const auto data = testutil::three_clusters(8, 40, 32);
  auto c = quick(600);
  c.dense_limit = 50;
  const auto layout = run_tsne(data.rows, c);
  EXPECT_TRUE(testutil::recovers_labels(layout.points, data.labels));
}

TEST(TsneConfig, Validation) {
  TsneConfig c;
  c.theta = -0.1;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.perplexity = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.n_iter = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(LayoutCsv, Format) {
  testutil::TempDir dir;
  std::vector<ImageMeta> meta(2);
  meta[0].image_id = "a";
  meta[1].image_id = "b";
  Layout y(2, 2);
  y << 0.5, -1.25, 3, 4;
  write_layout_csv(dir / "l.csv", meta, y);
  std::ifstream in(dir / "l.csv");
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(all, "image_id,x,y\na,0.5,-1.25\nb,3,4\n");
  write_kl_trace_csv(dir / "k.csv", std::vector<KlSample>{{50, 1.5}});
  std::ifstream kin(dir / "k.csv");
  std::string kall((std::istreambuf_iterator<char>(kin)), {});
  EXPECT_EQ(kall, "iteration,kl\n50,1.5\n");
}
