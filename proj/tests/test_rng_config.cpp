#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "facespace/error.hpp"
#include "facespace/kvconfig.hpp"
#include "facespace/parallel.hpp"
#include "facespace/rng.hpp"
#include "facespace/synthgen.hpp"
#include "facespace/tsne.hpp"
#include "helpers.hpp"

using namespace facespace;

TEST(Rng, SplitmixReferenceValues) {
  // Reference outputs of the published splitmix64 for state 0 and 1 after
  // one increment.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(splitmix64(1), 0x910a2dec89025cc1ULL);
}

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
  auto a = Rng::substream(7, StreamTag::RowNoise, 3);
  auto b = Rng::substream(7, StreamTag::RowNoise, 3);
  auto c = Rng::substream(7, StreamTag::RowNoise, 4);
  auto d = Rng::substream(7, StreamTag::TsneInit, 3);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
}

TEST(Rng, NormalMoments) {
  Rng rng(42);
  double sum = 0, sq = 0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.015);
}

TEST(Rng, BelowIsUniformAndInRange) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(9);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(v.begin(), v.end());
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

TEST(KeyValues, ParseCommentsWhitespaceAndDuplicates) {
  const auto kv = parse_key_values("# comment\n\n  a = 1 \nb=x y\n");
  EXPECT_EQ(kv.at("a"), "1");
  EXPECT_EQ(kv.at("b"), "x y");
  EXPECT_THROW(parse_key_values("a=1\na=2\n"), Error);
  EXPECT_THROW(parse_key_values("novalue\n"), Error);
}

TEST(KeyValues, FormatRoundTrip) {
  const KeyValues kv{{"z", "1"}, {"a", "0.1"}};
  EXPECT_EQ(format_key_values(kv), "a=0.1\nz=1\n");
  EXPECT_EQ(parse_key_values(format_key_values(kv)), kv);
}

TEST(KeyValues, DoublesRoundTripExactly) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(20)) - 10.0);
    EXPECT_EQ(parse_double(format_double(v), "v"), v);
  }
  EXPECT_THROW(parse_double("1.5x", "k"), Error);
  EXPECT_THROW(parse_u64("-3", "k"), Error);
  EXPECT_EQ(parse_double_list("0, 20,30", "k"), (std::vector<double>{0, 20, 30}));
}

TEST(KeyValues, UnknownKeysRejected) {
  try {
    reject_unknown_keys({{"a", "1"}, {"bogus", "2"}}, {"a"}, "cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(Configs, SynthAndTsneRoundTrip) {
  SynthConfig s;
  s.sigma_noise = 0.125;
  s.yaw_levels = {0, 45};
  s.seed = 99;
  const auto back = SynthConfig::from_key_values(s.to_key_values());
  EXPECT_EQ(back.to_key_values(), s.to_key_values());
  TsneConfig t;
  t.perplexity = 12.5;
  t.n_iter = 321;
  EXPECT_EQ(TsneConfig::from_key_values(t.to_key_values()).to_key_values(), t.to_key_values());
  EXPECT_THROW(SynthConfig::from_key_values({{"sigma_nois", "1"}}), Error);
  EXPECT_THROW(TsneConfig::from_key_values({{"theta", "1.5"}}), Error);
}

TEST(Parallel, CoversRangeExactlyOnce) {
  for (std::size_t threads : {1u, 3u, 8u}) {
    set_thread_count(threads);
    std::vector<int> hits(1001, 0);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
  set_thread_count(0);
}

TEST(Parallel, PropagatesExceptions) {
  set_thread_count(4);
  EXPECT_THROW(parallel_for(100, [](std::size_t b, std::size_t) {
                 if (b > 0) throw std::runtime_error("boom");
               }),
               std::runtime_error);
  set_thread_count(0);
}
