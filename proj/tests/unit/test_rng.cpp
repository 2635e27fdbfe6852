#include "robq/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace robq {
namespace {

TEST(Rng, PhiloxKnownAnswerAtZeroKeyAndCounter) {
  // Published Philox4x32-10 test vector: counter 0, key 0 gives
  // 6627e8d5 e169c58d bc57ac4c 9b00dbd8.
  Rng rng(0, 0);
  EXPECT_EQ(rng(), 0x6627e8d5e169c58dull);
  EXPECT_EQ(rng(), 0xbc57ac4c9b00dbd8ull);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, StreamsDiffer) {
  Rng a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a() == b();
  EXPECT_EQ(equal, 0);
}

TEST(Rng, SubstreamsAreDistinctAndReproducible) {
  const Rng root(7);
  std::set<std::uint64_t> first;
  for (std::uint64_t id = 0; id < 200; ++id) {
    Rng s = root.substream(id);
    Rng t = root.substream(id);
    const auto v = s();
    EXPECT_EQ(v, t());
    first.insert(v);
  }
  EXPECT_EQ(first.size(), 200u);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(Rng, NormalMoments) {
  Rng rng(2);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
  EXPECT_NEAR(s4 / n, 3.0, 0.1);
}

TEST(Rng, UniformIndexCoversRangeEvenly) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = rng.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
}

TEST(Rng, SignIsBalanced) {
  Rng rng(4);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double s = rng.sign();
    ASSERT_TRUE(s == 1.0 || s == -1.0);
    sum += s;
  }
  EXPECT_LT(std::abs(sum), 1500.0);
}

TEST(Rng, SplitmixIsInjectiveOnSmallRange) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(splitmix64(i));
  EXPECT_EQ(seen.size(), 10000u);
}

}  // namespace
}  // namespace robq
