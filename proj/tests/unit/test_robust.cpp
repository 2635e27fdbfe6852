#include "robq/errors.hpp"
#include "robq/robust.hpp"

#include <gtest/gtest.h>

#include <set>

namespace robq {
namespace {

struct Constant {
  double value;
  double answer(const int&) const { return value; }
};

struct SeedEcho {
  std::uint64_t seed;
  double answer(const int& q) const { return 1.0 + static_cast<double>((seed ^ static_cast<std::uint64_t>(q)) % 1000) * 1e-3; }
};

// 1 in 5 replicas answers garbage far above the truth.
struct Faulty {
  bool broken;
  double answer(const int&) const { return broken ? 500.0 : 2.0; }
};

OutputGrid stub_grid() { return OutputGrid(0.01, 1000.0, 1.01); }

TEST(RobustWrapper, SingleQueryBudget) {
  auto w = robust_build<int>([](std::uint64_t) { return Constant{3.0}; }, 1, 1, stub_grid(), 1);
  EXPECT_GE(w.replicas().size(), 1u);
  EXPECT_NEAR(w.query(0), 3.0, 3.0 * 0.0101);
  EXPECT_EQ(w.queries_used(), 1u);
  EXPECT_THROW(w.query(0), BudgetExhaustedError);
}

TEST(RobustWrapper, BudgetEnforcedAtQPlusOne) {
  auto w = robust_build<int>([](std::uint64_t) { return Constant{1.0}; }, framework_params(100, 10, 7, 1),
                             stub_grid(), 2);
  for (int i = 0; i < 7; ++i) w.query(i);
  EXPECT_EQ(w.remaining(), 0u);
  EXPECT_THROW(w.query(7), BudgetExhaustedError);
  EXPECT_EQ(w.transcript().size(), 7u);
}

TEST(RobustWrapper, ReplicaSeedsDistinctAndDeterministic) {
  auto factory = [](std::uint64_t s) { return SeedEcho{s}; };
  auto a = robust_build<int>(factory, framework_params(100, 10), stub_grid(), 5);
  auto b = robust_build<int>(factory, framework_params(100, 10), stub_grid(), 5);
  EXPECT_EQ(a.replica_seeds(), b.replica_seeds());
  const std::set<std::uint64_t> unique(a.replica_seeds().begin(), a.replica_seeds().end());
  EXPECT_EQ(unique.size(), a.replica_seeds().size());
  EXPECT_EQ(a.replicas().size(), 19087u);
  for (int q = 0; q < 10; ++q) EXPECT_EQ(a.query(q), b.query(q));
}

TEST(RobustWrapper, TranscriptRecordsQueriesAndResponses) {
  auto w = robust_build<int>([](std::uint64_t s) { return SeedEcho{s}; }, 5, 1, stub_grid(), 3);
  std::vector<double> out;
  for (int q = 10; q < 15; ++q) out.push_back(w.query(q));
  ASSERT_EQ(w.transcript().size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(w.transcript()[i].query, static_cast<int>(10 + i));
    EXPECT_EQ(w.transcript()[i].response, out[i]);
  }
}

TEST(RobustWrapper, ResponsesStayInsideReplicaRange) {
  auto w = robust_build<int>([](std::uint64_t s) { return SeedEcho{s}; }, 50, 1, stub_grid(), 4);
  for (int i = 0; i < 50; ++i) {
    const double v = w.query(0);
    EXPECT_GE(v, 1.0 / 1.01);
    EXPECT_LE(v, 2.0 * 1.01);
  }
}

TEST(RobustWrapper, RepeatedQueryIsStable) {
  // Replicas agree to within one grid cell, so every response lands on the
  // same or an adjacent grid point.
  int stable = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto w = robust_build<int>([](std::uint64_t s) { return Constant{1.0 + static_cast<double>(s % 3) * 1e-4}; },
                               30, 1, stub_grid(), seed);
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < 30; ++i) {
      const double v = w.query(0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    stable += hi <= lo * 1.0101;
  }
  EXPECT_GE(stable, 99);
}

TEST(RobustWrapper, OutvotesFaultyMinority) {
  auto factory = [](std::uint64_t s) { return Faulty{s % 5 == 0}; };
  auto w = robust_build<int>(factory, framework_params(400, 200, 50, 1), stub_grid(), 9);
  for (int i = 0; i < 50; ++i) {
    const double v = w.query(i);
    EXPECT_GE(v, 2.0 / 1.01);
    EXPECT_LE(v, 2.0 * 1.01);
  }
}

TEST(RobustWrapper, PerQueryGridOverride) {
  auto w = robust_build<int>([](std::uint64_t) { return Constant{5.0}; }, 2, 1, stub_grid(), 1);
  OutputGrid coarse(1.0, 100.0, 2.0);
  const double v = w.query(0, coarse);
  EXPECT_TRUE(v == 4.0 || v == 8.0);
}

TEST(RobustWrapper, Movable) {
  auto w = robust_build<int>([](std::uint64_t) { return Constant{1.0}; }, 3, 1, stub_grid(), 1);
  w.query(0);
  auto moved = std::move(w);
  EXPECT_EQ(moved.queries_used(), 1u);
  moved.query(1);
  EXPECT_EQ(moved.remaining(), 1u);
}

}  // namespace
}  // namespace robq
