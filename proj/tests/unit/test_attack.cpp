#include "robq/attack.hpp"
#include "robq/errors.hpp"
#include "robq/regression.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robq {
namespace {

TEST(AttackConfig, Presets) {
  const auto desk = AttackConfig::desk();
  EXPECT_EQ(desk.d, 1024u);
  EXPECT_EQ(desk.m, 128u);
  EXPECT_EQ(desk.r, 64u);
  EXPECT_EQ(desk.k, 5u);
  EXPECT_EQ(desk.num_queries, 2000u);
  const auto full = AttackConfig::full();
  EXPECT_EQ(full.d, 4096u);
  EXPECT_EQ(full.m, 250u);
  EXPECT_EQ(full.r, 200u);
  EXPECT_EQ(full.k, 5u);
  EXPECT_EQ(full.num_queries, 5000u);
}

TEST(NormAttack, FirstQueryIsSignedNormalizedDraw) {
  NormAttack a([](const Vector& v) { return v; }, 16, 3);
  const Vector q = a.next();
  EXPECT_NEAR(q.norm(), 1.0, 1e-12);
  EXPECT_EQ(a.issued(), 1u);
  EXPECT_NEAR(a.running_sum().normalized().cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NormAttack, IdentityMapPushesFirstCoordinateDown) {
  // With Pi = I, W_j = 1 iff z_1 >= 0, so each signed draw has a
  // nonpositive first coordinate.
  NormAttack a([](const Vector& v) { return v; }, 32, 4);
  double prev = 0.0;
  for (int i = 0; i < 200; ++i) {
    a.next();
    const double first = a.running_sum()[0];
    ASSERT_LE(first, prev + 1e-15);
    prev = first;
  }
}

TEST(NormAttack, QueriesHaveUnitNorm) {
  GaussianJlMap pi(20, 64, 5);
  NormAttack a([&](const Vector& v) { return pi.apply(v); }, 64, 6);
  for (int i = 0; i < 300; ++i) ASSERT_NEAR(a.next().norm(), 1.0, 1e-12);
}

TEST(NormAttack, ReplayIsBitIdentical) {
  GaussianJlMap pi(20, 64, 7);
  auto lin = [&](const Vector& v) { return pi.apply(v); };
  NormAttack a(lin, 64, 8), b(lin, 64, 8);
  for (int i = 0; i < 50; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(RunAttack, ZeroIterations) {
  AttackConfig c = AttackConfig::desk();
  c.num_queries = 0;
  ExactNorm exact;
  EXPECT_TRUE(run_attack(c, {&exact}).empty());
}

TEST(RunAttack, ExactOracleAlwaysOne) {
  AttackConfig c;
  c.d = 64;
  c.m = 16;
  c.num_queries = 100;
  ExactNorm exact;
  for (const auto& rec : run_attack(c, {&exact})) {
    EXPECT_EQ(rec.truth, 1.0);
    EXPECT_NEAR(*rec.estimate("exact"), 1.0, 1e-12);
  }
}

TEST(RunAttack, NaiveMapDrifts) {
  AttackConfig c = AttackConfig::desk();
  c.seed = 3;
  const auto records = run_norm_experiment(c, false);
  ASSERT_EQ(records.size(), 2000u);
  EXPECT_GE(max_deviation(records, "naive"), 0.2);
  EXPECT_FALSE(records[0].estimate("baseline1").has_value());
}

TEST(RunAttack, CsvLayout) {
  AttackConfig c;
  c.d = 32;
  c.m = 8;
  c.r = 6;
  c.k = 3;
  c.num_queries = 5;
  const auto records = run_norm_experiment(c, true);
  const std::string csv = attack_csv(records);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "iteration,truth,naive,robust,baseline1,baseline2");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(rows, 5);
  const auto again = attack_csv(run_norm_experiment(c, true));
  EXPECT_EQ(csv, again);
}

TEST(Summaries, DeviationAndFraction) {
  std::vector<IterationRecord> recs(4);
  const double vals[] = {1.0, 1.1, 0.7, 1.3};
  for (int i = 0; i < 4; ++i) {
    recs[i].iteration = static_cast<std::size_t>(i + 1);
    recs[i].truth = 1.0;
    recs[i].labels = {"x"};
    recs[i].estimates = {vals[i]};
  }
  EXPECT_NEAR(max_deviation(recs, "x"), 0.3, 1e-12);
  EXPECT_EQ(fraction_within(recs, "x", 0.85, 1.15), 0.5);
  EXPECT_EQ(fraction_within(recs, "missing", 0.0, 2.0), 0.0);
}

TEST(Baseline1, AllMapsMedianIsAccurateOnObliviousQueries) {
  Baseline1 b(256, 64, 15, 15, 9);
  int ok = 0;
  for (int i = 0; i < 400; ++i) {
    const Vector q = testing::unit_vector(256, 50 + static_cast<std::uint64_t>(i));
    const double v = b.answer(q);
    ok += std::abs(v - 1.0) <= 0.25;
  }
  EXPECT_GE(ok, 380);
}

TEST(Baseline2, TracksNormOnObliviousQueries) {
  Baseline2 b(256, 64, 16, 5, 10);
  int ok = 0;
  for (int i = 0; i < 200; ++i) {
    const Vector q = testing::unit_vector(256, 900 + static_cast<std::uint64_t>(i));
    ok += std::abs(b.answer(q) - 1.0) <= 0.25;
  }
  EXPECT_GE(ok, 190);
}

TEST(AllWithin, FloorAndBand) {
  EXPECT_TRUE(all_within({{1, 1.0, 1.2}, {2, 0.0, 5e-13}}, 0.25));
  EXPECT_FALSE(all_within({{1, 1.0, 1.3}}, 0.25));
  EXPECT_FALSE(all_within({{1, 0.0, 1e-6}}, 0.25));
}

TEST(RegressionAttack, BreaksSingleSketch) {
  int broken = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix A = testing::gaussian_matrix(200, 20, 1000 + s);
    const Vector b0 = testing::gaussian_vector(200, 2000 + s);
    RegressionSketch sk(A, b0, 0.25, s);
    const auto recs = run_regression_attack(A, b0, 5, 100, s, [&](const SparseUpdate& u) { return sk.update(u); });
    ASSERT_EQ(recs.size(), 100u);
    broken += !all_within(recs, 0.25);
  }
  EXPECT_GE(broken, 5);
}

TEST(RegressionAttack, TruthTracksOracle) {
  const Matrix A = testing::gaussian_matrix(60, 5, 3);
  const Vector b0 = testing::gaussian_vector(60, 4);
  Vector b = b0;
  const auto recs = run_regression_attack(A, b0, 3, 40, 1, [&](const SparseUpdate& u) {
    for (auto [i, v] : u.entries) b[static_cast<Eigen::Index>(i)] = v;
    return exact_cost_oracle(A, b);
  });
  for (const auto& r : recs) EXPECT_NEAR(r.estimate, r.truth, 1e-8 * r.truth);
  EXPECT_TRUE(all_within(recs, 1e-6));
}

TEST(RegressionAdversary, TouchesOnlyItsCoordinates) {
  const Matrix A = testing::gaussian_matrix(50, 4, 5);
  RegressionAdversary adv(A, testing::gaussian_vector(50, 6), 3, 7);
  for (int t = 0; t < 40; ++t) {
    const auto u = adv.next();
    ASSERT_EQ(u.entries.size(), 3u);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(u.entries[j].first, adv.coordinates()[j]);
    adv.observe(1.0 + 0.01 * t);
  }
}

TEST(Chasers, ProduceQueriesOfDataDimension) {
  const Matrix X = testing::gaussian_matrix(10, 6, 8);
  DistanceChaser dc(X, 1);
  for (int t = 0; t < 5; ++t) {
    const Vector q = dc.next();
    ASSERT_EQ(q.size(), 6);
    std::vector<double> est(10, 1.0);
    dc.observe(q, est);
  }
  KdeChaser kc(X, 2);
  for (int t = 0; t < 5; ++t) {
    const Vector q = kc.next();
    ASSERT_EQ(q.size(), 6);
    kc.observe(q, 0.5, 0.4, true);
  }
}

TEST(WhiteBox, QueryCountAndLocation) {
  Rng rng(3);
  Matrix X(200, 1);
  for (Eigen::Index i = 0; i < 200; ++i) X(i, 0) = rng.uniform();
  NetWrapper net(X, 0.3, 0.2, Kernel(KernelKind::Exp, 1.0), 0.0, 0.0, 1);
  const auto qs = kde_white_box_queries(net, X, 123, 4);
  ASSERT_EQ(qs.size(), 123u);
  for (const auto& q : qs) EXPECT_LE((q - net.center()).norm(), net.ball_radius() + net.net_radius());
}

}  // namespace
}  // namespace robq
