#include "robq/errors.hpp"
#include "robq/fwht.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace robq {
namespace {

TEST(Fwht, FirstBasisVectorGivesAllOnes) {
  Vector v(4);
  v << 1, 0, 0, 0;
  EXPECT_EQ(fwht(v), Vector::Ones(4));
}

TEST(Fwht, AllOnesGivesScaledFirstBasisVector) {
  Vector expected(4);
  expected << 4, 0, 0, 0;
  EXPECT_EQ(fwht(Vector::Ones(4)), expected);
}

TEST(Fwht, TwiceIsScaledIdentityAtLengthEight) {
  const Vector v = testing::gaussian_vector(8, 1);
  // Small random doubles: the butterfly only adds and subtracts, error is tiny.
  EXPECT_LT((fwht(fwht(v)) - 8.0 * v).norm(), 1e-12 * v.norm());
}

TEST(Fwht, InvolutionExactOnSignVectorsUpTo2To14) {
  Rng rng(3);
  for (std::size_t d = 1; d <= (1u << 14); d <<= 1) {
    Vector v(static_cast<Eigen::Index>(d));
    for (auto& x : v) x = rng.sign();
    EXPECT_EQ(fwht(fwht(v)), static_cast<double>(d) * v) << "d=" << d;
  }
}

TEST(Fwht, MatchesExplicitHadamardMatrix) {
  for (std::size_t d : {1u, 2u, 16u, 128u}) {
    const Vector v = testing::gaussian_vector(d, 5 + d);
    const Matrix H = testing::sylvester_hadamard(d);
    EXPECT_LT((fwht(v) - H * v).norm(), 1e-10 * (1.0 + v.norm())) << "d=" << d;
  }
}

TEST(Fwht, Linear) {
  const Vector x = testing::gaussian_vector(64, 7);
  const Vector y = testing::gaussian_vector(64, 8);
  EXPECT_LT((fwht(2.5 * x - 0.5 * y) - (2.5 * fwht(x) - 0.5 * fwht(y))).norm(), 1e-12);
}

TEST(Fwht, RejectsNonPowerOfTwo) {
  EXPECT_THROW(fwht(Vector::Ones(6)), DimensionError);
  EXPECT_THROW(fwht(Vector(0)), DimensionError);
}

TEST(Fwht, PowerOfTwoHelpers) {
  EXPECT_TRUE(is_power_of_two(1));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(12));
  EXPECT_EQ(next_power_of_two(1), 1u);
  EXPECT_EQ(next_power_of_two(5), 8u);
  EXPECT_EQ(next_power_of_two(1024), 1024u);
}

}  // namespace
}  // namespace robq
